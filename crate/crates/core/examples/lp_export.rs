// Writes models in CPLEX LP format for an external MIP solver.

use std::error::Error;

use treedist::dp::{naive_model, weights_segmental};
use treedist::ilp::{build_combiner, export_lp};
use treedist::{parse_bracket, unit_cost, DistanceClass};

pub fn run() -> Result<(), Box<dyn Error>> {
    let t1 = parse_bracket("a(b,c)")?;
    let t2 = parse_bracket("a(b,d)")?;
    let cost = unit_cost();

    let naive = naive_model(&t1, &t2, &cost, DistanceClass::Edit)?;
    println!("naive edit model: {} vars, {} rows", naive.num_vars(), naive.num_constraints());
    print!("{}", export_lp(&naive));

    let table = weights_segmental(&t1, &t2, &cost);
    let combiner = build_combiner(&t1, &t2, &cost, &table);
    println!("\nsegmental combiner: {} vars, {} rows", combiner.num_vars(), combiner.num_constraints());
    print!("{}", export_lp(&combiner));

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, export_lp(&naive))?;
        println!("\nwrote {path}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
