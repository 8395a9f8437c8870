// Unordered edit distance three ways: the decomposed IP, the naive IP and
// brute force.

use std::error::Error;

use treedist::cost::mapping_cost;
use treedist::mapping::is_tai;
use treedist::{distance, parse_bracket, unit_cost, DistanceClass, Method, SolverConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let t1 = parse_bracket("a(b(c,d),e(f))")?;
    let t2 = parse_bracket("a(e(f,g),b(d))")?;
    let cost = unit_cost();
    let cfg = SolverConfig::default();

    for method in Method::ALL {
        let r = distance(&t1, &t2, &cost, DistanceClass::Edit, method, &cfg)?;
        println!(
            "{method:>6}: distance {} ({} pairs mapped, {} solver nodes, {:?})",
            cost.render(r.distance),
            r.mapping.len(),
            r.stats.solver_nodes,
            r.stats.elapsed
        );
        assert!(is_tai(&t1, &t2, &r.mapping));
        assert_eq!(mapping_cost(&cost, &t1, &t2, &r.mapping)?, r.distance);
    }

    let r = distance(&t1, &t2, &cost, DistanceClass::Edit, Method::Dp, &cfg)?;
    println!("mapping:");
    for (x, y) in r.mapping.iter() {
        println!("  {}#{} -> {}#{}", t1.label(x), t1.pre_order(x), t2.label(y), t2.pre_order(y));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
