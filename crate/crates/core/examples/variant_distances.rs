// The four distance classes side by side. Each class restricts the mappings
// of the previous one, so the distances never decrease along the chain.

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treedist::harness::random_tree;
use treedist::mapping::is_valid;
use treedist::{distance, unit_cost, DistanceClass, Method, SolverConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cost = unit_cost();
    let cfg = SolverConfig::default();
    println!("{:>4} {:>4}  {:>6} {:>6} {:>6} {:>6}", "n1", "n2", "edit", "seg", "botseg", "bot");
    for _ in 0..6 {
        let t1 = random_tree(&mut rng, 20, 4, 3);
        let t2 = random_tree(&mut rng, 24, 4, 3);
        let mut row = Vec::new();
        for class in DistanceClass::ALL {
            let r = distance(&t1, &t2, &cost, class, Method::Dp, &cfg)?;
            assert!(is_valid(class, &t1, &t2, &r.mapping));
            row.push(r.distance);
        }
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
        println!("{:>4} {:>4}  {:>6} {:>6} {:>6} {:>6}", t1.len(), t2.len(), row[0], row[1], row[2], row[3]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
