// The embedded 0-1 solver on a hand-built weighted set packing model.

use std::error::Error;
use std::time::Duration;

use treedist::ilp::{Constraint, IlpModel};
use treedist::solver::{solve, Branching, SolveStatus, SolverConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    // Five sets over four elements; pick disjoint sets of maximum weight.
    let sets: [(&[usize], i64); 5] = [(&[0, 1], 6), (&[1, 2], 5), (&[2, 3], 6), (&[0], 2), (&[3], 2)];
    let mut model = IlpModel::new();
    for (i, (_, w)) in sets.iter().enumerate() {
        model.add_var(i, 0, *w);
    }
    for e in 0..4 {
        model.add_constraint(Constraint::packing((0..sets.len()).filter(|&i| sets[i].0.contains(&e))));
    }

    for branching in [Branching::MaxCoefficient, Branching::FirstIndex] {
        let cfg = SolverConfig { branching, ..SolverConfig::default() };
        let sol = solve(&model, &cfg)?;
        let chosen = sol.assignment.as_deref().unwrap_or_default();
        let picked: Vec<usize> = (0..sets.len()).filter(|&i| chosen[i]).collect();
        println!("{branching:?}: {:?} value {:?} sets {picked:?} in {} nodes", sol.status, sol.value, sol.nodes);
        assert_eq!(sol.value, Some(12));
    }

    // A larger random instance under a node budget.
    let mut big = IlpModel::new();
    let n = 60;
    for i in 0..n {
        big.add_var(i, 0, 1 + (i as i64 * 37) % 23);
    }
    for i in 0..n {
        big.add_constraint(Constraint::packing([i, (i * 7 + 3) % n, (i * 13 + 5) % n]));
    }
    let cfg =
        SolverConfig { node_limit: Some(50), time_limit: Some(Duration::from_secs(5)), ..SolverConfig::default() };
    let capped = solve(&big, &cfg)?;
    println!("capped at 50 nodes: {:?} incumbent {:?}", capped.status, capped.value);
    let full = solve(&big, &SolverConfig::default())?;
    println!("uncapped: {:?} optimum {:?} in {} nodes", full.status, full.value, full.nodes);
    assert_eq!(full.status, SolveStatus::Optimal);
    assert!(capped.value <= full.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
