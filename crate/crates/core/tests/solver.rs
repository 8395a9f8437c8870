use std::time::Duration;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treedist::bounds::{PackingLp, PairForest};
use treedist::dp::weights_segmental;
use treedist::harness::random_tree;
use treedist::ilp::{build_combiner, Constraint, IlpModel, Sense};
use treedist::solver::{solve, solve_until, Branching, Hints, SolveStatus, SolverConfig, SolverError};
use treedist::unit_cost;

fn enumerate(model: &IlpModel) -> Option<i64> {
    let n = model.num_vars();
    (0u32..1 << n)
        .map(|mask| (0..n).map(|v| mask >> v & 1 == 1).collect::<Vec<_>>())
        .filter(|a| model.is_feasible(a))
        .map(|a| model.objective(&a))
        .max()
}

fn random_model(seed: u64) -> IlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = IlpModel::new();
    let n = rng.gen_range(0..=12);
    for v in 0..n {
        m.add_var(v, 0, rng.gen_range(0..=9));
    }
    m.constant = rng.gen_range(0..5);
    for _ in 0..rng.gen_range(0..=10) {
        if n == 0 {
            break;
        }
        let k = rng.gen_range(1..=n.min(4));
        let mut terms: Vec<(usize, i64)> = (0..k).map(|_| (rng.gen_range(0..n), rng.gen_range(-2..=2))).collect();
        terms.sort_unstable();
        terms.dedup_by_key(|t| t.0);
        let sense = if rng.gen_bool(0.15) { Sense::Eq } else { Sense::Le };
        m.add_constraint(Constraint { terms, sense, rhs: rng.gen_range(0..=2) });
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_enumeration(seed in any::<u64>()) {
        let m = random_model(seed);
        let want = enumerate(&m);
        for branching in [Branching::MaxCoefficient, Branching::FirstIndex] {
            let sol = solve(&m, &SolverConfig { branching, ..SolverConfig::default() }).unwrap();
            match want {
                Some(v) => {
                    prop_assert_eq!(sol.status, SolveStatus::Optimal);
                    prop_assert_eq!(sol.value, Some(v));
                    let a = sol.assignment.unwrap();
                    prop_assert!(m.is_feasible(&a));
                    prop_assert_eq!(m.objective(&a), v);
                }
                None => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
            }
        }
    }

    #[test]
    fn structural_bounds_keep_the_optimum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n1 = rng.gen_range(1..14);
        let n2 = rng.gen_range(1..14);
        let t1 = random_tree(&mut rng, n1, 3, 3);
        let t2 = random_tree(&mut rng, n2, 3, 3);
        let cost = unit_cost();
        let table = weights_segmental(&t1, &t2, &cost);
        let model = build_combiner(&t1, &t2, &cost, &table);
        let cfg = SolverConfig::default();
        let plain = solve(&model, &cfg).unwrap();
        let forest = PairForest::new(&model, &t1, t1.root(), &t2, t2.root());
        let lp = PackingLp::new(&model);
        for bounds in [vec![&forest as &dyn treedist::solver::UpperBound], vec![&lp], vec![&forest, &lp]] {
            let hints = Hints { bounds, start: Some(forest.constrained_packing(&model)) };
            let hinted = solve_until(&model, &cfg, None, hints).unwrap();
            prop_assert_eq!(hinted.status, SolveStatus::Optimal);
            prop_assert_eq!(hinted.value, plain.value);
        }
    }
}

#[test]
fn negative_coefficients_are_rejected() {
    let mut m = IlpModel::new();
    m.add_var(0, 0, -1);
    assert_eq!(solve(&m, &SolverConfig::default()), Err(SolverError::NegativeCoefficient { var: 0, coeff: -1 }));
}

#[test]
fn limits_report_timeout_with_incumbent() {
    let mut m = IlpModel::new();
    let n = 40;
    for v in 0..n {
        m.add_var(v, 0, 1 + (v as i64 * 7) % 5);
    }
    for v in 0..n {
        m.add_constraint(Constraint::packing([v, (v + 1) % n, (v * 3 + 7) % n]));
    }
    let capped = solve(&m, &SolverConfig { node_limit: Some(3), ..SolverConfig::default() }).unwrap();
    assert_eq!(capped.status, SolveStatus::Timeout);
    let full = solve(&m, &SolverConfig::with_time_limit(Duration::from_secs(60))).unwrap();
    assert_eq!(full.status, SolveStatus::Optimal);
    if let Some(v) = capped.value {
        assert!(v <= full.value.unwrap());
        assert!(m.is_feasible(capped.assignment.as_ref().unwrap()));
    }
}

#[test]
fn empty_model_is_optimal_at_the_constant() {
    let mut m = IlpModel::new();
    m.constant = 4;
    let sol = solve(&m, &SolverConfig::default()).unwrap();
    assert_eq!((sol.status, sol.value, sol.total(&m)), (SolveStatus::Optimal, Some(0), Some(4)));
}
