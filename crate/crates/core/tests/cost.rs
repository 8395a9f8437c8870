use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treedist::cost::{distance_from_weight, mapping_cost, pair_weight, total_indel, validate_metric, CostError};
use treedist::harness::{alphabet_label, random_tree};
use treedist::{unit_cost, CostFunction, Mapping};

/// A metric on `k` labels: points on a line, with deletion as distance to a
/// blank point placed further out.
fn line_metric(rng: &mut ChaCha8Rng, k: usize) -> CostFunction {
    let scale = rng.gen_range(1..=4);
    let pos: Vec<i64> = (0..k).map(|_| rng.gen_range(0..10)).collect();
    let blank = 12;
    let mut text = format!("scale {scale}\n");
    for i in 0..k {
        let a = alphabet_label(i, k);
        text += &format!("del {a} {}\nins {a} {}\n", blank - pos[i], blank - pos[i]);
        for j in 0..k {
            let b = alphabet_label(j, k);
            text += &format!("sub {a} {b} {}\n", (pos[i] - pos[j]).abs());
        }
    }
    CostFunction::parse(&text).unwrap()
}

proptest! {
    #[test]
    fn objective_rewrite_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cost = line_metric(&mut rng, 3);
        let n1 = rng.gen_range(1..12);
        let n2 = rng.gen_range(1..12);
        let t1 = random_tree(&mut rng, n1, 3, 3);
        let t2 = random_tree(&mut rng, n2, 3, 3);
        let mut ys: Vec<usize> = t2.nodes().collect();
        ys.shuffle(&mut rng);
        let k = rng.gen_range(0..=n1.min(n2));
        let m: Mapping = t1.nodes().zip(ys).take(k).collect();
        let weight: i64 = m.iter().map(|(x, y)| pair_weight(&cost, t1.label(x), t2.label(y)).0).sum();
        let c = mapping_cost(&cost, &t1, &t2, &m).unwrap();
        prop_assert_eq!(c + weight, total_indel(&cost, &t1, &t2));
        prop_assert_eq!(distance_from_weight(&cost, &t1, &t2, weight).unwrap(), c);
    }

    #[test]
    fn metric_costs_have_nonnegative_weights(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cost = line_metric(&mut rng, 4);
        let labels: Vec<_> = (0..4).map(|i| alphabet_label(i, 4)).collect();
        prop_assert!(validate_metric(&cost, &labels).is_empty());
        for a in &labels {
            for b in &labels {
                prop_assert!(pair_weight(&cost, a, b).0 >= 0);
            }
        }
    }
}

#[test]
fn mapping_cost_rejects_bad_mappings() {
    let t = treedist::parse_bracket("a(b)").unwrap();
    let cost = unit_cost();
    let dup = Mapping::from_pairs([(0, 0), (1, 0)]);
    assert!(matches!(mapping_cost(&cost, &t, &t, &dup), Err(CostError::NotOneToOne(..))));
    let out = Mapping::from_pairs([(0, 5)]);
    assert!(matches!(mapping_cost(&cost, &t, &t, &out), Err(CostError::PairOutOfRange(..))));
}

#[test]
fn rendering_is_reduced_and_exact() {
    let cost = CostFunction::parse("scale 6").unwrap();
    assert_eq!(cost.render(12), "2");
    assert_eq!(cost.render(9), "3/2");
    assert_eq!(cost.render(4), "2/3");
    assert_eq!(cost.render(0), "0");
}

#[test]
fn parse_errors_name_the_line() {
    for (text, line) in
        [("scale 2\nsub a 3", 2), ("bogus 1", 1), ("scale 0", 1), ("scale 1\nscale 2", 2), ("del a x", 1)]
    {
        match CostFunction::parse(text) {
            Err(CostError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?} gave {other:?}"),
        }
    }
}
