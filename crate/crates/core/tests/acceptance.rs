// Acceptance checks, one PASS/FAIL line each. Tolerances are pinned below;
// every distance comparison is exact integer equality.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treedist::cost::mapping_cost;
use treedist::dp::weights_edit;
use treedist::harness::random_tree;
use treedist::ilp::{build_antichain_pairwise, build_dp_subproblem, build_naive_tai};
use treedist::mapping::is_valid;
use treedist::matching::{
    exhaustive_bijection, exhaustive_matching, max_weight_bijection, max_weight_matching, WeightMatrix,
};
use treedist::solver::{solve, SolveStatus};
use treedist::{distance, parse_bracket, unit_cost, DistanceClass, DistanceResult, Method, SolverConfig, Tree};

const CROSS_PAIRS: usize = 200;
const CROSS_MAX_TOTAL: usize = 12;
const CROSS_LABELS: usize = 3;
const MATRICES: usize = 500;
const MATRIX_MAX_SIDE: usize = 6;
const MATRIX_MAX_WEIGHT: i64 = 20;
const FORBIDDEN_RATE: f64 = 0.10;
const CHAIN_PAIRS: usize = 100;
const CHAIN_MAX_TOTAL: usize = 40;
const IDENTITY_TREES: usize = 50;
const SYMMETRY_PAIRS: usize = 50;
const SYMMETRY_MAX_TOTAL: usize = 20;
const VARIANT_PAIRS: usize = 20;
const VARIANT_TOTAL: (usize, usize) = (80, 100);
const VARIANT_MAX_DEGREE: usize = 4;
const VARIANT_LIMIT: Duration = Duration::from_secs(10);
const EDIT_PAIRS: usize = 10;
const EDIT_MAX_TOTAL: usize = 30;
const EDIT_LIMIT: Duration = Duration::from_secs(60);

struct Instance {
    t1: Tree,
    t2: Tree,
}

/// Random pair with total size in `lo..=hi`, each side at least one node.
fn random_pair(rng: &mut ChaCha8Rng, lo: usize, hi: usize, degree: usize, labels: usize) -> Instance {
    let total = rng.gen_range(lo.max(2)..=hi);
    let n1 = rng.gen_range(1..total);
    let t1 = random_tree(rng, n1, degree, labels);
    let t2 = random_tree(rng, total - n1, degree, labels);
    Instance { t1, t2 }
}

fn solve_class(inst: &Instance, class: DistanceClass, method: Method, cfg: &SolverConfig) -> DistanceResult {
    distance(&inst.t1, &inst.t2, &unit_cost(), class, method, cfg)
        .unwrap_or_else(|e| panic!("{class}/{method} on {} vs {}: {e}", inst.t1, inst.t2))
}

/// Empty when the mapping is sound, else a description.
fn reconstruction_issue(inst: &Instance, class: DistanceClass, method: Method, r: &DistanceResult) -> Option<String> {
    if !is_valid(class, &inst.t1, &inst.t2, &r.mapping) {
        return Some(format!("{class}/{method}: mapping breaks the class on {} vs {}", inst.t1, inst.t2));
    }
    match mapping_cost(&unit_cost(), &inst.t1, &inst.t2, &r.mapping) {
        Ok(c) if c == r.distance => None,
        other => Some(format!(
            "{class}/{method}: mapping cost {other:?} vs distance {} on {} vs {}",
            r.distance, inst.t1, inst.t2
        )),
    }
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, issues: &[String], detail: String) {
        let verdict = if issues.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {id}: {verdict}  {name}  ({detail})");
        for i in issues.iter().take(5) {
            println!("    {i}");
        }
        if !issues.is_empty() {
            self.failed += 1;
        }
    }
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    let cfg = SolverConfig::default();
    let cost = unit_cost();

    // 1, 2, 8 (subproblems) and 9 share the small instances.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let small: Vec<Instance> =
        (0..CROSS_PAIRS).map(|_| random_pair(&mut rng, 2, CROSS_MAX_TOTAL, 3, CROSS_LABELS)).collect();
    let mut cross = Vec::new();
    let mut rebuild = Vec::new();
    let started = Instant::now();
    for inst in &small {
        for class in DistanceClass::ALL {
            let got: Vec<DistanceResult> = Method::ALL.iter().map(|&m| solve_class(inst, class, m, &cfg)).collect();
            let values: Vec<i64> = got.iter().map(|r| r.distance).collect();
            if values.iter().any(|&d| d != values[0]) || got.iter().any(|r| !r.exact) {
                cross.push(format!("{class} on {} vs {}: dp/naive/oracle = {values:?}", inst.t1, inst.t2));
            }
            for (m, r) in Method::ALL.iter().zip(&got) {
                rebuild.extend(reconstruction_issue(inst, class, *m, r));
            }
        }
    }
    report.line(
        1,
        "dp = naive = oracle, all classes",
        &cross,
        format!("{CROSS_PAIRS} pairs, total <= {CROSS_MAX_TOTAL}, {CROSS_LABELS} labels, {:.1?}", started.elapsed()),
    );

    let mut sub_diff = Vec::new();
    let mut shape = Vec::new();
    let mut subproblems = 0;
    for inst in &small {
        let (t1, t2) = (&inst.t1, &inst.t2);
        let table = weights_edit(t1, t2, &cost, &cfg, None).expect("no deadline");
        for x in t1.nodes().filter(|&x| !t1.is_leaf(x)) {
            for y in t2.nodes().filter(|&y| !t2.is_leaf(y)) {
                subproblems += 1;
                let paths = build_dp_subproblem(t1, x, t2, y, &cost, &table);
                let pairwise = build_antichain_pairwise(t1, x, t2, y, &cost, &table);
                let a = solve(&paths, &cfg).expect("valid model");
                let b = solve(&pairwise, &cfg).expect("valid model");
                if a.status != SolveStatus::Optimal || a.total(&paths) != b.total(&pairwise) {
                    sub_diff.push(format!(
                        "({x},{y}) in {t1} vs {t2}: {:?} vs {:?}",
                        a.total(&paths),
                        b.total(&pairwise)
                    ));
                }
                let want = t1.leaves_under(x).count() + t2.leaves_under(y).count();
                if paths.num_constraints() != want {
                    shape.push(format!("({x},{y}) in {t1} vs {t2}: {} rows, expected {want}", paths.num_constraints()));
                }
            }
        }
    }
    report.line(2, "path-row and pairwise subproblems agree", &sub_diff, format!("{subproblems} internal subproblems"));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut matching = Vec::new();
    for _ in 0..MATRICES {
        let rows = rng.gen_range(0..=MATRIX_MAX_SIDE);
        let cols = rng.gen_range(0..=MATRIX_MAX_SIDE);
        let mut w = WeightMatrix::new(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if rng.gen_bool(FORBIDDEN_RATE) {
                    w.forbid(i, j);
                } else {
                    w.set(i, j, rng.gen_range(0..=MATRIX_MAX_WEIGHT));
                }
            }
        }
        let m = max_weight_matching(&w).value;
        let b = max_weight_bijection(&w).map(|b| b.value);
        if m != exhaustive_matching(&w) || b != exhaustive_bijection(&w) {
            matching.push(format!("{w:?}: matching {m}, bijection {b:?}"));
        }
    }
    report.line(
        3,
        "Hungarian = enumeration",
        &matching,
        format!("{MATRICES} matrices up to {MATRIX_MAX_SIDE}x{MATRIX_MAX_SIDE}, weights 0-{MATRIX_MAX_WEIGHT}, {FORBIDDEN_RATE} forbidden"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut chain = Vec::new();
    let started = Instant::now();
    for _ in 0..CHAIN_PAIRS {
        let inst = random_pair(&mut rng, 2, CHAIN_MAX_TOTAL, 4, 4);
        let mut values = Vec::new();
        for class in DistanceClass::ALL {
            let r = solve_class(&inst, class, Method::Dp, &cfg);
            rebuild.extend(reconstruction_issue(&inst, class, Method::Dp, &r));
            values.push(r.distance);
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            chain.push(format!("{} vs {}: edit/seg/botseg/bot = {values:?}", inst.t1, inst.t2));
        }
    }
    report.line(
        4,
        "edit <= seg <= botseg <= bot",
        &chain,
        format!("{CHAIN_PAIRS} pairs, total <= {CHAIN_MAX_TOTAL}, {:.1?}", started.elapsed()),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut axioms = Vec::new();
    for _ in 0..IDENTITY_TREES {
        let n = rng.gen_range(1..=20);
        let t = random_tree(&mut rng, n, 4, 3);
        let inst = Instance { t1: t.clone(), t2: t };
        for class in DistanceClass::ALL {
            let d = solve_class(&inst, class, Method::Dp, &cfg).distance;
            if d != 0 {
                axioms.push(format!("{class}({}, itself) = {d}", inst.t1));
            }
        }
    }
    for _ in 0..SYMMETRY_PAIRS {
        let inst = random_pair(&mut rng, 2, SYMMETRY_MAX_TOTAL, 4, 3);
        let flipped = Instance { t1: inst.t2.clone(), t2: inst.t1.clone() };
        for class in DistanceClass::ALL {
            let a = solve_class(&inst, class, Method::Dp, &cfg).distance;
            let b = solve_class(&flipped, class, Method::Dp, &cfg).distance;
            if a != b {
                axioms.push(format!("{class}: {a} vs {b} on {} and {}", inst.t1, inst.t2));
            }
        }
    }
    report.line(
        5,
        "identity and symmetry",
        &axioms,
        format!("{IDENTITY_TREES} trees, {SYMMETRY_PAIRS} pairs up to {SYMMETRY_MAX_TOTAL} nodes"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut slow = Vec::new();
    let mut worst = Duration::ZERO;
    let variant_cfg = SolverConfig::with_time_limit(VARIANT_LIMIT);
    for _ in 0..VARIANT_PAIRS {
        let inst = random_pair(&mut rng, VARIANT_TOTAL.0, VARIANT_TOTAL.1, VARIANT_MAX_DEGREE, 4);
        for class in [DistanceClass::Segmental, DistanceClass::BottomUpSegmental, DistanceClass::BottomUp] {
            let started = Instant::now();
            let r = solve_class(&inst, class, Method::Dp, &variant_cfg);
            let took = started.elapsed();
            worst = worst.max(took);
            if !r.exact || took > VARIANT_LIMIT {
                slow.push(format!(
                    "{class} on {}+{} nodes: exact={} in {took:.1?}",
                    inst.t1.len(),
                    inst.t2.len(),
                    r.exact
                ));
            }
        }
    }
    report.line(
        6,
        "seg/botseg/bot dp optimal within 10 s",
        &slow,
        format!(
            "{VARIANT_PAIRS} pairs, total {}-{}, degree <= {VARIANT_MAX_DEGREE}, worst {worst:.2?}",
            VARIANT_TOTAL.0, VARIANT_TOTAL.1
        ),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut slow = Vec::new();
    let mut worst = Duration::ZERO;
    let edit_cfg = SolverConfig::with_time_limit(EDIT_LIMIT);
    for _ in 0..EDIT_PAIRS {
        let inst = random_pair(&mut rng, EDIT_MAX_TOTAL / 2, EDIT_MAX_TOTAL, 4, 4);
        let started = Instant::now();
        let r = solve_class(&inst, DistanceClass::Edit, Method::Dp, &edit_cfg);
        let took = started.elapsed();
        worst = worst.max(took);
        if !r.exact || took > EDIT_LIMIT {
            slow.push(format!("edit on {}+{} nodes: exact={} in {took:.1?}", inst.t1.len(), inst.t2.len(), r.exact));
        }
    }
    report.line(
        7,
        "edit dp optimal within 60 s",
        &slow,
        format!("{EDIT_PAIRS} pairs, total <= {EDIT_MAX_TOTAL}, worst {worst:.2?}"),
    );

    // Naive Tai rows on two 2-node trees: one per node on each side plus one
    // per unordered pair of pairs, disjoint on both sides, whose ancestry
    // disagrees.
    let two = parse_bracket("a(b)").expect("valid");
    let model = build_naive_tai(&two, &two, &cost);
    let pairs: Vec<(usize, usize)> = two.nodes().flat_map(|x| two.nodes().map(move |y| (x, y))).collect();
    let mut violating = 0;
    for (i, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[i + 1..] {
            let disjoint = x != x2 && y != y2;
            if disjoint
                && (two.is_ancestor(x, x2) != two.is_ancestor(y, y2)
                    || two.is_ancestor(x2, x) != two.is_ancestor(y2, y))
            {
                violating += 1;
            }
        }
    }
    let want = two.len() + two.len() + violating;
    if model.num_constraints() != want {
        shape.push(format!("naive Tai on a(b) x a(b): {} rows, expected {want}", model.num_constraints()));
    }
    report.line(
        8,
        "model shapes",
        &shape,
        format!("{subproblems} subproblems with |L1|+|L2| rows; 2x2 Tai rows = 2+2+{violating}"),
    );

    report.line(9, "mappings valid and cost = distance", &rebuild, "instances of criteria 1 and 4".into());

    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
