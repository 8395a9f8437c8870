//! Random trees, datasets, batch runs and the self-test.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::time::Duration;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cost::{mapping_cost, validate_metric, CostFunction};
use crate::dp::{distance, Method};
use crate::mapping::{is_valid, DistanceClass};
use crate::matching::{
    exhaustive_bijection, exhaustive_matching, max_weight_bijection, max_weight_matching, WeightMatrix,
};
use crate::solver::SolverConfig;
use crate::tree::{parse_bracket, parse_cslogs_line, Label, NodeId, Tree, TreeError};

pub const CSV_HEADER: [&str; 9] = ["instance", "n1", "n2", "class", "method", "distance", "status", "ms", "nodes"];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid generator settings: {0}")]
    Generator(String),
    #[error("invalid bucket spec '{0}' (expected lo:hi:step)")]
    Bucket(String),
    #[error("line {line}: {source}")]
    Dataset { line: usize, source: TreeError },
    #[error(transparent)]
    Record(TreeError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

// ---------------------------------------------------------------------------
// Generator

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub count: usize,
    pub nodes: (usize, usize),
    pub max_degree: usize,
    pub labels: usize,
    pub seed: u64,
}

/// Label `i` of an alphabet of size `k`: `a`..`z`, or `l0`, `l1`, ... for
/// larger alphabets.
pub fn alphabet_label(i: usize, k: usize) -> Label {
    let text = if k <= 26 { ((b'a' + i as u8) as char).to_string() } else { format!("l{i}") };
    Label::new(&text).expect("generated labels are non-empty")
}

/// A tree on `n` nodes: each new node picks its parent uniformly among the
/// earlier nodes that still have room for a child.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, max_degree: usize, labels: usize) -> Tree {
    assert!(n >= 1 && labels >= 1 && (n == 1 || max_degree >= 1));
    let mut parents = vec![None];
    let mut open: Vec<NodeId> = vec![0];
    let mut degree = vec![0usize; n];
    for v in 1..n {
        let k = rng.gen_range(0..open.len());
        let p = open[k];
        parents.push(Some(p));
        degree[p] += 1;
        if degree[p] == max_degree {
            open.swap_remove(k);
        }
        open.push(v);
    }
    let names = (0..n).map(|_| alphabet_label(rng.gen_range(0..labels), labels)).collect();
    Tree::from_parents(names, parents).expect("attachment always yields a tree")
}

pub fn generate(cfg: &GenConfig) -> Result<Vec<Tree>, HarnessError> {
    let (lo, hi) = cfg.nodes;
    if lo == 0 || lo > hi {
        return Err(HarnessError::Generator(format!("node range {lo}:{hi} is empty or contains 0")));
    }
    if cfg.labels == 0 {
        return Err(HarnessError::Generator("alphabet size must be at least 1".into()));
    }
    if cfg.max_degree == 0 && lo > 1 {
        return Err(HarnessError::Generator("max degree 0 only allows single nodes".into()));
    }
    let hi = if cfg.max_degree == 0 { 1 } else { hi };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((0..cfg.count)
        .map(|_| {
            let n = rng.gen_range(lo..=hi);
            random_tree(&mut rng, n, cfg.max_degree, cfg.labels)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Datasets

fn looks_like_cslogs(line: &str) -> bool {
    line.split_whitespace().all(|t| t.parse::<i64>().is_ok())
}

/// Reads a dataset: one bracket tree per line, or CSLOGS records when the
/// first non-empty line holds only integers. Blank lines are ignored.
pub fn load_dataset<R: BufRead>(reader: R) -> Result<Vec<Tree>, HarnessError> {
    let mut trees = Vec::new();
    let mut cslogs = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let is_cslogs = *cslogs.get_or_insert_with(|| looks_like_cslogs(&line));
        let tree = if is_cslogs {
            parse_cslogs_line(&line, i + 1).map_err(HarnessError::Record)?.expect("line is not blank")
        } else {
            parse_bracket(&line).map_err(|source| HarnessError::Dataset { line: i + 1, source })?
        };
        trees.push(tree);
    }
    Ok(trees)
}

/// Parsed trees plus `(line, error)` for each skipped record.
pub type Converted = (Vec<Tree>, Vec<(usize, TreeError)>);

/// Converts CSLOGS records to bracket trees. Malformed lines abort with
/// `strict`, else they are returned alongside the good trees.
pub fn convert_cslogs<R: BufRead>(reader: R, strict: bool) -> Result<Converted, HarnessError> {
    let mut trees = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        match parse_cslogs_line(&line?, i + 1) {
            Ok(Some(t)) => trees.push(t),
            Ok(None) => {}
            Err(e) if strict => return Err(HarnessError::Record(e)),
            Err(e) => bad.push((i + 1, e)),
        }
    }
    Ok((trees, bad))
}

// ---------------------------------------------------------------------------
// Batch runs

/// Total-node range `lo..hi` (half open).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bucket {
    pub lo: usize,
    pub hi: usize,
}

impl std::fmt::Display for Bucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi - 1)
    }
}

/// Parses `lo:hi:step` into consecutive buckets covering `lo..hi`.
pub fn parse_buckets(spec: &str) -> Result<Vec<Bucket>, HarnessError> {
    let bad = || HarnessError::Bucket(spec.to_string());
    let parts: Vec<usize> = spec.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if step == 0 || lo >= hi {
        return Err(bad());
    }
    Ok((lo..hi).step_by(step).map(|b| Bucket { lo: b, hi: (b + step).min(hi) }).collect())
}

/// Up to `count` distinct unordered pairs `(i, j)`, `i < j` in dataset order,
/// with total size in `bucket`, sampled uniformly without replacement.
pub fn sample_pairs(sizes: &[usize], bucket: Bucket, count: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| (sizes[i], i));
    let sorted: Vec<usize> = order.iter().map(|&i| sizes[i]).collect();
    // For each position p, partners are positions q > p with size in range.
    let mut ranges = Vec::with_capacity(order.len());
    let mut prefix = vec![0usize];
    for (p, &s) in sorted.iter().enumerate() {
        let want_lo = bucket.lo.saturating_sub(s);
        let want_hi = bucket.hi.saturating_sub(s);
        let a = (p + 1).max(sorted.partition_point(|&v| v < want_lo));
        let b = (p + 1).max(sorted.partition_point(|&v| v < want_hi));
        ranges.push(a);
        prefix.push(prefix[p] + (b - a));
    }
    let total = *prefix.last().expect("prefix has a leading zero");
    let mut picks: Vec<usize> = sample(rng, total, count.min(total)).into_vec();
    picks.sort_unstable();
    picks
        .into_iter()
        .map(|k| {
            let p = prefix.partition_point(|&c| c <= k) - 1;
            let q = ranges[p] + (k - prefix[p]);
            let (i, j) = (order[p], order[q]);
            (i.min(j), i.max(j))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub pairs: usize,
    pub buckets: Vec<Bucket>,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub classes: Vec<DistanceClass>,
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Timeout,
    /// The method refused the instance (e.g. too large for the oracle).
    Skipped,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Timeout => "timeout",
            RunStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub instance: String,
    pub bucket: usize,
    pub n1: usize,
    pub n2: usize,
    pub class: DistanceClass,
    pub method: Method,
    /// Scaled distance; an upper bound on timeout.
    pub distance: Option<i64>,
    pub status: RunStatus,
    pub ms: f64,
    pub nodes: u64,
}

impl RunRecord {
    pub fn render_distance(&self, cost: &CostFunction) -> String {
        match (self.distance, self.status) {
            (Some(d), RunStatus::Timeout) => format!("<={}", cost.render(d)),
            (Some(d), _) => cost.render(d),
            (None, _) => String::new(),
        }
    }
}

pub fn run_one(
    t1: &Tree,
    t2: &Tree,
    cost: &CostFunction,
    class: DistanceClass,
    method: Method,
    time_limit: Option<Duration>,
) -> (Option<i64>, RunStatus, f64, u64) {
    let cfg = SolverConfig { time_limit, ..Default::default() };
    let start = std::time::Instant::now();
    match distance(t1, t2, cost, class, method, &cfg) {
        Ok(r) => {
            let status = if r.exact { RunStatus::Ok } else { RunStatus::Timeout };
            (Some(r.distance), status, start.elapsed().as_secs_f64() * 1e3, r.stats.solver_nodes)
        }
        Err(e) => {
            log::debug!("{class}/{method} on {}+{} nodes: {e}", t1.len(), t2.len());
            (None, RunStatus::Skipped, start.elapsed().as_secs_f64() * 1e3, 0)
        }
    }
}

/// Samples pairs per bucket and runs every class and method on each.
/// Records come back in bucket, pair, class, method order.
pub fn run_batch(trees: &[Tree], cost: &CostFunction, cfg: &BatchConfig) -> Vec<RunRecord> {
    let sizes: Vec<usize> = trees.iter().map(Tree::len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut jobs = Vec::new();
    for (b, &bucket) in cfg.buckets.iter().enumerate() {
        let pairs = sample_pairs(&sizes, bucket, cfg.pairs, &mut rng);
        if pairs.is_empty() {
            log::warn!("bucket {bucket} has no instances");
        }
        for (i, j) in pairs {
            for &class in &cfg.classes {
                for &method in &cfg.methods {
                    jobs.push((b, i, j, class, method));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(bucket, i, j, class, method)| {
            let (distance, status, ms, nodes) = run_one(&trees[i], &trees[j], cost, class, method, cfg.time_limit);
            RunRecord {
                instance: format!("{i}-{j}"),
                bucket,
                n1: trees[i].len(),
                n2: trees[j].len(),
                class,
                method,
                distance,
                status,
                ms,
                nodes,
            }
        })
        .collect()
}

/// Writes the records as CSV. With `omit_timing` the `ms` column is left
/// empty so that output depends only on the inputs.
pub fn write_csv<W: Write>(
    out: W,
    records: &[RunRecord],
    cost: &CostFunction,
    omit_timing: bool,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let ms = if omit_timing { String::new() } else { format!("{:.3}", r.ms) };
        w.write_record([
            r.instance.clone(),
            r.n1.to_string(),
            r.n2.to_string(),
            r.class.name().to_string(),
            r.method.name().to_string(),
            r.render_distance(cost),
            r.status.name().to_string(),
            ms,
            r.nodes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per bucket, class and method: instance count, average time over finished
/// runs, and timeouts.
pub fn summary_table(records: &[RunRecord], cfg: &BatchConfig) -> String {
    let mut out = String::new();
    writeln!(out, "{:<12} {:<7} {:<7} {:>5} {:>10} {:>5}", "range", "class", "method", "count", "avg_ms", "t.o.")
        .unwrap();
    for (b, bucket) in cfg.buckets.iter().enumerate() {
        for &class in &cfg.classes {
            for &method in &cfg.methods {
                let rows: Vec<&RunRecord> =
                    records.iter().filter(|r| r.bucket == b && r.class == class && r.method == method).collect();
                let done: Vec<f64> = rows.iter().filter(|r| r.status == RunStatus::Ok).map(|r| r.ms).collect();
                let timeouts = rows.iter().filter(|r| r.status == RunStatus::Timeout).count();
                let avg = if done.is_empty() {
                    "-".to_string()
                } else {
                    format!("{:.2}", done.iter().sum::<f64>() / done.len() as f64)
                };
                writeln!(
                    out,
                    "{:<12} {:<7} {:<7} {:>5} {:>10} {:>5}",
                    bucket.to_string(),
                    class.name(),
                    method.name(),
                    rows.len(),
                    avg,
                    timeouts
                )
                .unwrap();
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Self-test

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SelftestReport {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Randomized consistency checks: dp/naive/oracle agreement with sound
/// mappings, the class chain, matching against enumeration, and the metric
/// axioms of the unit cost. `fault` perturbs the dp results so that the
/// checks must fail.
pub fn selftest(seed: u64, trials: usize, fault: bool) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SelftestReport::default();
    let cost = crate::cost::unit_cost();
    let cfg = SolverConfig::default();
    for trial in 0..trials {
        let n1 = rng.gen_range(1..=6);
        let n2 = rng.gen_range(1..=6);
        let t1 = random_tree(&mut rng, n1, 3, 3);
        let t2 = random_tree(&mut rng, n2, 3, 3);
        let mut chain = Vec::new();
        for class in DistanceClass::ALL {
            let mut values = Vec::new();
            for method in Method::ALL {
                let r = distance(&t1, &t2, &cost, class, method, &cfg).expect("small instances always solve");
                let d = if fault && method == Method::Dp { r.distance + 1 } else { r.distance };
                report.check(is_valid(class, &t1, &t2, &r.mapping), || {
                    format!("trial {trial}: {class}/{method} mapping breaks the class on {t1} vs {t2}")
                });
                report.check(mapping_cost(&cost, &t1, &t2, &r.mapping).ok() == Some(d), || {
                    format!("trial {trial}: {class}/{method} mapping cost differs from {d} on {t1} vs {t2}")
                });
                values.push(d);
            }
            report.check(values.windows(2).all(|w| w[0] == w[1]), || {
                format!("trial {trial}: {class} methods disagree {values:?} on {t1} vs {t2}")
            });
            chain.push(values[0]);
        }
        report.check(chain.windows(2).all(|w| w[0] <= w[1]), || {
            format!("trial {trial}: class chain broken {chain:?} on {t1} vs {t2}")
        });

        let rows = rng.gen_range(0..=4);
        let cols = rng.gen_range(0..=4);
        let mut mat = WeightMatrix::new(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if rng.gen_bool(0.1) {
                    mat.forbid(i, j);
                } else {
                    mat.set(i, j, rng.gen_range(0..=20));
                }
            }
        }
        let m = max_weight_matching(&mat).value;
        report.check(m == exhaustive_matching(&mat), || format!("trial {trial}: matching {m} on {mat:?}"));
        let b = max_weight_bijection(&mat).map(|m| m.value);
        report.check(b == exhaustive_bijection(&mat), || format!("trial {trial}: bijection {b:?} on {mat:?}"));

        let labels: Vec<Label> = t1.labels().iter().chain(t2.labels()).cloned().collect();
        let violations = validate_metric(&cost, &labels);
        report.check(violations.is_empty(), || format!("trial {trial}: unit cost violates {violations:?}"));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_respects_limits() {
        let cfg = GenConfig { count: 50, nodes: (1, 30), max_degree: 3, labels: 4, seed: 1 };
        let trees = generate(&cfg).unwrap();
        assert_eq!(trees.len(), 50);
        for t in &trees {
            assert!((1..=30).contains(&t.len()));
            assert!(t.max_degree() <= 3);
            assert!(t.labels().iter().all(|l| ["a", "b", "c", "d"].contains(&l.as_str())));
        }
        let again = generate(&cfg).unwrap();
        assert!(trees.iter().zip(&again).all(|(a, b)| a.to_string() == b.to_string()));
    }

    #[test]
    fn generator_edge_cases() {
        let one = generate(&GenConfig { count: 1, nodes: (1, 1), max_degree: 3, labels: 2, seed: 0 }).unwrap();
        assert_eq!(one[0].len(), 1);
        let chain = generate(&GenConfig { count: 3, nodes: (5, 5), max_degree: 1, labels: 2, seed: 0 }).unwrap();
        assert!(chain.iter().all(|t| t.height(0) == 4));
        assert!(generate(&GenConfig { count: 1, nodes: (3, 3), max_degree: 0, labels: 2, seed: 0 }).is_err());
        assert!(generate(&GenConfig { count: 1, nodes: (0, 3), max_degree: 2, labels: 2, seed: 0 }).is_err());
        assert_eq!(alphabet_label(3, 40).as_str(), "l3");
    }

    #[test]
    fn buckets_parse() {
        let b = parse_buckets("10:30:10").unwrap();
        assert_eq!(b, vec![Bucket { lo: 10, hi: 20 }, Bucket { lo: 20, hi: 30 }]);
        assert_eq!(b[0].to_string(), "10-19");
        assert!(parse_buckets("10:5:1").is_err());
        assert!(parse_buckets("1:2").is_err());
    }

    #[test]
    fn pair_sampling_matches_enumeration() {
        let sizes = [3, 7, 5, 5, 1, 9, 4];
        let bucket = Bucket { lo: 8, hi: 11 };
        let mut all = Vec::new();
        for i in 0..sizes.len() {
            for j in i + 1..sizes.len() {
                if (8..11).contains(&(sizes[i] + sizes[j])) {
                    all.push((i, j));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut got = sample_pairs(&sizes, bucket, 100, &mut rng);
        got.sort_unstable();
        assert_eq!(got, all);
        let few = sample_pairs(&sizes, bucket, 2, &mut rng);
        assert_eq!(few.len(), 2);
        assert!(few.iter().all(|p| all.contains(p)));
    }

    #[test]
    fn dataset_formats() {
        let trees = load_dataset("a(b,c)\n\nb\n".as_bytes()).unwrap();
        assert_eq!(trees.len(), 2);
        let trees = load_dataset("7 1 2 -1 3 -1\n4\n".as_bytes()).unwrap();
        assert_eq!(trees[0].to_string(), "1(2,3)");
        assert!(matches!(load_dataset("a(\n".as_bytes()), Err(HarnessError::Dataset { line: 1, .. })));
    }

    #[test]
    fn convert_skips_or_aborts() {
        let data = "1 2 -1 3 -1\n1 -1\n\n5\n";
        let (trees, bad) = convert_cslogs(data.as_bytes(), false).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].0, 2);
        assert!(convert_cslogs(data.as_bytes(), true).is_err());
    }

    #[test]
    fn batch_is_deterministic() {
        let trees = generate(&GenConfig { count: 12, nodes: (1, 5), max_degree: 3, labels: 3, seed: 4 }).unwrap();
        let cfg = BatchConfig {
            pairs: 3,
            buckets: parse_buckets("2:11:3").unwrap(),
            seed: 7,
            methods: vec![Method::Dp, Method::Naive],
            classes: vec![DistanceClass::Edit],
            time_limit: None,
        };
        let csv = |recs: &[RunRecord]| {
            let mut buf = Vec::new();
            write_csv(&mut buf, recs, &crate::cost::unit_cost(), true).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = run_batch(&trees, &crate::cost::unit_cost(), &cfg);
        let b = run_batch(&trees, &crate::cost::unit_cost(), &cfg);
        assert_eq!(csv(&a), csv(&b));
        assert!(csv(&a).starts_with("instance,n1,n2,class,method,distance,status,ms,nodes\n"));
        for pair in a.chunks(2) {
            assert_eq!(pair[0].distance, pair[1].distance);
        }
        let table = summary_table(&a, &cfg);
        assert_eq!(table.lines().count(), 1 + cfg.buckets.len() * 2);
    }

    #[test]
    fn selftest_passes_and_detects_faults() {
        let ok = selftest(1, 5, false);
        assert!(ok.passed(), "{:?}", ok.failures);
        assert!(ok.checks > 0);
        assert!(!selftest(1, 5, true).passed());
        assert_eq!(selftest(1, 0, false).checks, 0);
    }
}
