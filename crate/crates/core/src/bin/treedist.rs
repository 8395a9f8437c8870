use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::warn;
use treedist::cost::validate_metric;
use treedist::harness::{self, BatchConfig, GenConfig};
use treedist::{distance, parse_bracket, render_bracket, CostFunction, DistanceClass, Method, SolverConfig, Tree};

#[derive(Parser)]
#[command(name = "treedist", version, about = "Distances between labeled unordered rooted trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Distance between two trees (bracket strings or @file).
    Dist(DistArgs),
    /// Sample pairs from a dataset and time every method on them.
    Batch(BatchArgs),
    /// Random trees, one bracket string per line.
    Gen(GenArgs),
    /// Convert a dataset to bracket format.
    Convert(ConvertArgs),
    /// Randomized consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct CostArgs {
    /// `unit` or a cost file.
    #[arg(long, default_value = "unit")]
    cost: String,
    /// Clamp negative pair weights instead of rejecting non-metric costs.
    #[arg(long)]
    allow_nonmetric: bool,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, default_value = "edit")]
    distance: DistanceClass,
    #[arg(long, default_value = "dp")]
    method: Method,
    #[command(flatten)]
    cost: CostArgs,
    /// Seconds; unlimited when absent.
    #[arg(long, env = "TREEDIST_TIME_LIMIT")]
    time_limit: Option<f64>,
    #[arg(long)]
    show_mapping: bool,
    t1: String,
    t2: String,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    input: PathBuf,
    /// Pairs sampled per bucket.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// `lo:hi:step` over |T1|+|T2|, half open.
    #[arg(long, default_value = "0:101:10")]
    bucket_by_total_nodes: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "dp,naive")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "edit,seg,botseg,bot")]
    distances: Vec<DistanceClass>,
    #[command(flatten)]
    cost: CostArgs,
    /// Seconds per solve; unlimited when absent.
    #[arg(long, env = "TREEDIST_TIME_LIMIT")]
    time_limit: Option<f64>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Leave the `ms` column empty so runs compare byte for byte.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// `lo:hi`, inclusive.
    #[arg(long, default_value = "10:10")]
    nodes: String,
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    #[arg(long, default_value_t = 4)]
    labels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, value_parser = ["cslogs"])]
    from: String,
    #[arg(long)]
    input: PathBuf,
    /// Abort on the first malformed record.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

const EXIT_INPUT: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

type CmdResult = Result<ExitCode, String>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Dist(a) => cmd_dist(a),
        Cmd::Batch(a) => cmd_batch(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Convert(a) => cmd_convert(a),
        Cmd::Selftest(a) => cmd_selftest(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_INPUT)
    })
}

fn time_limit(secs: Option<f64>) -> Result<Option<Duration>, String> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|e| format!("bad time limit {s}: {e}"))).transpose()
}

fn load_cost(args: &CostArgs, trees: &[&Tree]) -> Result<CostFunction, String> {
    let cost = if args.cost == "unit" {
        treedist::unit_cost()
    } else {
        let text = std::fs::read_to_string(&args.cost).map_err(|e| format!("{}: {e}", args.cost))?;
        CostFunction::parse(&text).map_err(|e| format!("{}: {e}", args.cost))?
    };
    let mut alphabet = cost.mentioned_labels();
    alphabet.extend(trees.iter().flat_map(|t| t.labels().iter().cloned()));
    let violations = validate_metric(&cost, &alphabet);
    if violations.is_empty() {
        return Ok(cost);
    }
    let listed: Vec<String> = violations.iter().map(ToString::to_string).collect();
    if !args.allow_nonmetric {
        return Err(format!("cost function is not a metric: {}", listed.join("; ")));
    }
    warn!("non-metric costs, clamping negative pair weights at 0: {}", listed.join("; "));
    Ok(cost.allow_nonmetric())
}

fn tree_arg(arg: &str) -> Result<Tree, String> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => arg.to_string(),
    };
    parse_bracket(text.trim()).map_err(|e| format!("{arg}: {e}"))
}

fn cmd_dist(a: DistArgs) -> CmdResult {
    let t1 = tree_arg(&a.t1)?;
    let t2 = tree_arg(&a.t2)?;
    let cost = load_cost(&a.cost, &[&t1, &t2])?;
    let cfg = SolverConfig { time_limit: time_limit(a.time_limit)?, ..SolverConfig::default() };
    let r = distance(&t1, &t2, &cost, a.distance, a.method, &cfg).map_err(|e| e.to_string())?;
    let shown = cost.render(r.distance);
    println!("{}{shown}", if r.exact { "" } else { "<=" });
    if a.show_mapping {
        for (x, y) in r.mapping.iter() {
            println!("({}, {})", t1.pre_order(x), t2.pre_order(y));
        }
    }
    Ok(if r.exact { ExitCode::SUCCESS } else { ExitCode::from(EXIT_TIMEOUT) })
}

fn cmd_batch(a: BatchArgs) -> CmdResult {
    let file = File::open(&a.input).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let trees = harness::load_dataset(BufReader::new(file)).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let cost = load_cost(&a.cost, &trees.iter().collect::<Vec<_>>())?;
    let cfg = BatchConfig {
        pairs: a.pairs,
        buckets: harness::parse_buckets(&a.bucket_by_total_nodes).map_err(|e| e.to_string())?,
        seed: a.seed,
        methods: a.methods,
        classes: a.distances,
        time_limit: time_limit(a.time_limit)?,
    };
    let records = harness::run_batch(&trees, &cost, &cfg);
    let out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    harness::write_csv(BufWriter::new(out), &records, &cost, a.omit_timing).map_err(|e| e.to_string())?;
    let summary = harness::summary_table(&records, &cfg);
    // Keep stdout pure CSV when the rows go there.
    if a.output.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let bad = || format!("invalid node range '{}' (expected lo:hi)", a.nodes);
    let (lo, hi) = a.nodes.split_once(':').ok_or_else(bad)?;
    let nodes = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    let cfg = GenConfig { count: a.count, nodes, max_degree: a.max_degree, labels: a.labels, seed: a.seed };
    let trees = harness::generate(&cfg).map_err(|e| e.to_string())?;
    let mut out = BufWriter::new(io::stdout().lock());
    for t in &trees {
        writeln!(out, "{}", render_bracket(t)).map_err(|e| e.to_string())?;
    }
    out.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_convert(a: ConvertArgs) -> CmdResult {
    let file = File::open(&a.input).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let (trees, bad) = harness::convert_cslogs(BufReader::new(file), a.strict).map_err(|e| e.to_string())?;
    let mut out = BufWriter::new(io::stdout().lock());
    for t in &trees {
        writeln!(out, "{}", render_bracket(t)).map_err(|e| e.to_string())?;
    }
    out.flush().map_err(|e| e.to_string())?;
    for (_, e) in &bad {
        warn!("{e}");
    }
    if !bad.is_empty() {
        eprintln!("warning: skipped {} malformed record(s)", bad.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(a: SelftestArgs) -> CmdResult {
    let report = harness::selftest(a.seed, a.trials, a.inject_fault);
    for f in &report.failures {
        println!("FAIL {f}");
    }
    println!("{} checks, {} failed", report.checks, report.failures.len());
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
