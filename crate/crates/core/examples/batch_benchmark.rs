// A small timing table: generate trees, bucket pairs by total size, run
// every method, write CSV and the per-bucket summary.

use std::error::Error;
use std::time::Duration;

use treedist::harness::{generate, parse_buckets, run_batch, summary_table, write_csv, BatchConfig, GenConfig};
use treedist::{unit_cost, DistanceClass, Method};

pub fn run() -> Result<(), Box<dyn Error>> {
    let trees = generate(&GenConfig { count: 30, nodes: (3, 14), max_degree: 3, labels: 4, seed: 5 })?;
    let cfg = BatchConfig {
        pairs: 4,
        buckets: parse_buckets("4:25:7")?,
        seed: 7,
        methods: Method::ALL.to_vec(),
        classes: DistanceClass::ALL.to_vec(),
        time_limit: Some(Duration::from_secs(10)),
    };
    let cost = unit_cost();
    let records = run_batch(&trees, &cost, &cfg);

    let path = std::env::temp_dir().join("treedist_batch_example.csv");
    write_csv(std::fs::File::create(&path)?, &records, &cost, false)?;
    println!("{} rows written to {}", records.len(), path.display());
    print!("{}", summary_table(&records, &cfg));

    let mut csv = Vec::new();
    write_csv(&mut csv, &records[..records.len().min(6)], &cost, true)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
