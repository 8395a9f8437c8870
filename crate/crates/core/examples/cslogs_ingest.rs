// Reads CSLOGS records, skips malformed ones, and samples size buckets.

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treedist::harness::{convert_cslogs, parse_buckets, sample_pairs};
use treedist::render_bracket;

const RECORDS: &str = "\
7 1 2 -1 3 -1
8 1 2 4 -1 -1 3 -1
bad 1 2
9 5 -1
10 1 2 -1 3 4 -1 5 -1 -1
11 1 -1 2
12 2 3 -1 3 -1 3 -1
";

pub fn run() -> Result<(), Box<dyn Error>> {
    let (trees, bad) = convert_cslogs(RECORDS.as_bytes(), false)?;
    for t in &trees {
        println!("{:>2} nodes  {}", t.len(), render_bracket(t));
    }
    for (_, e) in &bad {
        println!("skipped {e}");
    }
    assert!(convert_cslogs(RECORDS.as_bytes(), true).is_err());

    let sizes: Vec<usize> = trees.iter().map(|t| t.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for bucket in parse_buckets("2:12:4")? {
        let pairs = sample_pairs(&sizes, bucket, 3, &mut rng);
        println!("bucket {bucket}: {pairs:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
