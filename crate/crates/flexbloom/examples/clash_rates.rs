//! Hash clashes: two hash functions of one element landing on the same
//! bit waste part of its footprint. Splitting a filter into blocks
//! confines each hash function to its own block and lowers the clash
//! probability, spreading false positives more evenly.
//!
//! ```bash
//! cargo run --example clash_rates
//! ```

use flexbloom::analysis;
use flexbloom::hash::HashSeed;
use flexbloom::oracle;

fn main() {
    let trials = 1_000_000;

    let mono = oracle::estimate_clash_rate(&[(24, 4.0)], trials, HashSeed(1));
    let blocked = oracle::estimate_clash_rate(&[(16, 2.0), (8, 2.0)], trials, HashSeed(2));
    println!("24 bits, 4 hash functions in one piece:");
    println!(
        "  clash rate {:.4} (truncated sum predicts {:.4})",
        mono.estimate,
        analysis::clash_prob_standard(24, 4).unwrap()
    );
    println!("same 24 bits as blocks [16, 8] with 2 hash functions each:");
    println!(
        "  clash rate {:.4} (truncated sum predicts {:.4})",
        blocked.estimate,
        analysis::clash_prob_block(&[(16, 2.0), (8, 2.0)]).unwrap()
    );

    println!("\nlarger example, 3072 bits and 6 total hash functions:");
    let mono = oracle::estimate_clash_rate(&[(3072, 6.0)], trials, HashSeed(3));
    let blocked = oracle::estimate_clash_rate(&[(2048, 4.0), (1024, 2.0)], trials, HashSeed(4));
    println!(
        "  monolithic {:.5} vs blocked {:.5} (models {:.5} vs {:.5})",
        mono.estimate,
        blocked.estimate,
        analysis::clash_prob_standard(3072, 6).unwrap(),
        analysis::clash_prob_block(&[(2048, 4.0), (1024, 2.0)]).unwrap()
    );
}
