//! The integer-k baseline: build a standard Bloom filter, measure its
//! false positive rate, and compare against the closed-form model.
//!
//! ```bash
//! cargo run --example standard_filter
//! ```

use flexbloom::analysis::{self, FilterParams};
use flexbloom::hash::HashSeed;
use flexbloom::oracle;
use flexbloom::standard::{IndexMode, StandardBloomFilter};
use flexbloom::Filter;

fn main() {
    let (m, n, k) = (8192, 1000, 6);
    let mut filter = StandardBloomFilter::new(m, k, HashSeed(42), IndexMode::Mask).unwrap();

    let elements = oracle::random_elements(1, n as usize);
    for e in &elements {
        filter.insert(e);
    }

    println!("standard Bloom filter: m = {m} bits, k = {k}, n = {n} elements");
    println!(
        "every inserted element queries present: {}",
        elements.iter().all(|e| filter.query(e))
    );

    let params = FilterParams::new(m, n, k as f64);
    println!(
        "fraction of zeros: measured {:.4}, expected {:.4}",
        filter.fraction_of_zeros(),
        analysis::expected_foz(params).unwrap()
    );

    let report = oracle::estimate_fpr(&filter, &elements, 10_000, HashSeed(2));
    println!(
        "false positive rate: measured {:.4} ± {:.4}, formula predicts {:.4}",
        report.estimate,
        report.std_error,
        analysis::fpr_exact(params).unwrap()
    );
    println!(
        "optimal hash count for this (m, n) would be k* = {:.3}",
        analysis::optimal_k(m, n).unwrap()
    );
}
