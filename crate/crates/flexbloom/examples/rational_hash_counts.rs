//! A Bloom filter with k = 2.3 hash functions: two applied always, a
//! third applied to 30% of elements, chosen deterministically per
//! element so membership answers never flip.
//!
//! ```bash
//! cargo run --example rational_hash_counts
//! ```

use flexbloom::hash::HashSeed;
use flexbloom::oracle;
use flexbloom::rational::RationalBloomFilter;
use flexbloom::Filter;

fn main() {
    let k = 2.3;
    let mut filter = RationalBloomFilter::new(1 << 16, k, HashSeed(7)).unwrap();
    println!(
        "rational filter: m = {} bits, k = {k} ({} unconditional + 1 at p = {:.1})",
        filter.m(),
        k as u32,
        filter.activation_probability()
    );

    let elements = oracle::random_elements(3, 20_000);
    for e in &elements {
        filter.insert(e);
    }
    println!(
        "no false negatives over {} inserts: {}",
        elements.len(),
        elements.iter().all(|e| filter.query(e))
    );

    let mean: f64 = elements
        .iter()
        .map(|e| filter.effective_hash_count(e) as f64)
        .sum::<f64>()
        / elements.len() as f64;
    println!("mean active hash functions per element: {mean:.4} (target {k})");

    // The activation decision is part of the element's identity: it is
    // the same at insert and query time, and stays fixed forever.
    let probe = &elements[0];
    let before = filter.effective_hash_count(probe);
    for e in oracle::random_elements(4, 5_000) {
        filter.insert(&e);
    }
    assert_eq!(before, filter.effective_hash_count(probe));
    println!("activation decisions are stable under unrelated inserts");

    let foz = filter.fraction_of_zeros();
    let report = oracle::estimate_fpr(&filter, &elements, 10_000, HashSeed(8));
    let conditional = oracle::conditional_rational_fpr(k, foz);
    println!(
        "false positive rate: measured {:.4}, conditional model (1-foz)^2 (1 - 0.3 foz) = {:.4}",
        report.estimate, conditional
    );
}
