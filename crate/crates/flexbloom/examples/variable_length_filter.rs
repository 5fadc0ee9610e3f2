//! A Bloom filter of arbitrary (non-power-of-two) length: the length is
//! decomposed into power-of-two blocks, each running its own rational-k
//! sub-filter with mask-only index arithmetic.
//!
//! ```bash
//! cargo run --example variable_length_filter
//! ```

use flexbloom::analysis;
use flexbloom::hash::HashSeed;
use flexbloom::oracle;
use flexbloom::vsbbf::{decompose, VsbBloomFilter};
use flexbloom::Filter;

fn main() {
    println!("decompose(11) = {:?}", decompose(11).unwrap());
    println!("decompose(25) = {:?}", decompose(25).unwrap());

    let (m, n) = (12_345u64, 2_000u64);
    let mut filter = VsbBloomFilter::new(m, n, HashSeed(5)).unwrap();
    println!("\nfilter of {m} bits for {n} planned elements:");
    println!("block\tsize\toffset\tk_j");
    for (i, b) in filter.layout().blocks().iter().enumerate() {
        println!("{}\t{}\t{}\t{:.4}", i + 1, b.size_bits, b.offset_bits, b.k);
    }
    println!(
        "sum of k_j = {:.4} equals the whole-filter optimum k* = {:.4}",
        filter.layout().blocks().iter().map(|b| b.k).sum::<f64>(),
        analysis::optimal_k(m, n).unwrap()
    );

    let elements = oracle::random_elements(6, n as usize);
    for e in &elements {
        filter.insert(e);
    }
    println!(
        "\nno false negatives: {}",
        elements.iter().all(|e| filter.query(e))
    );
    println!(
        "fraction of zeros: {:.4} (optimal fill is 0.5)",
        filter.fraction_of_zeros()
    );

    let report = oracle::estimate_fpr(&filter, &elements, 10_000, HashSeed(9));
    println!(
        "false positive rate: measured {:.4}, per-block chain rule {:.4}, closed-form product {:.4}",
        report.estimate,
        oracle::conditional_block_fpr(&filter),
        analysis::fpr_block_product(&filter.layout().sizes_and_k(), n).unwrap()
    );
}
