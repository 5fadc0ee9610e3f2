//! Block subsets as lossy compression: any selection of blocks is a
//! smaller filter over the same set with a higher false positive rate
//! and still no false negatives.
//!
//! ```bash
//! cargo run --example block_subsets
//! ```

use flexbloom::hash::HashSeed;
use flexbloom::oracle;
use flexbloom::vsbbf::VsbBloomFilter;
use flexbloom::Filter;

fn main() {
    let (m, n) = (25_000u64, 4_000u64);
    let mut filter = VsbBloomFilter::new(m, n, HashSeed(11)).unwrap();
    let elements = oracle::random_elements(12, n as usize);
    for e in &elements {
        filter.insert(e);
    }
    let sizes: Vec<u64> = filter
        .layout()
        .blocks()
        .iter()
        .map(|b| b.size_bits)
        .collect();
    println!("filter of {m} bits in blocks {sizes:?}\n");
    println!("kept blocks\tratio\tfpr\tfalse negatives");

    for keep in (1..=filter.layout().block_count()).rev() {
        let subset: Vec<usize> = (0..keep).collect();
        let sub = filter.extract_subfilter(&subset).unwrap();
        let misses = elements.iter().filter(|e| !sub.query(e)).count();
        let report = oracle::estimate_fpr(&sub, &elements, 10_000, HashSeed(13));
        println!(
            "first {keep}\t{:.3}\t{:.4}\t{misses}",
            filter.subset_ratio(&subset).unwrap(),
            report.estimate
        );
        assert_eq!(misses, 0);
    }
    println!("\nsmaller subsets trade accuracy for size; membership never degrades to a miss");
}
