//! Filter files: checksummed binary serialization where a block
//! filter's whole layout travels as just (m, n) in the header.
//!
//! ```bash
//! cargo run --example filter_files
//! ```

use flexbloom::format::{self, AnyFilter};
use flexbloom::hash::HashSeed;
use flexbloom::oracle;
use flexbloom::vsbbf::VsbBloomFilter;
use flexbloom::Filter;

fn main() {
    let (m, n) = (2_741u64, 300u64);
    let mut filter = VsbBloomFilter::new(m, n, HashSeed(21)).unwrap();
    let elements = oracle::random_elements(22, n as usize);
    for e in &elements {
        filter.insert(e);
    }

    let bytes = format::to_bytes(&filter.clone().into());
    println!(
        "{m}-bit block filter serializes to {} bytes ({} payload + 36 header/crc)",
        bytes.len(),
        m.div_ceil(8)
    );
    println!("no block table is stored: the layout is a function of (m, n)");

    let reloaded = match format::from_bytes(&bytes).unwrap() {
        AnyFilter::Block(b) => b,
        _ => unreachable!(),
    };
    println!(
        "reloaded layout identical: {}",
        reloaded.layout() == filter.layout()
    );
    let probes = oracle::random_elements(23, 10_000);
    println!(
        "10^4 probe verdicts identical: {}",
        probes.iter().all(|p| filter.query(p) == reloaded.query(p))
    );

    // Subfilters are the exception: their hash counts are inherited, so
    // kind-3 files carry an explicit block table.
    let sub = filter.extract_subfilter(&[0, 1]).unwrap();
    let sub_bytes = format::to_bytes(&sub.clone().into());
    println!(
        "\nsubfilter of blocks [0, 1] serializes to {} bytes (explicit block table)",
        sub_bytes.len()
    );
    println!(
        "subfilter keeps every inserted element: {}",
        elements
            .iter()
            .all(|e| format::from_bytes(&sub_bytes).unwrap().query(e))
    );

    // Corruption is caught by the trailing CRC-32.
    let mut tampered = bytes.clone();
    tampered[40] ^= 0x10;
    println!(
        "\ntampered byte detected: {:?}",
        format::from_bytes(&tampered).err().unwrap()
    );
}
