//! Index-reduction cost at a non-power-of-two length: a generic-modulo
//! standard filter against a block filter that only ever masks.
//! Report only; on modern hardware the difference is small either way.
//!
//! ```bash
//! cargo run --release --example modulo_timing
//! ```

use flexbloom::experiment;

fn main() {
    let report = experiment::run_modulo_bench(3 << 18, 50_000, 5, 31).unwrap();
    print!("{}", report.to_csv());
    println!(
        "\nmedians, ns/op: insert {:.0} (modulo) vs {:.0} (blocks); query {:.0} vs {:.0}",
        report.median("standard-modulo", "insert").unwrap(),
        report.median("vsbbf", "insert").unwrap(),
        report.median("standard-modulo", "query").unwrap(),
        report.median("vsbbf", "query").unwrap(),
    );
    println!(
        "ranking {} across {} repetitions",
        if report.rank_stable {
            "stable"
        } else {
            "NOT stable"
        },
        report.repetitions
    );
}
