//! Sweep the hash count of a fixed-size standard filter across several
//! set sizes. The measured false positive rate bottoms out next to the
//! analytic optimum k* = (m / n) ln 2.
//!
//! ```bash
//! cargo run --release --example optimal_k_sweep
//! ```

use flexbloom::analysis;
use flexbloom::experiment::{self, FilterKind, SweepGrid};

fn main() {
    let m = 8192;
    let grid = SweepGrid {
        kind: FilterKind::Standard,
        m,
        n_values: vec![500, 1000, 2000],
        k_values: experiment::parse_k_values("1:13:1").unwrap(),
        negatives: 10_000,
        seed: 17,
        repetitions: 1,
    };
    let rows = experiment::run_sweep(&grid).unwrap();
    experiment::write_csv(std::io::stdout().lock(), &rows).unwrap();

    for &n in &grid.n_values {
        let best = rows
            .iter()
            .filter(|r| r.n == n)
            .min_by(|a, b| a.fpr_estimate.total_cmp(&b.fpr_estimate))
            .unwrap();
        eprintln!(
            "n = {n}: measured minimum at k = {}, analytic optimum k* = {:.2}",
            best.k_effective,
            analysis::optimal_k(m, n).unwrap()
        );
    }
}
