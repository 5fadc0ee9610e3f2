//! Ground truth and seeded Monte-Carlo estimators used to verify the
//! analytic models: exact set membership, false-positive and clash-rate
//! estimation, and the standard errors for tolerance bands.
//!
//! Everything here is deterministic given its seed.

use std::collections::HashSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::analysis::{self, FilterParams};
use crate::hash::HashSeed;
use crate::vsbbf::VsbBloomFilter;
use crate::{Filter, Result};

/// Byte length of generated test elements.
const ELEMENT_LEN: usize = 16;

/// Outcome of a Bernoulli estimation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialReport {
    pub trials: u64,
    pub hits: u64,
    /// `hits / trials`.
    pub estimate: f64,
    /// `sqrt(estimate * (1 - estimate) / trials)`.
    pub std_error: f64,
}

impl TrialReport {
    pub fn from_counts(trials: u64, hits: u64) -> Self {
        assert!(trials > 0, "a report needs at least one trial");
        let estimate = hits as f64 / trials as f64;
        TrialReport {
            trials,
            hits,
            estimate,
            std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        }
    }
}

/// Exact set membership, the reference a filter is compared against.
pub struct ExactSetOracle {
    set: HashSet<Vec<u8>>,
}

impl ExactSetOracle {
    pub fn new<I, T>(inserted: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        ExactSetOracle {
            set: inserted.into_iter().map(|e| e.as_ref().to_vec()).collect(),
        }
    }

    pub fn contains(&self, probe: &[u8]) -> bool {
        self.set.contains(probe)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

/// Seeded stream of fixed-length random byte-string elements.
pub fn random_elements(seed: u64, count: usize) -> Vec<Vec<u8>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut buf = vec![0u8; ELEMENT_LEN];
            rng.fill_bytes(&mut buf);
            buf
        })
        .collect()
}

/// Estimates the false positive rate of `filter` over `negatives`
/// probes drawn disjoint from the inserted set by rejection sampling.
pub fn estimate_fpr<F: Filter>(
    filter: &F,
    inserted: &[Vec<u8>],
    negatives: u64,
    seed: HashSeed,
) -> TrialReport {
    let oracle = ExactSetOracle::new(inserted);
    let mut rng = ChaCha12Rng::seed_from_u64(seed.0);
    let mut hits = 0;
    let mut buf = vec![0u8; ELEMENT_LEN];
    for _ in 0..negatives {
        loop {
            rng.fill_bytes(&mut buf);
            if !oracle.contains(&buf) {
                break;
            }
        }
        debug_assert!(!oracle.contains(&buf));
        if filter.query(&buf) {
            hits += 1;
        }
    }
    TrialReport::from_counts(negatives, hits)
}

/// Estimates the probability that one element's probe set contains a
/// duplicate index, under the model the clash formulas are derived for:
/// every hash function draws an independent uniform index from its
/// block's range. Rational hash counts contribute their extra draw with
/// the fractional probability.
///
/// `blocks` is a `(size, k)` list; a monolithic filter is the single
/// entry `[(m, k)]`.
pub fn estimate_clash_rate(blocks: &[(u64, f64)], trials: u64, seed: HashSeed) -> TrialReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed.0);
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut offset = 0u64;
    for &(size, _) in blocks {
        offsets.push(offset);
        offset += size;
    }
    let mut hits = 0;
    let mut indices: Vec<u64> = Vec::with_capacity(16);
    for _ in 0..trials {
        indices.clear();
        for (&(size, k), &base) in blocks.iter().zip(&offsets) {
            let mut draws = k.floor() as u64;
            let frac = k - k.floor();
            if frac > 0.0 && rng.random::<f64>() < frac {
                draws += 1;
            }
            for _ in 0..draws {
                indices.push(base + rng.random_range(0..size));
            }
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            hits += 1;
        }
    }
    TrialReport::from_counts(trials, hits)
}

/// Standard error of an empirical false positive rate measured on one
/// realized standard filter against the expectation [`analysis::fpr_exact`].
///
/// Combines the query sampling variance `p (1 - p) / trials` with the
/// filter realization variance propagated from the fraction of zeros
/// (delta method): a single built filter's conditional rate scatters
/// around the expectation, and at high `k n / m` that scatter dominates
/// the query noise.
pub fn prediction_std_error(params: FilterParams, trials: u64) -> Result<f64> {
    let p = analysis::fpr_exact(params)?;
    let q = analysis::expected_foz(params)?;
    let dp_dfoz = params.k * (1.0 - q).powf(params.k - 1.0);
    let realization_var = dp_dfoz * dp_dfoz * analysis::foz_variance(params)?;
    Ok((p * (1.0 - p) / trials as f64 + realization_var).sqrt())
}

/// Conditional false positive rate of a rational filter given its
/// realized fraction of zeros:
/// `(1 - foz)^floor(k) * (1 - (k - floor(k)) * foz)`.
pub fn conditional_rational_fpr(k: f64, realized_foz: f64) -> f64 {
    let whole = k.floor() as i32;
    let frac = k - k.floor();
    (1.0 - realized_foz).powi(whole) * (1.0 - frac * realized_foz)
}

/// Chain-rule false positive rate of a block filter given each block's
/// realized fraction of zeros: the product of per-block conditional
/// rates.
pub fn conditional_block_fpr(filter: &VsbBloomFilter) -> f64 {
    filter
        .layout()
        .blocks()
        .iter()
        .map(|block| {
            let zeros = filter
                .bits()
                .extract_range(block.offset_bits, block.size_bits)
                .expect("block range is inside the filter")
                .fraction_of_zeros()
                .expect("blocks are non-empty");
            conditional_rational_fpr(block.k, zeros)
        })
        .product()
}
