//! Baseline Bloom filter with an integer number of hash functions.
//!
//! Supports two index-reduction modes: `Mask` (requires a power-of-two
//! length, reduces with a bitwise AND) and `GenericModulo` (any length,
//! reduces with `%`). The generic mode exists as the comparison target
//! for variably-sized block filters, both for false-positive rates and
//! for the modulo-cost timing benchmark.

use crate::bits::BitVector;
use crate::hash::{self, HashPair, HashSeed};
use crate::{Error, Filter, Result};

/// How a 64-bit composed hash is reduced to a filter index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    /// `h & (m - 1)`; only valid when `m` is a power of two.
    Mask,
    /// `h % m`; valid for any `m >= 1`.
    GenericModulo,
}

#[derive(Debug, Clone)]
pub struct StandardBloomFilter {
    bits: BitVector,
    k: u32,
    seed: HashSeed,
    mode: IndexMode,
    inserted: u64,
}

impl StandardBloomFilter {
    pub fn new(m: u64, k: u32, seed: HashSeed, mode: IndexMode) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroLength);
        }
        if k == 0 {
            return Err(Error::InvalidHashCount(0.0));
        }
        if mode == IndexMode::Mask && !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        Ok(StandardBloomFilter {
            bits: BitVector::new(m),
            k,
            seed,
            mode,
            inserted: 0,
        })
    }

    pub(crate) fn from_parts(
        bits: BitVector,
        k: u32,
        seed: HashSeed,
        mode: IndexMode,
        inserted: u64,
    ) -> Self {
        StandardBloomFilter {
            bits,
            k,
            seed,
            mode,
            inserted,
        }
    }

    #[inline]
    fn index(&self, pair: HashPair, ordinal: u64) -> u64 {
        let m = self.bits.len_bits();
        let composed = hash::compose(pair, ordinal, m);
        match self.mode {
            IndexMode::Mask => composed & (m - 1),
            IndexMode::GenericModulo => composed % m,
        }
    }

    /// Global bit indices this element probes, in ordinal order.
    pub fn probe_indices(&self, element: &[u8]) -> Vec<u64> {
        let pair = hash::hash_pair(element, self.seed);
        (0..self.k as u64).map(|i| self.index(pair, i)).collect()
    }

    pub fn m(&self) -> u64 {
        self.bits.len_bits()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> HashSeed {
        self.seed
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn inserted_count(&self) -> u64 {
        self.inserted
    }

    pub fn ones_count(&self) -> u64 {
        self.bits.ones_count()
    }

    pub fn fraction_of_zeros(&self) -> f64 {
        self.bits.fraction_of_zeros().expect("filter length >= 1")
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }
}

impl Filter for StandardBloomFilter {
    fn insert(&mut self, element: &[u8]) {
        let pair = hash::hash_pair(element, self.seed);
        for i in 0..self.k as u64 {
            let idx = self.index(pair, i);
            self.bits.set_bit(idx);
        }
        self.inserted += 1;
    }

    fn query(&self, element: &[u8]) -> bool {
        let pair = hash::hash_pair(element, self.seed);
        (0..self.k as u64).all(|i| self.bits.get_bit(self.index(pair, i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{self, FilterParams};
    use crate::oracle;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn elements(seed: u64, count: usize) -> Vec<Vec<u8>> {
        oracle::random_elements(seed, count)
    }

    #[test]
    fn construction_validates_parameters() {
        assert!(StandardBloomFilter::new(0, 1, HashSeed(0), IndexMode::GenericModulo).is_err());
        assert!(StandardBloomFilter::new(8, 0, HashSeed(0), IndexMode::Mask).is_err());
        assert!(StandardBloomFilter::new(24, 2, HashSeed(0), IndexMode::Mask).is_err());
        assert!(StandardBloomFilter::new(24, 2, HashSeed(0), IndexMode::GenericModulo).is_ok());
    }

    #[test]
    fn inserted_elements_query_true() {
        let mut f = StandardBloomFilter::new(1024, 4, HashSeed(1), IndexMode::Mask).unwrap();
        let elems = elements(42, 200);
        for e in &elems {
            f.insert(e);
        }
        assert_eq!(f.inserted_count(), 200);
        assert!(elems.iter().all(|e| f.query(e)));
    }

    #[test]
    fn empty_filter_rejects_everything() {
        let f = StandardBloomFilter::new(512, 3, HashSeed(7), IndexMode::Mask).unwrap();
        assert!(elements(43, 500).iter().all(|e| !f.query(e)));
    }

    #[test]
    fn single_hash_sets_exactly_one_bit() {
        let mut f = StandardBloomFilter::new(8, 1, HashSeed(5), IndexMode::Mask).unwrap();
        let element = b"known element";
        // Expected index computed from the hashing primitives directly.
        let pair = hash::hash_pair(element, HashSeed(5));
        let expected = hash::derived_index(pair, 0, 8, 0);
        f.insert(element);
        assert_eq!(f.ones_count(), 1);
        assert!(f.bits().get_bit(expected));
    }

    #[test]
    fn ones_count_bounded_by_kn() {
        let mut f = StandardBloomFilter::new(4096, 5, HashSeed(9), IndexMode::Mask).unwrap();
        for e in elements(44, 300) {
            f.insert(&e);
        }
        assert!(f.ones_count() <= 5 * 300);
    }

    #[test]
    fn mask_and_modulo_modes_agree_on_power_of_two() {
        let mut mask = StandardBloomFilter::new(256, 3, HashSeed(3), IndexMode::Mask).unwrap();
        let mut modulo =
            StandardBloomFilter::new(256, 3, HashSeed(3), IndexMode::GenericModulo).unwrap();
        for e in elements(45, 400) {
            mask.insert(&e);
            modulo.insert(&e);
        }
        assert_eq!(mask.bits(), modulo.bits());
    }

    #[test]
    fn empirical_fpr_matches_model() {
        // m = 8192, n = 1000, k = 6: the classic fixed-size design point.
        let params = FilterParams::new(8192, 1000, 6.0);
        let mut f = StandardBloomFilter::new(8192, 6, HashSeed(11), IndexMode::Mask).unwrap();
        let inserted = elements(46, 1000);
        for e in &inserted {
            f.insert(e);
        }
        let report = oracle::estimate_fpr(&f, &inserted, 10_000, HashSeed(47));
        let predicted = analysis::fpr_exact(params).unwrap();
        let tolerance = 3.0 * oracle::prediction_std_error(params, report.trials).unwrap();
        assert!(
            (report.estimate - predicted).abs() <= tolerance,
            "fpr {} vs predicted {} (tolerance {})",
            report.estimate,
            predicted,
            tolerance
        );
    }

    #[test]
    fn empirical_foz_matches_model() {
        let params = FilterParams::new(8192, 1200, 4.0);
        let mut f = StandardBloomFilter::new(8192, 4, HashSeed(13), IndexMode::Mask).unwrap();
        for e in elements(48, 1200) {
            f.insert(&e);
        }
        let expected = analysis::expected_foz(params).unwrap();
        let sd = analysis::foz_variance(params).unwrap().sqrt();
        assert!(
            (f.fraction_of_zeros() - expected).abs() <= 3.0 * sd,
            "foz {} vs expected {}",
            f.fraction_of_zeros(),
            expected
        );
    }

    #[test]
    fn no_false_negatives_random_sets() {
        let mut rng = ChaCha12Rng::seed_from_u64(71);
        for _ in 0..20 {
            let m = 1u64 << (4 + rng.next_u64() % 8);
            let k = 1 + (rng.next_u32() % 10);
            let n = 1 + (rng.next_u64() % 500) as usize;
            let mut f =
                StandardBloomFilter::new(m, k, HashSeed(rng.next_u64()), IndexMode::Mask).unwrap();
            let elems = elements(rng.next_u64(), n);
            for e in &elems {
                f.insert(e);
            }
            assert!(elems.iter().all(|e| f.query(e)), "m={m} k={k} n={n}");
        }
    }
}
