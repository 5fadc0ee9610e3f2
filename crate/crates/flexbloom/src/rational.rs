//! Bloom filter with a rational number of hash functions.
//!
//! `floor(k)` hash functions are applied to every element; one further
//! hash function (ordinal `floor(k)` of the same double-hashing family)
//! is applied only when the element's activation decision fires, with
//! activation probability `k - floor(k)`. The decision is derived from
//! the element's own hash pair, so insert and query always agree on it
//! and the filter has no false negatives.

use crate::bits::BitVector;
use crate::hash::{self, HashSeed};
use crate::{Error, Filter, Result};

/// Activation context used by a standalone rational filter. Block
/// filters use nonzero tags so each block decides independently.
pub(crate) const STANDALONE_TAG: u32 = 0;

#[derive(Debug, Clone)]
pub struct RationalBloomFilter {
    bits: BitVector,
    k: f64,
    seed: HashSeed,
    inserted: u64,
}

impl RationalBloomFilter {
    /// Creates a filter of power-of-two length `m` with real `k > 0`.
    pub fn new(m: u64, k: f64, seed: HashSeed) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroLength);
        }
        if !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidHashCount(k));
        }
        Ok(RationalBloomFilter {
            bits: BitVector::new(m),
            k,
            seed,
            inserted: 0,
        })
    }

    pub(crate) fn from_parts(bits: BitVector, k: f64, seed: HashSeed, inserted: u64) -> Self {
        RationalBloomFilter {
            bits,
            k,
            seed,
            inserted,
        }
    }

    pub fn m(&self) -> u64 {
        self.bits.len_bits()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn seed(&self) -> HashSeed {
        self.seed
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

    /// `k - floor(k)`, the probability the extra hash function fires.
    pub fn activation_probability(&self) -> f64 {
        self.k - self.k.floor()
    }

    /// Number of hash functions active for this element:
    /// `floor(k)` plus one if the activation decision fires.
    pub fn effective_hash_count(&self, element: &[u8]) -> u64 {
        let pair = hash::hash_pair(element, self.seed);
        let whole = self.k.floor() as u64;
        let active = hash::activation(pair, self.activation_probability(), STANDALONE_TAG);
        whole + active as u64
    }

    /// Global bit indices this element probes (activation included).
    pub fn probe_indices(&self, element: &[u8]) -> Vec<u64> {
        let pair = hash::hash_pair(element, self.seed);
        let m = self.bits.len_bits();
        let count = self.k.floor() as u64
            + hash::activation(pair, self.activation_probability(), STANDALONE_TAG) as u64;
        (0..count)
            .map(|i| hash::derived_index(pair, i, m, 0))
            .collect()
    }
}

impl Filter for RationalBloomFilter {
    fn insert(&mut self, element: &[u8]) {
        let pair = hash::hash_pair(element, self.seed);
        let m = self.bits.len_bits();
        let whole = self.k.floor() as u64;
        for i in 0..whole {
            self.bits.set_bit(hash::derived_index(pair, i, m, 0));
        }
        if hash::activation(pair, self.activation_probability(), STANDALONE_TAG) {
            self.bits.set_bit(hash::derived_index(pair, whole, m, 0));
        }
        self.inserted += 1;
    }

    fn query(&self, element: &[u8]) -> bool {
        let pair = hash::hash_pair(element, self.seed);
        let m = self.bits.len_bits();
        let whole = self.k.floor() as u64;
        for i in 0..whole {
            if !self.bits.get_bit(hash::derived_index(pair, i, m, 0)) {
                return false;
            }
        }
        if hash::activation(pair, self.activation_probability(), STANDALONE_TAG)
            && !self.bits.get_bit(hash::derived_index(pair, whole, m, 0))
        {
            return false;
        }
        // Zero active hash functions leave nothing to contradict
        // membership; this happens only for floor(k) = 0 elements that
        // did not activate, which would also have set no bits at insert.
        true
    }
}
