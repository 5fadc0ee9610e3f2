//! Seedable hashing primitives shared by all filter kinds.
//!
//! One 128-bit MurmurHash3 invocation per element yields the base pair
//! `(h1, h2)`; every probe index is then derived from the pair with the
//! double-hashing composition `h1 + (i + m) * h2`, so adding hash
//! functions costs one multiplication and one addition each. Index
//! reduction is a mask for power-of-two ranges. The same pair also
//! drives the probabilistic-activation decision used for rational hash
//! counts.

use crate::{Error, Result};

/// Seed carried by every filter. The same `(element, seed)` pair hashes
/// to the same values on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HashSeed(pub u64);

impl From<u64> for HashSeed {
    fn from(value: u64) -> Self {
        HashSeed(value)
    }
}

/// Two 64-bit base hashes of one element, the inputs to double hashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashPair {
    pub h1: u64,
    pub h2: u64,
}

/// Hashes an element to its base pair: the two halves of a single
/// MurmurHash3 x64 128-bit digest.
pub fn hash_pair(element: &[u8], seed: HashSeed) -> HashPair {
    let (h1, h2) = murmur3_x64_128(element, seed.0);
    HashPair { h1, h2 }
}

/// `h mod m` for power-of-two `m`, computed as `h & (m - 1)`.
pub fn pow2_mod(h: u64, m: u64) -> Result<u64> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    Ok(h & (m - 1))
}

/// The 64-bit double-hashing composition `h1 + (ordinal + m) * h2`,
/// wrapping mod 2^64. Callers reduce the result to their index range.
#[inline]
pub(crate) fn compose(pair: HashPair, ordinal: u64, m: u64) -> u64 {
    pair.h1
        .wrapping_add(ordinal.wrapping_add(m).wrapping_mul(pair.h2))
}

/// Probe index of hash ordinal `i` inside a power-of-two block:
/// `((h1 + (i + block_size) * h2) & (block_size - 1)) + block_offset`.
///
/// The result always lies in `[block_offset, block_offset + block_size)`.
#[inline]
pub fn derived_index(pair: HashPair, ordinal: u64, block_size: u64, block_offset: u64) -> u64 {
    debug_assert!(block_size.is_power_of_two());
    (compose(pair, ordinal, block_size) & (block_size - 1)) + block_offset
}

/// Threshold form of a probability: `floor(p * 2^64)` as the cutoff for a
/// uniform 64-bit decision value.
#[inline]
fn activation_threshold(p: f64) -> u64 {
    // 2^64 as f64; the product stays below it for p < 1, and the cast
    // truncates toward zero.
    (p * 18_446_744_073_709_551_616.0) as u64
}

/// Decides whether the probabilistically activated hash function fires
/// for this element.
///
/// The decision value is a full-width 64-bit mix of the base pair and
/// `context_tag`, compared against `floor(p_activation * 2^64)`, so the
/// marginal activation rate over random elements equals `p_activation`
/// even for single-bit blocks. Distinct tags give independent decisions
/// for the same element; the same tag always reproduces the insert-time
/// decision at query time.
pub fn activation_decision(pair: HashPair, p_activation: f64, context_tag: u32) -> Result<bool> {
    if !(0.0..=1.0).contains(&p_activation) || p_activation.is_nan() {
        return Err(Error::InvalidProbability(p_activation));
    }
    Ok(activation(pair, p_activation, context_tag))
}

/// Validated-input fast path of [`activation_decision`].
#[inline]
pub(crate) fn activation(pair: HashPair, p_activation: f64, context_tag: u32) -> bool {
    if p_activation <= 0.0 {
        return false;
    }
    if p_activation >= 1.0 {
        return true;
    }
    activation_value(pair, context_tag) < activation_threshold(p_activation)
}

/// Uniform 64-bit decision value for one (element, tag) combination.
#[inline]
fn activation_value(pair: HashPair, context_tag: u32) -> u64 {
    let tagged = fmix64(pair.h2 ^ (context_tag as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    fmix64(pair.h1 ^ tagged)
}

// MurmurHash3 x64_128 (Austin Appleby's algorithm), seeded with a 64-bit
// value in both lanes. For seeds below 2^32 this matches the reference
// implementation byte for byte.
fn murmur3_x64_128(data: &[u8], seed: u64) -> (u64, u64) {
    const C1: u64 = 0x87c3_7b91_1142_53d5;
    const C2: u64 = 0x4cf5_ad43_2745_937f;

    let mut h1 = seed;
    let mut h2 = seed;

    let mut chunks = data.chunks_exact(16);
    for block in chunks.by_ref() {
        let k1 = u64::from_le_bytes(block[..8].try_into().unwrap());
        let k2 = u64::from_le_bytes(block[8..].try_into().unwrap());

        h1 ^= k1.wrapping_mul(C1).rotate_left(31).wrapping_mul(C2);
        h1 = h1
            .rotate_left(27)
            .wrapping_add(h2)
            .wrapping_mul(5)
            .wrapping_add(0x52dc_e729);

        h2 ^= k2.wrapping_mul(C2).rotate_left(33).wrapping_mul(C1);
        h2 = h2
            .rotate_left(31)
            .wrapping_add(h1)
            .wrapping_mul(5)
            .wrapping_add(0x3849_5ab5);
    }

    let tail = chunks.remainder();
    let mut k1: u64 = 0;
    let mut k2: u64 = 0;
    for (i, &byte) in tail.iter().enumerate().rev() {
        if i >= 8 {
            k2 ^= (byte as u64) << ((i - 8) * 8);
        } else {
            k1 ^= (byte as u64) << (i * 8);
        }
    }
    if tail.len() > 8 {
        h2 ^= k2.wrapping_mul(C2).rotate_left(33).wrapping_mul(C1);
    }
    if !tail.is_empty() {
        h1 ^= k1.wrapping_mul(C1).rotate_left(31).wrapping_mul(C2);
    }

    h1 ^= data.len() as u64;
    h2 ^= data.len() as u64;
    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);
    (h1, h2)
}

#[inline]
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^= h >> 33;
    h
}
