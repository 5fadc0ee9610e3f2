//! Fixed-length packed bit array backing every filter.
//!
//! Bits are stored LSB-first within each byte; that order is part of the
//! serialized file format. The count of ones is cached so the fraction
//! of zeros is O(1).

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    storage: Vec<u8>,
    length_bits: u64,
    ones_count: u64,
}

impl BitVector {
    /// A vector of `length_bits` zero bits.
    pub fn new(length_bits: u64) -> Self {
        let bytes = length_bits.div_ceil(8) as usize;
        BitVector {
            storage: vec![0u8; bytes],
            length_bits,
            ones_count: 0,
        }
    }

    /// Rebuilds a vector from its packed representation, recounting ones.
    ///
    /// `bytes` must be exactly `ceil(length_bits / 8)` long with all
    /// padding bits zero.
    pub fn from_bytes(bytes: Vec<u8>, length_bits: u64) -> Result<Self> {
        if bytes.len() as u64 != length_bits.div_ceil(8) {
            return Err(Error::Malformed(format!(
                "payload of {} bytes does not match {} bits",
                bytes.len(),
                length_bits
            )));
        }
        if !length_bits.is_multiple_of(8) {
            let last = bytes[bytes.len() - 1];
            let pad_mask = !0u8 << (length_bits % 8);
            if last & pad_mask != 0 {
                return Err(Error::Malformed("padding bits are not zero".into()));
            }
        }
        let ones_count = bytes.iter().map(|b| b.count_ones() as u64).sum();
        Ok(BitVector {
            storage: bytes,
            length_bits,
            ones_count,
        })
    }

    pub fn len_bits(&self) -> u64 {
        self.length_bits
    }

    pub fn is_empty(&self) -> bool {
        self.length_bits == 0
    }

    pub fn ones_count(&self) -> u64 {
        self.ones_count
    }

    /// Packed bytes, LSB-first bit order, padding bits zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.storage
    }

    /// Sets bit `index` to 1. Idempotent. Out-of-range indices are a
    /// caller bug and panic.
    pub fn set_bit(&mut self, index: u64) {
        assert!(
            index < self.length_bits,
            "bit index {index} out of range for length {}",
            self.length_bits
        );
        let byte = &mut self.storage[(index / 8) as usize];
        let mask = 1u8 << (index % 8);
        if *byte & mask == 0 {
            *byte |= mask;
            self.ones_count += 1;
        }
    }

    pub fn get_bit(&self, index: u64) -> bool {
        assert!(
            index < self.length_bits,
            "bit index {index} out of range for length {}",
            self.length_bits
        );
        self.storage[(index / 8) as usize] & (1u8 << (index % 8)) != 0
    }

    /// Share of bits still zero. Undefined (an error) for an empty vector.
    pub fn fraction_of_zeros(&self) -> Result<f64> {
        if self.length_bits == 0 {
            return Err(Error::EmptyBitVector);
        }
        Ok((self.length_bits - self.ones_count) as f64 / self.length_bits as f64)
    }

    /// Copies `len` bits starting at `start` into a new vector.
    pub fn extract_range(&self, start: u64, len: u64) -> Result<BitVector> {
        if start
            .checked_add(len)
            .is_none_or(|end| end > self.length_bits)
        {
            return Err(Error::RangeOverflow {
                start,
                len,
                total: self.length_bits,
            });
        }
        let mut out = BitVector::new(len);
        if start.is_multiple_of(8) {
            // Byte-aligned fast path: copy then clear the padding.
            let first = (start / 8) as usize;
            let nbytes = len.div_ceil(8) as usize;
            out.storage
                .copy_from_slice(&self.storage[first..first + nbytes]);
            if !len.is_multiple_of(8) {
                let last = out.storage.len() - 1;
                out.storage[last] &= !(!0u8 << (len % 8));
            }
            out.ones_count = out.storage.iter().map(|b| b.count_ones() as u64).sum();
        } else {
            for i in 0..len {
                if self.get_bit(start + i) {
                    out.set_bit(i);
                }
            }
        }
        Ok(out)
    }
}
