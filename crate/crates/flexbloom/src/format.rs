//! Binary filter file format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic   4 bytes  "FXBF"
//! version u8       1
//! kind    u8       0 standard, 1 rational, 2 block, 3 block subfilter
//! flags   u8       bit0: mask indexing (kind 0 only)
//! reserved u8      0
//! m       u64      filter length in bits
//! k       f64      hash count (kind 3: sum of block hash counts)
//! n       u64      element count (kinds 2/3: planned set size)
//! seed    u64
//! blocks  kind 3 only: count u16, then per block size u64, k f64
//! payload ceil(m/8) bytes, LSB-first bit order
//! crc32   u32      IEEE CRC-32 of everything above
//! ```
//!
//! Kinds 0-2 carry no block table: a block filter's layout is a pure
//! function of `(m, n)`, so it is rebuilt from the header alone.
//! Subfilters inherit their hash counts from the filter they were cut
//! from, which is why kind 3 stores them explicitly. The number of
//! elements actually inserted is not recorded for kinds 2/3.

use std::fs;
use std::path::Path;

use crate::bits::BitVector;
use crate::hash::HashSeed;
use crate::rational::RationalBloomFilter;
use crate::standard::{IndexMode, StandardBloomFilter};
use crate::vsbbf::{BlockLayout, VsbBloomFilter};
use crate::{Error, Filter, Result};

pub const MAGIC: [u8; 4] = *b"FXBF";
pub const FORMAT_VERSION: u8 = 1;

const KIND_STANDARD: u8 = 0;
const KIND_RATIONAL: u8 = 1;
const KIND_BLOCK: u8 = 2;
const KIND_SUBFILTER: u8 = 3;

const FLAG_MASK_MODE: u8 = 0b0000_0001;

/// Any filter kind, as stored in a filter file.
#[derive(Debug, Clone)]
pub enum AnyFilter {
    Standard(StandardBloomFilter),
    Rational(RationalBloomFilter),
    Block(VsbBloomFilter),
}

impl AnyFilter {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AnyFilter::Standard(_) => "standard",
            AnyFilter::Rational(_) => "rational",
            AnyFilter::Block(f) if f.has_explicit_layout() => "vsbbf-subfilter",
            AnyFilter::Block(_) => "vsbbf",
        }
    }

    pub fn m(&self) -> u64 {
        match self {
            AnyFilter::Standard(f) => f.m(),
            AnyFilter::Rational(f) => f.m(),
            AnyFilter::Block(f) => f.total_bits(),
        }
    }

    pub fn k(&self) -> f64 {
        match self {
            AnyFilter::Standard(f) => f.k() as f64,
            AnyFilter::Rational(f) => f.k(),
            AnyFilter::Block(f) => f.layout().blocks().iter().map(|b| b.k).sum(),
        }
    }

    pub fn seed(&self) -> HashSeed {
        match self {
            AnyFilter::Standard(f) => f.seed(),
            AnyFilter::Rational(f) => f.seed(),
            AnyFilter::Block(f) => f.seed(),
        }
    }

    pub fn fraction_of_zeros(&self) -> f64 {
        match self {
            AnyFilter::Standard(f) => f.fraction_of_zeros(),
            AnyFilter::Rational(f) => f.fraction_of_zeros(),
            AnyFilter::Block(f) => f.fraction_of_zeros(),
        }
    }
}

impl Filter for AnyFilter {
    fn insert(&mut self, element: &[u8]) {
        match self {
            AnyFilter::Standard(f) => f.insert(element),
            AnyFilter::Rational(f) => f.insert(element),
            AnyFilter::Block(f) => f.insert(element),
        }
    }

    fn query(&self, element: &[u8]) -> bool {
        match self {
            AnyFilter::Standard(f) => f.query(element),
            AnyFilter::Rational(f) => f.query(element),
            AnyFilter::Block(f) => f.query(element),
        }
    }
}

impl From<StandardBloomFilter> for AnyFilter {
    fn from(f: StandardBloomFilter) -> Self {
        AnyFilter::Standard(f)
    }
}

impl From<RationalBloomFilter> for AnyFilter {
    fn from(f: RationalBloomFilter) -> Self {
        AnyFilter::Rational(f)
    }
}

impl From<VsbBloomFilter> for AnyFilter {
    fn from(f: VsbBloomFilter) -> Self {
        AnyFilter::Block(f)
    }
}

/// Serializes a filter to its file representation.
pub fn to_bytes(filter: &AnyFilter) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC);
    buf.push(FORMAT_VERSION);
    match filter {
        AnyFilter::Standard(f) => {
            buf.push(KIND_STANDARD);
            buf.push(if f.mode() == IndexMode::Mask {
                FLAG_MASK_MODE
            } else {
                0
            });
            buf.push(0);
            buf.extend_from_slice(&f.m().to_le_bytes());
            buf.extend_from_slice(&(f.k() as f64).to_le_bytes());
            buf.extend_from_slice(&f.inserted_count().to_le_bytes());
            buf.extend_from_slice(&f.seed().0.to_le_bytes());
            buf.extend_from_slice(f.bits().as_bytes());
        }
        AnyFilter::Rational(f) => {
            buf.push(KIND_RATIONAL);
            buf.push(0);
            buf.push(0);
            buf.extend_from_slice(&f.m().to_le_bytes());
            buf.extend_from_slice(&f.k().to_le_bytes());
            buf.extend_from_slice(&f.inserted_count().to_le_bytes());
            buf.extend_from_slice(&f.seed().0.to_le_bytes());
            buf.extend_from_slice(f.bits().as_bytes());
        }
        AnyFilter::Block(f) => {
            let explicit = f.has_explicit_layout();
            buf.push(if explicit { KIND_SUBFILTER } else { KIND_BLOCK });
            buf.push(0);
            buf.push(0);
            buf.extend_from_slice(&f.total_bits().to_le_bytes());
            let k_total: f64 = f.layout().blocks().iter().map(|b| b.k).sum();
            buf.extend_from_slice(&k_total.to_le_bytes());
            buf.extend_from_slice(&f.planned_n().to_le_bytes());
            buf.extend_from_slice(&f.seed().0.to_le_bytes());
            if explicit {
                let blocks = f.layout().blocks();
                buf.extend_from_slice(&(blocks.len() as u16).to_le_bytes());
                for b in blocks {
                    buf.extend_from_slice(&b.size_bits.to_le_bytes());
                    buf.extend_from_slice(&b.k.to_le_bytes());
                }
            }
            buf.extend_from_slice(f.bits().as_bytes());
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::Malformed(format!(
                "unexpected end of file at offset {}",
                self.pos
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a filter file, verifying the checksum and every header field.
pub fn from_bytes(bytes: &[u8]) -> Result<AnyFilter> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(Error::Malformed("file shorter than a header".into()));
    }
    let body_len = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[body_len..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..body_len]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let mut r = Reader {
        bytes: &bytes[..body_len],
        pos: 4,
    };
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let kind = r.u8()?;
    let flags = r.u8()?;
    let reserved = r.u8()?;
    if reserved != 0 {
        return Err(Error::Malformed("reserved byte is not zero".into()));
    }
    let allowed_flags = if kind == KIND_STANDARD {
        FLAG_MASK_MODE
    } else {
        0
    };
    if flags & !allowed_flags != 0 {
        return Err(Error::Malformed(format!("unknown flags {flags:#04x}")));
    }
    let m = r.u64()?;
    let k = r.f64()?;
    let n = r.u64()?;
    let seed = HashSeed(r.u64()?);

    let blocks = if kind == KIND_SUBFILTER {
        let count = r.u16()?;
        let mut table = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let size = r.u64()?;
            let block_k = r.f64()?;
            table.push((size, block_k));
        }
        Some(table)
    } else {
        None
    };

    let payload = r.take(m.div_ceil(8) as usize)?.to_vec();
    if r.pos != body_len {
        return Err(Error::Malformed(format!(
            "{} trailing bytes after payload",
            body_len - r.pos
        )));
    }
    let bits = BitVector::from_bytes(payload, m)?;

    match kind {
        KIND_STANDARD => {
            if !(k.is_finite() && k >= 1.0 && k.fract() == 0.0 && k <= u32::MAX as f64) {
                return Err(Error::Malformed(format!(
                    "standard filter hash count {k} is not a positive integer"
                )));
            }
            let mode = if flags & FLAG_MASK_MODE != 0 {
                if !m.is_power_of_two() {
                    return Err(Error::Malformed(format!(
                        "mask mode with non-power-of-two length {m}"
                    )));
                }
                IndexMode::Mask
            } else {
                IndexMode::GenericModulo
            };
            Ok(AnyFilter::Standard(StandardBloomFilter::from_parts(
                bits, k as u32, seed, mode, n,
            )))
        }
        KIND_RATIONAL => {
            if !m.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(m));
            }
            if !k.is_finite() || k <= 0.0 {
                return Err(Error::InvalidHashCount(k));
            }
            Ok(AnyFilter::Rational(RationalBloomFilter::from_parts(
                bits, k, seed, n,
            )))
        }
        KIND_BLOCK => {
            let layout = BlockLayout::build(m, n)?;
            Ok(AnyFilter::Block(VsbBloomFilter::from_parts(
                bits, layout, seed, n, 0, false,
            )?))
        }
        KIND_SUBFILTER => {
            let table = blocks.expect("table parsed for kind 3");
            let layout = BlockLayout::from_explicit(&table)?;
            if layout.total_bits() != m {
                return Err(Error::Malformed(format!(
                    "block table sums to {} bits but header says {m}",
                    layout.total_bits()
                )));
            }
            Ok(AnyFilter::Block(VsbBloomFilter::from_parts(
                bits, layout, seed, n, 0, true,
            )?))
        }
        other => Err(Error::UnknownKind(other)),
    }
}

pub fn save(filter: &AnyFilter, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(filter))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<AnyFilter> {
    from_bytes(&fs::read(path)?)
}
