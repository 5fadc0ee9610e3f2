//! Bloom filters with relaxed parameter constraints.
//!
//! Classic Bloom filters tie their two main knobs to hardware-friendly
//! values: the number of hash functions `k` must be an integer, and the
//! filter length `m` is usually a power of two so that index reduction is
//! a bitwise AND. This crate removes both constraints:
//!
//! - [`RationalBloomFilter`] accepts any real `k > 0`. It applies
//!   `floor(k)` hash functions unconditionally and one further hash
//!   function probabilistically, activated per element with probability
//!   `k - floor(k)`. Activation is a deterministic function of the
//!   element, so the filter keeps the no-false-negative guarantee.
//! - [`VsbBloomFilter`] accepts any length `m`. The filter is split into
//!   descending power-of-two blocks taken from the binary representation
//!   of `m`; each block runs its own rational-`k` sub-filter with
//!   mask-modulo indexing, so no general modulo is ever computed.
//!
//! [`StandardBloomFilter`] is the integer-`k` baseline, [`analysis`]
//! holds the closed-form false-positive and clash models, and [`oracle`]
//! provides seeded Monte-Carlo estimators used to verify the models.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `flexbloom` binary for building, querying and sweeping filters
//! from the command line.

pub mod analysis;
pub mod bits;
pub mod experiment;
pub mod format;
pub mod hash;
pub mod oracle;
pub mod rational;
pub mod standard;
pub mod vsbbf;

pub use bits::BitVector;
pub use hash::{HashPair, HashSeed};
pub use rational::RationalBloomFilter;
pub use standard::{IndexMode, StandardBloomFilter};
pub use vsbbf::{BlockLayout, VsbBloomFilter};

/// Errors produced by filter construction, the analytic models and the
/// serialization format.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(u64),
    #[error("filter length must be at least 1 bit")]
    ZeroLength,
    #[error("bit vector is empty")]
    EmptyBitVector,
    #[error("bit range {start}+{len} exceeds length {total}")]
    RangeOverflow { start: u64, len: u64, total: u64 },
    #[error("activation probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("hash-function count {0} must be positive and finite")]
    InvalidHashCount(f64),
    #[error("element count must be at least 1")]
    ZeroElements,
    #[error("analytic model requires m >= 2, got {0}")]
    DegenerateLength(u64),
    #[error("clash approximation out of model: truncated sum {0} exceeds 1")]
    OutOfModel(f64),
    #[error("block list is empty")]
    EmptyBlocks,
    #[error("block size {size} is below the minimum block size {min}")]
    BlockTooSmall { size: u64, min: u64 },
    #[error("bad magic bytes, not a filter file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown filter kind tag {0}")]
    UnknownKind(u8),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed filter file: {0}")]
    Malformed(String),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Common interface of all filter kinds: probabilistic set membership
/// with no false negatives.
pub trait Filter {
    /// Adds an element (a raw byte sequence) to the set.
    fn insert(&mut self, element: &[u8]);

    /// Returns `false` if the element is definitely not in the set,
    /// `true` if it may be.
    fn query(&self, element: &[u8]) -> bool;
}
