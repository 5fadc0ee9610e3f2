//! Experiment harness: single-point runs, parameter sweeps over `k` and
//! `n`, the modulo-cost timing benchmark, and CSV output.
//!
//! Given identical parameters and seeds, every run produces identical
//! rows apart from the two timing columns.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::format::AnyFilter;
use crate::hash::HashSeed;
use crate::rational::RationalBloomFilter;
use crate::standard::{IndexMode, StandardBloomFilter};
use crate::vsbbf::VsbBloomFilter;
use crate::{analysis, oracle, Error, Filter, Result};

/// Negative probes per estimate unless overridden.
pub const DEFAULT_NEGATIVES: u64 = 10_000;

/// Salt mixed into the spec seed to derive the negative-probe stream,
/// keeping it distinct from the element stream of the same seed.
const PROBE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Width of the grey band around the optimal fill level: rows whose
/// measured fraction of zeros lies in `0.5 +/- 0.02` are flagged.
pub const FOZ_BAND_HALF_WIDTH: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Standard,
    Rational,
    Vsbbf,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Standard => "standard",
            FilterKind::Rational => "rational",
            FilterKind::Vsbbf => "vsbbf",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(FilterKind::Standard),
            "rational" => Ok(FilterKind::Rational),
            "vsbbf" => Ok(FilterKind::Vsbbf),
            other => Err(Error::InvalidSpec(format!("unknown filter kind {other:?}"))),
        }
    }
}

/// Hash count choice: an explicit real value or the derived optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KChoice {
    Optimal,
    Fixed(f64),
}

impl fmt::Display for KChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KChoice::Optimal => f.write_str("optimal"),
            KChoice::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for KChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "optimal" {
            return Ok(KChoice::Optimal);
        }
        s.parse::<f64>().map(KChoice::Fixed).map_err(|_| {
            Error::InvalidSpec(format!(
                "hash count {s:?} is neither a number nor \"optimal\""
            ))
        })
    }
}

/// One experiment point: which filter to build, how, and how to probe it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSpec {
    pub kind: FilterKind,
    pub m: u64,
    pub n: u64,
    pub k: KChoice,
    pub negatives: u64,
    pub seed: u64,
    pub repetitions: u32,
}

impl fmt::Display for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kind={} m={} n={} k={} negatives={} seed={} reps={}",
            self.kind, self.m, self.n, self.k, self.negatives, self.seed, self.repetitions
        )
    }
}

impl FromStr for ExperimentSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kind = None;
        let mut m = None;
        let mut n = None;
        let mut k = None;
        let mut negatives = DEFAULT_NEGATIVES;
        let mut seed = 0;
        let mut repetitions = 1;
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got {token:?}")))?;
            let bad = |_| Error::InvalidSpec(format!("bad value in {token:?}"));
            match key {
                "kind" => kind = Some(value.parse()?),
                "m" => m = Some(value.parse().map_err(bad)?),
                "n" => n = Some(value.parse().map_err(bad)?),
                "k" => k = Some(value.parse()?),
                "negatives" => negatives = value.parse().map_err(bad)?,
                "seed" => seed = value.parse().map_err(bad)?,
                "reps" => repetitions = value.parse().map_err(bad)?,
                other => {
                    return Err(Error::InvalidSpec(format!("unknown field {other:?}")));
                }
            }
        }
        let missing = |what: &str| Error::InvalidSpec(format!("missing field {what:?}"));
        Ok(ExperimentSpec {
            kind: kind.ok_or_else(|| missing("kind"))?,
            m: m.ok_or_else(|| missing("m"))?,
            n: n.ok_or_else(|| missing("n"))?,
            k: k.ok_or_else(|| missing("k"))?,
            negatives,
            seed,
            repetitions,
        })
    }
}

/// One measured row of a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub filter_kind: FilterKind,
    pub m: u64,
    pub n: u64,
    pub k_effective: f64,
    pub seed: u64,
    pub fpr_estimate: f64,
    pub fpr_std_error: f64,
    pub foz_measured: f64,
    pub foz_expected: f64,
    pub foz_in_band: bool,
    pub insert_ns_per_element: f64,
    pub query_ns_per_element: f64,
}

/// Fixed header of the result CSV, format version 1.
pub const RESULT_CSV_HEADER: &str = "filter_kind,m,n,k_effective,seed,fpr_estimate,\
fpr_std_error,foz_measured,foz_expected,foz_in_band,insert_ns_per_element,query_ns_per_element";

impl ResultRow {
    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.1},{:.1}",
            self.filter_kind,
            self.m,
            self.n,
            self.k_effective,
            self.seed,
            self.fpr_estimate,
            self.fpr_std_error,
            self.foz_measured,
            self.foz_expected,
            self.foz_in_band,
            self.insert_ns_per_element,
            self.query_ns_per_element
        )
    }

    /// Equality on everything except the two timing columns.
    pub fn eq_ignoring_timing(&self, other: &ResultRow) -> bool {
        self.filter_kind == other.filter_kind
            && self.m == other.m
            && self.n == other.n
            && self.k_effective == other.k_effective
            && self.seed == other.seed
            && self.fpr_estimate == other.fpr_estimate
            && self.fpr_std_error == other.fpr_std_error
            && self.foz_measured == other.foz_measured
            && self.foz_expected == other.foz_expected
            && self.foz_in_band == other.foz_in_band
    }
}

/// Resolves a [`KChoice`] for a filter kind. Standard filters need an
/// integer count, so `optimal` rounds to the nearest integer (at least
/// 1) for them; the other kinds take the real optimum as is.
pub fn effective_k(kind: FilterKind, m: u64, n: u64, k: KChoice) -> Result<f64> {
    let value = match k {
        KChoice::Optimal => {
            let k_star = analysis::optimal_k(m, n)?;
            match kind {
                FilterKind::Standard => k_star.round().max(1.0),
                _ => k_star,
            }
        }
        KChoice::Fixed(v) => v,
    };
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidHashCount(value));
    }
    if kind == FilterKind::Standard && (value.fract() != 0.0 || value > u32::MAX as f64) {
        return Err(Error::InvalidSpec(format!(
            "standard filters need an integer hash count, got {value}"
        )));
    }
    Ok(value)
}

/// Builds an empty filter of the requested kind. Standard filters use
/// mask indexing when `m` is a power of two and generic modulo
/// otherwise.
pub fn build_filter(kind: FilterKind, m: u64, n: u64, k_eff: f64, seed: u64) -> Result<AnyFilter> {
    let seed = HashSeed(seed);
    Ok(match kind {
        FilterKind::Standard => {
            let mode = if m.is_power_of_two() {
                IndexMode::Mask
            } else {
                IndexMode::GenericModulo
            };
            StandardBloomFilter::new(m, k_eff as u32, seed, mode)?.into()
        }
        FilterKind::Rational => RationalBloomFilter::new(m, k_eff, seed)?.into(),
        FilterKind::Vsbbf => VsbBloomFilter::new(m, n, seed)?.into(),
    })
}

/// Runs one experiment point, producing one row per repetition.
/// Repetitions share the seed, so they are identical apart from timing.
pub fn run_spec(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let k_eff = effective_k(spec.kind, spec.m, spec.n, spec.k)?;
    let elements = oracle::random_elements(spec.seed, spec.n as usize);
    let foz_expected = analysis::expected_foz(analysis::FilterParams::new(spec.m, spec.n, k_eff))?;

    let mut rows = Vec::with_capacity(spec.repetitions as usize);
    for _ in 0..spec.repetitions {
        let mut filter = build_filter(spec.kind, spec.m, spec.n, k_eff, spec.seed)?;

        let insert_start = Instant::now();
        for e in &elements {
            filter.insert(e);
        }
        let insert_ns = insert_start.elapsed().as_nanos() as f64 / elements.len().max(1) as f64;

        let query_start = Instant::now();
        let mut present = 0usize;
        for e in &elements {
            present += filter.query(e) as usize;
        }
        let query_ns = query_start.elapsed().as_nanos() as f64 / elements.len().max(1) as f64;
        debug_assert_eq!(present, elements.len(), "false negative in sweep");

        let report = oracle::estimate_fpr(
            &filter,
            &elements,
            spec.negatives,
            HashSeed(spec.seed ^ PROBE_SEED_SALT),
        );
        let foz_measured = filter.fraction_of_zeros();
        rows.push(ResultRow {
            filter_kind: spec.kind,
            m: spec.m,
            n: spec.n,
            k_effective: k_eff,
            seed: spec.seed,
            fpr_estimate: report.estimate,
            fpr_std_error: report.std_error,
            foz_measured,
            foz_expected,
            foz_in_band: (foz_measured - 0.5).abs() <= FOZ_BAND_HALF_WIDTH,
            insert_ns_per_element: insert_ns,
            query_ns_per_element: query_ns,
        });
    }
    Ok(rows)
}

/// A sweep: the cartesian grid of `n_values` x `k_values` around a
/// shared configuration, in deterministic row order (`n` outer, `k`
/// inner, repetition innermost).
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub kind: FilterKind,
    pub m: u64,
    pub n_values: Vec<u64>,
    pub k_values: Vec<KChoice>,
    pub negatives: u64,
    pub seed: u64,
    pub repetitions: u32,
}

pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<ResultRow>> {
    if grid.n_values.is_empty() || grid.k_values.is_empty() {
        return Err(Error::InvalidSpec("sweep grid is empty".into()));
    }
    let mut rows = Vec::new();
    for &n in &grid.n_values {
        for &k in &grid.k_values {
            let spec = ExperimentSpec {
                kind: grid.kind,
                m: grid.m,
                n,
                k,
                negatives: grid.negatives,
                seed: grid.seed,
                repetitions: grid.repetitions,
            };
            rows.extend(run_spec(&spec)?);
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with the versioned header.
pub fn write_csv<W: Write>(mut w: W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(w, "{RESULT_CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.csv_record())?;
    }
    Ok(())
}

/// Parses a value list: a single value, a comma list (`1,2,3`) or an
/// inclusive range with step (`1.0:2.5:0.1`). `optimal` is accepted
/// alone or inside a comma list.
pub fn parse_k_values(s: &str) -> Result<Vec<KChoice>> {
    if let Some(range) = parse_range(s)? {
        return Ok(range.into_iter().map(KChoice::Fixed).collect());
    }
    s.split(',').map(|t| t.trim().parse()).collect()
}

/// Parses an integer list: single value, comma list, or `start:stop:step`.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    if let Some(range) = parse_range(s)? {
        return range
            .into_iter()
            .map(|v| {
                if v.fract() == 0.0 && v >= 0.0 {
                    Ok(v as u64)
                } else {
                    Err(Error::InvalidSpec(format!(
                        "non-integer value {v} in range"
                    )))
                }
            })
            .collect();
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad integer {t:?}")))
        })
        .collect()
}

fn parse_range(s: &str) -> Result<Option<Vec<f64>>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return Ok(None);
    }
    if parts.len() != 3 {
        return Err(Error::InvalidSpec(format!(
            "range must be start:stop:step, got {s:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSpec(format!("bad number {p:?} in range {s:?}")))
        })
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(Error::InvalidSpec(format!("empty range {s:?}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok(Some((0..count).map(|i| start + i as f64 * step).collect()))
}

/// Timing comparison between a generic-modulo standard filter and a
/// block filter of the same non-power-of-two length.
#[derive(Debug, Clone)]
pub struct BenchPhase {
    /// "standard-modulo" or "vsbbf".
    pub filter: &'static str,
    /// "insert" or "query".
    pub phase: &'static str,
    pub ns_per_op: Vec<f64>,
    pub median_ns_per_op: f64,
}

#[derive(Debug, Clone)]
pub struct ModuloBenchReport {
    pub m_bits: u64,
    pub n: u64,
    pub repetitions: u32,
    pub phases: Vec<BenchPhase>,
    /// True when the faster side is the same across every repetition,
    /// for insert and query separately.
    pub rank_stable: bool,
}

pub const BENCH_CSV_HEADER: &str = "filter,phase,median_ns_per_op,reps_ns_per_op";

impl ModuloBenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(BENCH_CSV_HEADER);
        out.push('\n');
        for p in &self.phases {
            let reps = p
                .ns_per_op
                .iter()
                .map(|v| format!("{v:.1}"))
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{:.1},{}\n",
                p.filter, p.phase, p.median_ns_per_op, reps
            ));
        }
        out
    }

    pub fn median(&self, filter: &str, phase: &str) -> Option<f64> {
        self.phases
            .iter()
            .find(|p| p.filter == filter && p.phase == phase)
            .map(|p| p.median_ns_per_op)
    }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// Builds both filter kinds at length `m_bits`, inserts and queries the
/// same element stream `repetitions` times, and reports per-op medians.
/// A warm-up round is run first and discarded. Report only: whether the
/// block filter is faster is left to the reader.
pub fn run_modulo_bench(
    m_bits: u64,
    n: u64,
    repetitions: u32,
    seed: u64,
) -> Result<ModuloBenchReport> {
    if m_bits.is_power_of_two() {
        return Err(Error::InvalidSpec(format!(
            "length {m_bits} is a power of two; the modulo comparison needs a non-power-of-two length"
        )));
    }
    if n == 0 {
        return Err(Error::ZeroElements);
    }
    if repetitions == 0 {
        return Err(Error::InvalidSpec("need at least one repetition".into()));
    }

    let k_std = analysis::optimal_k(m_bits, n)?.round().max(1.0) as u32;
    let elements = oracle::random_elements(seed, n as usize);

    let mut std_insert = Vec::new();
    let mut std_query = Vec::new();
    let mut blk_insert = Vec::new();
    let mut blk_query = Vec::new();

    // Round 0 is the warm-up and is discarded.
    for round in 0..=repetitions {
        let mut standard =
            StandardBloomFilter::new(m_bits, k_std, HashSeed(seed), IndexMode::GenericModulo)?;
        let mut block = VsbBloomFilter::new(m_bits, n, HashSeed(seed))?;

        let t = Instant::now();
        for e in &elements {
            standard.insert(e);
        }
        let std_ins = t.elapsed().as_nanos() as f64 / n as f64;

        let t = Instant::now();
        for e in &elements {
            block.insert(e);
        }
        let blk_ins = t.elapsed().as_nanos() as f64 / n as f64;

        let t = Instant::now();
        let mut hits = 0usize;
        for e in &elements {
            hits += standard.query(e) as usize;
        }
        let std_qry = t.elapsed().as_nanos() as f64 / n as f64;

        let t = Instant::now();
        for e in &elements {
            hits += block.query(e) as usize;
        }
        let blk_qry = t.elapsed().as_nanos() as f64 / n as f64;
        assert_eq!(hits, 2 * elements.len(), "false negative during bench");

        if round > 0 {
            std_insert.push(std_ins);
            blk_insert.push(blk_ins);
            std_query.push(std_qry);
            blk_query.push(blk_qry);
        }
    }

    let insert_stable = std_insert
        .iter()
        .zip(&blk_insert)
        .map(|(s, b)| s > b)
        .collect::<std::collections::HashSet<bool>>()
        .len()
        == 1;
    let query_stable = std_query
        .iter()
        .zip(&blk_query)
        .map(|(s, b)| s > b)
        .collect::<std::collections::HashSet<bool>>()
        .len()
        == 1;

    let phase = |filter: &'static str, phase: &'static str, ns: Vec<f64>| BenchPhase {
        filter,
        phase,
        median_ns_per_op: median(&ns),
        ns_per_op: ns,
    };
    Ok(ModuloBenchReport {
        m_bits,
        n,
        repetitions,
        phases: vec![
            phase("standard-modulo", "insert", std_insert),
            phase("standard-modulo", "query", std_query),
            phase("vsbbf", "insert", blk_insert),
            phase("vsbbf", "query", blk_query),
        ],
        rank_stable: insert_stable && query_stable,
    })
}

/// Reads a newline-delimited token file; each line's bytes (without the
/// newline) are one element.
pub fn read_tokens(path: impl AsRef<Path>) -> Result<Vec<Vec<u8>>> {
    let content = std::fs::read(path)?;
    Ok(content
        .split(|&b| b == b'\n')
        .filter(|line| !line.is_empty())
        .map(|line| line.to_vec())
        .collect())
}
