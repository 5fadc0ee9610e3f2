use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use flexbloom::experiment::{self, FilterKind, KChoice, SweepGrid, DEFAULT_NEGATIVES};
use flexbloom::format::{self, AnyFilter};
use flexbloom::hash::HashSeed;
use flexbloom::vsbbf::{BlockLayout, VsbBloomFilter};
use flexbloom::{analysis, oracle, Filter};

#[derive(Parser)]
#[command(
    name = "flexbloom",
    version,
    about = "Bloom filters with rational hash counts and arbitrary lengths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a filter from an element file (or a generated stream) and
    /// write it to a filter file.
    Build {
        /// Filter kind: standard, rational or vsbbf.
        #[arg(long)]
        kind: FilterKind,
        /// Filter length in bits (any length for vsbbf and
        /// generic-modulo standard filters).
        #[arg(long)]
        m: u64,
        /// Planned element count. Defaults to the number of input
        /// elements; also the generated-element count without --input.
        #[arg(long)]
        n: Option<u64>,
        /// Hash count: a number or "optimal". Block filters always
        /// derive per-block counts from (m, n).
        #[arg(long, default_value = "optimal")]
        k: KChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Newline-delimited element tokens; omitted means generate
        /// --n random elements from the seed.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Destination filter file.
        #[arg(long)]
        output: PathBuf,
        /// Reject lengths whose decomposition has a block smaller than
        /// this (vsbbf only).
        #[arg(long)]
        min_block: Option<u64>,
    },
    /// Query a filter file with newline-delimited probe tokens; prints
    /// one "token<TAB>present|absent" line per probe.
    Query {
        /// Filter file produced by build.
        #[arg(long)]
        filter: PathBuf,
        /// Probe token file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a parameter sweep over n and k and emit one CSV row per grid
    /// point and repetition.
    Sweep {
        #[arg(long)]
        kind: FilterKind,
        #[arg(long)]
        m: u64,
        /// Element counts: single value, comma list, or start:stop:step.
        #[arg(long)]
        n: String,
        /// Hash counts: number or "optimal", comma list, or
        /// start:stop:step.
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = DEFAULT_NEGATIVES)]
        negatives: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time a generic-modulo standard filter against a block filter of
    /// the same non-power-of-two length (report only).
    Bench {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 5)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the power-of-two block table of a filter length.
    Decompose {
        #[arg(long)]
        m: u64,
        /// Also derive the per-block hash counts for this set size.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        min_block: Option<u64>,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Build {
            kind,
            m,
            n,
            k,
            seed,
            input,
            output,
            min_block,
        } => build(kind, m, n, k, seed, input, output, min_block),
        Command::Query { filter, input } => query(filter, input),
        Command::Sweep {
            kind,
            m,
            n,
            k,
            negatives,
            seed,
            reps,
            output,
        } => sweep(kind, m, &n, &k, negatives, seed, reps, output),
        Command::Bench {
            m,
            n,
            reps,
            seed,
            output,
        } => bench(m, n, reps, seed, output),
        Command::Decompose { m, n, min_block } => decompose(m, n, min_block),
    }
}

#[allow(clippy::too_many_arguments)]
fn build(
    kind: FilterKind,
    m: u64,
    n: Option<u64>,
    k: KChoice,
    seed: u64,
    input: Option<PathBuf>,
    output: PathBuf,
    min_block: Option<u64>,
) -> anyhow::Result<()> {
    let elements = match &input {
        Some(path) => experiment::read_tokens(path)
            .with_context(|| format!("reading elements from {}", path.display()))?,
        None => {
            let count = n.context("--n is required when generating elements")?;
            oracle::random_elements(seed, count as usize)
        }
    };
    if elements.is_empty() {
        bail!("no elements to insert");
    }
    let planned_n = n.unwrap_or(elements.len() as u64);

    let mut filter: AnyFilter = match kind {
        FilterKind::Vsbbf => {
            if let KChoice::Fixed(v) = k {
                bail!("block filters derive per-block hash counts from (m, n); --k {v} is not applicable");
            }
            VsbBloomFilter::with_min_block(m, planned_n, HashSeed(seed), min_block)?.into()
        }
        _ => {
            if min_block.is_some() {
                bail!("--min-block only applies to vsbbf filters");
            }
            let k_eff = experiment::effective_k(kind, m, planned_n, k)?;
            experiment::build_filter(kind, m, planned_n, k_eff, seed)?
        }
    };
    for e in &elements {
        filter.insert(e);
    }
    format::save(&filter, &output)
        .with_context(|| format!("writing filter to {}", output.display()))?;

    println!(
        "kind={} m={} n={} k={:.6} foz={:.6}",
        filter.kind_name(),
        filter.m(),
        planned_n,
        filter.k(),
        filter.fraction_of_zeros()
    );
    if let AnyFilter::Block(b) = &filter {
        let sizes: Vec<String> = b
            .layout()
            .blocks()
            .iter()
            .map(|blk| blk.size_bits.to_string())
            .collect();
        println!("blocks=[{}]", sizes.join(","));
        if elements.len() as u64 > b.planned_n() {
            eprintln!(
                "warning: inserted {} elements into a filter planned for {} (over-filled)",
                elements.len(),
                b.planned_n()
            );
        }
    }
    Ok(())
}

fn query(filter_path: PathBuf, probe_path: PathBuf) -> anyhow::Result<()> {
    let filter = format::load(&filter_path)
        .with_context(|| format!("loading filter {}", filter_path.display()))?;
    let probes = experiment::read_tokens(&probe_path)
        .with_context(|| format!("reading probes from {}", probe_path.display()))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for probe in &probes {
        let verdict = if filter.query(probe) {
            "present"
        } else {
            "absent"
        };
        out.write_all(probe)?;
        writeln!(out, "\t{verdict}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    kind: FilterKind,
    m: u64,
    n_spec: &str,
    k_spec: &str,
    negatives: u64,
    seed: u64,
    reps: u32,
    output: Option<PathBuf>,
) -> anyhow::Result<()> {
    let grid = SweepGrid {
        kind,
        m,
        n_values: experiment::parse_u64_list(n_spec)?,
        k_values: experiment::parse_k_values(k_spec)?,
        negatives,
        seed,
        repetitions: reps,
    };
    let rows = experiment::run_sweep(&grid)?;
    match output {
        Some(path) => {
            let file = std::fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            experiment::write_csv(std::io::BufWriter::new(file), &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => experiment::write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn bench(m: u64, n: u64, reps: u32, seed: u64, output: Option<PathBuf>) -> anyhow::Result<()> {
    let report = experiment::run_modulo_bench(m, n, reps, seed)?;
    let csv = report.to_csv();
    match output {
        Some(path) => {
            std::fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{csv}"),
    }
    if report.rank_stable {
        eprintln!("ranking stable across {} repetitions", report.repetitions);
    } else {
        eprintln!(
            "warning: ranking not stable across {} repetitions (noisy measurement)",
            report.repetitions
        );
    }
    Ok(())
}

fn decompose(m: u64, n: Option<u64>, min_block: Option<u64>) -> anyhow::Result<()> {
    // n = 1 makes the layout builder accept any length when no set size
    // is given; the hash-count column is only shown with a real n.
    let layout = BlockLayout::build_with_min_block(m, n.unwrap_or(1), min_block)?;
    let total = layout.total_bits() as f64;
    if n.is_some() {
        println!("block\tsize\toffset\tk_j\tprefix_ratio");
    } else {
        println!("block\tsize\toffset\tprefix_ratio");
    }
    let mut prefix = 0u64;
    for (i, block) in layout.blocks().iter().enumerate() {
        prefix += block.size_bits;
        let ratio = prefix as f64 / total;
        if n.is_some() {
            println!(
                "{}\t{}\t{}\t{:.6}\t{:.6}",
                i + 1,
                block.size_bits,
                block.offset_bits,
                block.k,
                ratio
            );
        } else {
            println!(
                "{}\t{}\t{}\t{:.6}",
                i + 1,
                block.size_bits,
                block.offset_bits,
                ratio
            );
        }
    }
    if let Some(n) = n {
        println!(
            "k_total={:.6} (optimal for m={m} n={n}: {:.6})",
            layout.blocks().iter().map(|b| b.k).sum::<f64>(),
            analysis::optimal_k(m, n)?
        );
    }
    Ok(())
}
