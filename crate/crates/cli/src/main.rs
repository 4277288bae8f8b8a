//! `dpt` command line tool: build an index over a corpus file, run
//! pattern files against it, and benchmark the trie index against the
//! suffix-array baseline.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dpt_core::dsa::DsaIndex;
use dpt_core::report::{space_report, DEFAULT_POS_WIDTH};
use dpt_core::sim::LedgerRow;
use dpt_core::{
    load_index, save_index, Backing, DptConfig, DptIndex, Query, QueryKind, QueryValue, Text,
};

#[derive(Parser)]
#[command(name = "dpt", version, about = "Distributed Patricia trie text index")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an index over a corpus file and write it to disk.
    Build(BuildArgs),
    /// Answer a file of patterns (one per line) against a saved index.
    Query(QueryArgs),
    /// Emit a CSV comparing the trie index and the suffix-array baseline.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackingArg {
    Pointer,
    Louds,
    Dfuds,
    Bp,
}

impl BackingArg {
    fn to_backing(self) -> Backing {
        match self {
            BackingArg::Pointer => Backing::Pointer,
            BackingArg::Louds => Backing::Louds,
            BackingArg::Dfuds => Backing::Dfuds,
            BackingArg::Bp => Backing::Bp,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BackingArg::Pointer => "pointer",
            BackingArg::Louds => "louds",
            BackingArg::Dfuds => "dfuds",
            BackingArg::Bp => "bp",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Exists,
    Count,
    Enum,
}

impl KindArg {
    fn to_kind(self) -> QueryKind {
        match self {
            KindArg::Exists => QueryKind::Exists,
            KindArg::Count => QueryKind::Count,
            KindArg::Enum => QueryKind::Enumerate,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Corpus file; any bytes except 0x00.
    corpus: PathBuf,
    /// Where to write the index file.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pe_count: usize,
    /// Longest supported pattern; also the text padding per block.
    #[arg(long, default_value_t = 30)]
    pmax: usize,
    #[arg(long, value_enum, default_value_t = BackingArg::Louds)]
    backing: BackingArg,
    /// Resolve at most this many remote branching labels per superstep.
    #[arg(long)]
    label_batch: Option<usize>,
    /// Ledger cost per communicated word (G).
    #[arg(long, default_value_t = 1)]
    word_cost: u64,
    /// Ledger cost per barrier (L).
    #[arg(long, default_value_t = 1)]
    barrier_cost: u64,
}

#[derive(Args)]
struct QueryArgs {
    index: PathBuf,
    /// Pattern file, one pattern per line (raw bytes, newline-delimited).
    queries: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Count)]
    kind: KindArg,
    /// Seed for drawing each pattern's arrival PE.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    word_cost: u64,
    #[arg(long, default_value_t = 1)]
    barrier_cost: u64,
}

#[derive(Args)]
struct BenchArgs {
    corpus: PathBuf,
    /// Machine sizes to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pe_counts: Vec<usize>,
    /// Patterns drawn per PE; 0 emits build-only rows.
    #[arg(long, default_value_t = 16)]
    q_per_pe: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Count)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = BackingArg::Louds)]
    backing: BackingArg,
    /// Pruned prefix length for the suffix-array baseline.
    #[arg(long, default_value_t = 5)]
    prune_len: usize,
    #[arg(long)]
    label_batch: Option<usize>,
    #[arg(long, default_value_t = 30)]
    pmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    word_cost: u64,
    #[arg(long, default_value_t = 1)]
    barrier_cost: u64,
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Query(a) => cmd_query(a),
        Cmd::Bench(a) => cmd_bench(a),
    }
}

fn read_text(path: &PathBuf) -> Result<Text> {
    let raw = fs::read(path).with_context(|| format!("reading corpus {}", path.display()))?;
    Text::from_raw(&raw).with_context(|| format!("corpus {}", path.display()))
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let text = read_text(&a.corpus)?;
    let cfg = DptConfig {
        c: a.pe_count,
        pmax: a.pmax,
        backing: a.backing.to_backing(),
        label_batch: a.label_batch,
        g: a.word_cost,
        l: a.barrier_cost,
    };
    let ix = DptIndex::build(&text, &cfg).context("building index")?;
    fs::write(&a.out, save_index(&ix))
        .with_context(|| format!("writing index {}", a.out.display()))?;
    eprintln!(
        "built: n={} c={} backing={} supersteps={} file={}",
        text.raw_len(),
        a.pe_count,
        a.backing.name(),
        ix.build_supersteps(),
        a.out.display()
    );
    print!("{}", ix.machine().ledger.to_tsv());
    Ok(())
}

/// Splits a pattern file into lines, keeping interior empty lines (they
/// surface as per-line errors) but not a trailing newline's empty tail.
fn split_patterns(data: &[u8]) -> Vec<&[u8]> {
    let mut lines: Vec<&[u8]> = data.split(|&b| b == b'\n').collect();
    if data.is_empty() || data.ends_with(b"\n") {
        lines.pop();
    }
    lines
}

fn cmd_query(a: QueryArgs) -> Result<()> {
    let bytes =
        fs::read(&a.index).with_context(|| format!("reading index {}", a.index.display()))?;
    let mut ix = load_index(&bytes, a.word_cost, a.barrier_cost)
        .with_context(|| format!("index {}", a.index.display()))?;
    let qdata =
        fs::read(&a.queries).with_context(|| format!("reading queries {}", a.queries.display()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let c = ix.pe_count();
    let queries: Vec<Query> = split_patterns(&qdata)
        .iter()
        .map(|p| Query {
            kind: a.kind.to_kind(),
            pattern: p.to_vec(),
            arrival_pe: rng.gen_range(0..c),
        })
        .collect();

    let outcome = ix.run_batch(&queries);
    let mut out = String::new();
    for r in &outcome.results {
        match &r.value {
            Ok(QueryValue::Exists(b)) => out.push_str(&format!("EXISTS {b}\n")),
            Ok(QueryValue::Count(n)) => out.push_str(&format!("COUNT {n}\n")),
            Ok(QueryValue::Enumerate(ps)) => {
                out.push_str("ENUM");
                for (i, p) in ps.iter().enumerate() {
                    out.push(if i == 0 { ' ' } else { ',' });
                    out.push_str(&p.to_string());
                }
                out.push('\n');
            }
            Err(e) => out.push_str(&format!("ERROR {e}\n")),
        }
    }
    out.push_str(&ix.machine().ledger.to_tsv());
    out.push_str("pe\treceived\n");
    for (pe, n) in outcome.received_histogram.iter().enumerate() {
        out.push_str(&format!("{pe}\t{n}\n"));
    }
    print!("{out}");
    Ok(())
}

/// Random corpus substrings, occasionally mutated so some are absent.
fn draw_patterns(text: &Text, count: usize, pmax: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    let n = text.raw_len();
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=pmax.min(12).min(n));
            let start = rng.gen_range(0..=n - len);
            let mut p = text.bytes()[start..start + len].to_vec();
            if rng.gen_ratio(1, 4) {
                let i = rng.gen_range(0..p.len());
                p[i] = p[i].wrapping_add(rng.gen_range(1..=255)).max(1);
            }
            p
        })
        .collect()
}

struct RowStats {
    supersteps: usize,
    total_words: u64,
    max_pe_words: u64,
    fetches: u64,
}

fn sum_rows(rows: &[LedgerRow], fetches: u64, supersteps: usize) -> RowStats {
    RowStats {
        supersteps,
        total_words: rows.iter().map(|r| r.one_sided + r.collective + r.p2p).sum(),
        max_pe_words: rows.iter().map(|r| r.h).sum(),
        fetches,
    }
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let text = read_text(&a.corpus)?;
    let mut out = String::from(
        "c,index,backing,supersteps,total_words,max_pe_words,remote_fetches,bits_per_char\n",
    );
    for &c in &a.pe_counts {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed.wrapping_add(c as u64));
        let patterns = draw_patterns(&text, a.q_per_pe * c, a.pmax, &mut rng);
        let queries: Vec<Query> = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| Query {
                kind: a.kind.to_kind(),
                pattern: p.clone(),
                arrival_pe: i / a.q_per_pe.max(1) % c,
            })
            .collect();

        let cfg = DptConfig {
            c,
            pmax: a.pmax,
            backing: a.backing.to_backing(),
            label_batch: a.label_batch,
            g: a.word_cost,
            l: a.barrier_cost,
        };
        let mut ix = DptIndex::build(&text, &cfg).context("building index")?;
        let bits = space_report(&ix, DEFAULT_POS_WIDTH).bits_per_char();
        let stats = if queries.is_empty() {
            let ops = ix.machine().drma_ops();
            sum_rows(&ix.machine().ledger.rows, ops, ix.build_supersteps())
        } else {
            let rows_before = ix.machine().ledger.rows.len();
            let ops_before = ix.machine().drma_ops();
            let outcome = ix.run_batch(&queries);
            sum_rows(
                &ix.machine().ledger.rows[rows_before..],
                ix.machine().drma_ops() - ops_before,
                outcome.supersteps,
            )
        };
        push_row(&mut out, c, "dpt", a.backing.name(), &stats, bits);

        // The baseline answers counting queries only; it runs the same
        // patterns as counts whatever kind the trie rows used.
        let mut dsa = DsaIndex::build(&text, c, a.prune_len, a.word_cost, a.barrier_cost)
            .context("building baseline")?;
        let n1 = ix.machine().n_with_sentinel();
        let dsa_bits = n1 as f64 * (DEFAULT_POS_WIDTH as f64 + 8.0 * a.prune_len as f64)
            / text.raw_len() as f64;
        let stats = if queries.is_empty() {
            let ops = dsa.machine().drma_ops();
            sum_rows(&dsa.machine().ledger.rows, ops, dsa.build_supersteps())
        } else {
            let rows_before = dsa.machine().ledger.rows.len();
            let ops_before = dsa.machine().drma_ops();
            let mut worst = 0;
            for q in &queries {
                let (_, fs) = dsa.count(&q.pattern, q.arrival_pe);
                worst = worst.max(fs.supersteps);
            }
            sum_rows(
                &dsa.machine().ledger.rows[rows_before..],
                dsa.machine().drma_ops() - ops_before,
                worst,
            )
        };
        push_row(&mut out, c, "dsa", "sa", &stats, dsa_bits);
    }
    print!("{out}");
    Ok(())
}

fn push_row(out: &mut String, c: usize, index: &str, backing: &str, s: &RowStats, bits: f64) {
    out.push_str(&format!(
        "{c},{index},{backing},{},{},{},{},{bits:.2}\n",
        s.supersteps, s.total_words, s.max_pe_words, s.fetches
    ));
}
