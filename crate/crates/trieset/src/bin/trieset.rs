//! Command-line shell around the library: build a family of compressed
//! sets from a corpus, persist it, replay and benchmark query logs, print
//! certificates and space statistics.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! malformed input, failed query file, ...).

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use trieset::certify::{CertificateKind, IntervalLabel};
use trieset::family::{
    BenchBatchReport, BuildConfig, IngestOptions, QueryBatchReport, QueryLog, QueryOptions,
    SetFamily, TrieKind,
};
use trieset::bitvec::RankVariant;
use trieset::intersect::OutputMode;
use trieset::{Error, Result};

#[derive(Parser)]
#[command(
    name = "trieset",
    version,
    about = "Compressed integer-set families: build, query, measure"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a set family from a corpus and save it
    Build {
        /// Corpus file: `name: v1 v2 ...` per line, or binary (SETF)
        input: PathBuf,
        /// Where to write the family
        #[arg(short, long)]
        output: PathBuf,
        /// Set representation
        #[arg(long, value_enum, default_value_t = KindArg::Trie)]
        kind: KindArg,
        /// Rank directory density
        #[arg(long, value_enum, default_value_t = RankArg::Dense)]
        rank: RankArg,
        /// Also build deepest-level rank directories, enabling per-element
        /// rank queries at some extra space
        #[arg(long)]
        with_ranks: bool,
        /// Also sample select positions
        #[arg(long)]
        with_select: bool,
        /// Drop sets with fewer elements than this
        #[arg(long, default_value_t = 1)]
        min_size: u64,
        /// Universe override for text corpora, which otherwise use the
        /// smallest universe that fits
        #[arg(long)]
        universe: Option<u64>,
    },
    /// Print per-set and aggregate space measures of a family
    Stats {
        family: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Replay a query log: intersect each tuple of named sets
    Query {
        family: PathBuf,
        /// Log file: one query per line, whitespace-separated set names
        log: PathBuf,
        /// Result form the intersection produces
        #[arg(long, value_enum, default_value_t = ModeArg::Array)]
        mode: ModeArg,
        /// Threads per intersection; 0 uses all cores
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Also report certificate sizes per query
        #[arg(long)]
        certify: bool,
        /// Print the result elements
        #[arg(long)]
        dump: bool,
        /// Replay on a worker pool (faster, but per-query timings contend)
        #[arg(long)]
        parallel_queries: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print the minimum partition certificates for each query
    Certify {
        family: PathBuf,
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Time each query: discarded warmups, then the median of timed runs
    Bench {
        family: PathBuf,
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Array)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 3)]
        warmups: usize,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long)]
        parallel_queries: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// Plain binary tries
    Trie,
    /// Run-compressed tries
    Rtrie,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankArg {
    /// 25% overhead, fastest
    Dense,
    /// 6.25% overhead
    Sparse,
    /// 12.5% overhead, one cache line per block
    Interleaved,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Emit the elements
    Array,
    /// Assemble the result as a trie
    Trie,
}

impl From<KindArg> for TrieKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Trie => TrieKind::Plain,
            KindArg::Rtrie => TrieKind::Run,
        }
    }
}

impl From<RankArg> for RankVariant {
    fn from(r: RankArg) -> Self {
        match r {
            RankArg::Dense => RankVariant::Dense,
            RankArg::Sparse => RankVariant::Sparse,
            RankArg::Interleaved => RankVariant::Interleaved,
        }
    }
}

impl From<ModeArg> for OutputMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Array => OutputMode::Elements,
            ModeArg::Trie => OutputMode::Trie,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version also arrive here; they are not failures.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Build {
            input,
            output,
            kind,
            rank,
            with_ranks,
            with_select,
            min_size,
            universe,
        } => {
            let opts = IngestOptions {
                config: BuildConfig {
                    kind: kind.into(),
                    rank_variant: rank.into(),
                    with_ranks,
                    select_samples: with_select,
                },
                min_size,
                universe,
            };
            let family = ingest(&input, &opts)?;
            let mut w = BufWriter::new(create(&output)?);
            family.save(&mut w)?;
            w.flush()?;
            println!(
                "built {} sets over universe {} ({}) -> {} ({} bytes)",
                family.len(),
                family.universe(),
                family.kind().as_str(),
                output.display(),
                family.wire_len()
            );
            Ok(())
        }
        Cmd::Stats { family, json } => {
            let family = load_family(&family)?;
            let report = family.report();
            if json {
                println!("{}", json_pretty(&report));
            } else {
                print_stats(&report);
            }
            Ok(())
        }
        Cmd::Query {
            family,
            log,
            mode,
            threads,
            certify,
            dump,
            parallel_queries,
            json,
        } => {
            let family = load_family(&family)?;
            let log = load_log(&log)?;
            let opts = QueryOptions {
                mode: mode.into(),
                threads,
                certify,
                dump,
                parallel: parallel_queries,
            };
            let report = family.run_queries(&log, &opts);
            if json {
                println!("{}", json_pretty(&report));
            } else {
                print_queries(&report);
            }
            Ok(())
        }
        Cmd::Certify { family, log, json } => {
            let family = load_family(&family)?;
            let log = load_log(&log)?;
            let rows = certify_rows(&family, &log);
            if json {
                println!("{}", json_pretty(&rows));
            } else {
                print_certificates(&rows);
            }
            Ok(())
        }
        Cmd::Bench {
            family,
            log,
            mode,
            threads,
            warmups,
            runs,
            parallel_queries,
            json,
        } => {
            let family = load_family(&family)?;
            let log = load_log(&log)?;
            let opts = QueryOptions {
                mode: mode.into(),
                threads,
                certify: false,
                dump: false,
                parallel: parallel_queries,
            };
            let report = family.bench_queries(&log, &opts, warmups, runs);
            if json {
                println!("{}", json_pretty(&report));
            } else {
                print_bench(&report, runs);
            }
            Ok(())
        }
    }
}

/// Opens with the path in the error message; a bare "No such file or
/// directory" helps nobody.
fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| at_path(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| at_path(path, e))
}

fn at_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn ingest(path: &Path, opts: &IngestOptions) -> Result<SetFamily> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(b"SETF") {
        SetFamily::ingest_binary(Cursor::new(bytes), opts)
    } else {
        SetFamily::ingest_text(Cursor::new(bytes), &path.display().to_string(), opts)
    }
}

fn load_family(path: &Path) -> Result<SetFamily> {
    SetFamily::load(BufReader::new(open(path)?))
}

fn load_log(path: &Path) -> Result<QueryLog> {
    QueryLog::parse(BufReader::new(open(path)?))
}

fn json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize cleanly")
}

fn print_stats(report: &trieset::family::FamilyReport) {
    println!(
        "universe {}  kind {}  rank {}  sets {}  elements {}",
        report.universe,
        report.kind,
        report.rank_variant,
        report.totals.sets,
        report.totals.elements
    );
    let name_w = report
        .sets
        .iter()
        .map(|s| s.name.len())
        .max()
        .unwrap_or(0)
        .max("TOTAL".len());
    println!(
        "{:<name_w$} {:>10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}",
        "set", "n", "gap", "rle", "trie", "rtrie", "binom", "stored", "bytes"
    );
    for s in &report.sets {
        println!(
            "{:<name_w$} {:>10} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>10}",
            s.name,
            s.n,
            s.bpi_gap,
            s.bpi_rle,
            s.bpi_trie,
            s.bpi_rtrie,
            s.bpi_binom,
            s.bpi_stored,
            s.wire_bytes
        );
    }
    let t = &report.totals;
    println!(
        "{:<name_w$} {:>10} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>10}",
        "TOTAL",
        t.elements,
        t.bpi_gap,
        t.bpi_rle,
        t.bpi_trie,
        t.bpi_rtrie,
        t.bpi_binom,
        t.bpi_stored,
        t.file_bytes
    );
    println!("(space columns are bits per integer; bytes are serialized sizes)");
}

fn print_queries(report: &QueryBatchReport) {
    for row in &report.rows {
        let q = row.names.join(" ");
        match &row.error {
            Some(e) => println!("{q} -> error: {e}"),
            None => {
                let mut line = format!(
                    "{q} -> {} elements in {} ns  visited={} expanded={} rank1={}",
                    row.size,
                    row.ns,
                    row.stats.nodes_visited,
                    row.stats.expanded_nodes,
                    row.stats.rank1_calls
                );
                if let (Some(d), Some(x)) = (row.delta, row.xi) {
                    line.push_str(&format!("  delta={d} xi={x}"));
                }
                println!("{line}");
                if let Some(elems) = &row.elements {
                    let rendered: Vec<String> = elems.iter().map(u64::to_string).collect();
                    println!("  {}", rendered.join(" "));
                }
            }
        }
    }
    let s = &report.summary;
    println!(
        "summary: {} queries, {} errors, total size {}, mean {} ns, p50 {} ns, p90 {} ns, p99 {} ns",
        s.queries, s.errors, s.total_size, s.mean_ns, s.p50_ns, s.p90_ns, s.p99_ns
    );
}

fn print_bench(report: &BenchBatchReport, runs: usize) {
    for row in &report.rows {
        let q = row.names.join(" ");
        match &row.error {
            Some(e) => println!("{q} -> error: {e}"),
            None => println!(
                "{q} -> {} elements, median {} ns over {runs} runs  visited={} rank1={}",
                row.size, row.median_ns, row.stats.nodes_visited, row.stats.rank1_calls
            ),
        }
    }
    let s = &report.summary;
    println!(
        "summary: {} queries, {} errors, mean median {} ns, p50 {} ns, p90 {} ns, p99 {} ns",
        s.queries, s.errors, s.mean_ns, s.p50_ns, s.p90_ns, s.p99_ns
    );
}

#[derive(Serialize)]
struct IntervalRow {
    lo: u64,
    hi: u64,
    /// "members", or the name of the set that proves the interval empty.
    label: String,
}

#[derive(Serialize)]
struct CertifyRow {
    names: Vec<String>,
    error: Option<String>,
    /// Elements in the intersection.
    size: u64,
    delta: u64,
    xi: u64,
    delta_intervals: Vec<IntervalRow>,
    xi_intervals: Vec<IntervalRow>,
}

fn certify_rows(family: &SetFamily, log: &QueryLog) -> Vec<CertifyRow> {
    log.queries
        .iter()
        .map(|names| {
            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let both = family
                .certify(&refs, CertificateKind::Alternation)
                .and_then(|d| {
                    family
                        .certify(&refs, CertificateKind::RunAlternation)
                        .map(|x| (d, x))
                });
            match both {
                Ok((delta, xi)) => CertifyRow {
                    names: names.clone(),
                    error: None,
                    size: delta.member_count(),
                    delta: delta.len() as u64,
                    xi: xi.len() as u64,
                    delta_intervals: interval_rows(&delta.intervals, names),
                    xi_intervals: interval_rows(&xi.intervals, names),
                },
                Err(e) => CertifyRow {
                    names: names.clone(),
                    error: Some(e.to_string()),
                    size: 0,
                    delta: 0,
                    xi: 0,
                    delta_intervals: Vec::new(),
                    xi_intervals: Vec::new(),
                },
            }
        })
        .collect()
}

fn interval_rows(
    intervals: &[(trieset::certify::Interval, IntervalLabel)],
    names: &[String],
) -> Vec<IntervalRow> {
    intervals
        .iter()
        .map(|(iv, label)| IntervalRow {
            lo: iv.lo,
            hi: iv.hi,
            label: match label {
                IntervalLabel::Members => "members".to_string(),
                IntervalLabel::Eliminated { witness } => names[*witness].clone(),
            },
        })
        .collect()
}

fn print_certificates(rows: &[CertifyRow]) {
    for row in rows {
        let q = row.names.join(" ");
        match &row.error {
            Some(e) => println!("{q} -> error: {e}"),
            None => {
                println!(
                    "{q} -> delta={} xi={} size={}",
                    row.delta, row.xi, row.size
                );
                for iv in &row.xi_intervals {
                    let why = if iv.label == "members" {
                        "members".to_string()
                    } else {
                        format!("empty in {}", iv.label)
                    };
                    println!("  [{}..{}] {why}", iv.lo, iv.hi);
                }
            }
        }
    }
}
