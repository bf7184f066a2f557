//! Named families of compressed sets: ingest, persistence, query replay,
//! benchmarking, and space reporting.
//!
//! A [`SetFamily`] holds one trie per named set, all over the same
//! universe and all of the same kind (plain or run-compressed) with the
//! same directory options, so any group of members can be intersected
//! directly. Families are built from a text corpus (`name: v1 v2 ...`,
//! one set per line) or a binary one (`SETF`), saved to and loaded from a
//! single container file (`TFAM`), and queried through a [`QueryLog`] of
//! name tuples. Replay and bench runs never abort on a bad query; the
//! offending row carries the error and the run continues.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use serde::Serialize;

use crate::bintrie::{BinaryTrie, BuildOptions};
use crate::bitvec::RankVariant;
use crate::certify::{compute_delta, compute_xi, Certificate, CertificateKind};
use crate::intersect::{Intersection, OutputMode, TraversalStats};
use crate::measures::{
    binom_bound, gap_measure, rle_measure, rtrie_measure, trie_measure, SortedSet,
};
use crate::parallel::{par_intersect, par_intersect_runs};
use crate::runtrie::RunTrie;
use crate::{Error, Result};

const FAMILY_MAGIC: [u8; 4] = *b"TFAM";
const FAMILY_VERSION: u16 = 1;
const SETS_MAGIC: [u8; 4] = *b"SETF";

/// Which representation a family stores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrieKind {
    /// Plain binary tries; every element is a distinct leaf.
    Plain,
    /// Run tries; maximal full subtrees collapse to a single `00` node.
    Run,
}

impl TrieKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrieKind::Plain => "trie",
            TrieKind::Run => "rtrie",
        }
    }

    fn tag(self) -> u8 {
        match self {
            TrieKind::Plain => 0,
            TrieKind::Run => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(TrieKind::Plain),
            1 => Ok(TrieKind::Run),
            _ => Err(Error::Format {
                what: "family header",
                detail: format!("unknown kind tag {tag}"),
            }),
        }
    }
}

fn variant_name(v: RankVariant) -> &'static str {
    match v {
        RankVariant::Dense => "dense",
        RankVariant::Sparse => "sparse",
        RankVariant::Interleaved => "interleaved",
    }
}

/// How the member tries of a family are built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    pub kind: TrieKind,
    pub rank_variant: RankVariant,
    /// Rank directories on the deepest level, enabling per-element rank
    /// queries at extra space.
    pub with_ranks: bool,
    /// Select sampling on every level (plain tries only).
    pub select_samples: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            kind: TrieKind::Plain,
            rank_variant: RankVariant::Dense,
            with_ranks: false,
            select_samples: false,
        }
    }
}

impl BuildConfig {
    fn trie_options(&self) -> BuildOptions {
        BuildOptions {
            rank_variant: self.rank_variant,
            last_level_rank: self.with_ranks,
            select_samples: self.select_samples,
        }
    }
}

/// Knobs for corpus ingestion.
#[derive(Clone, Copy, Debug)]
pub struct IngestOptions {
    pub config: BuildConfig,
    /// Drop sets with fewer than this many elements. The default of 1
    /// keeps every nonempty set.
    pub min_size: u64,
    /// Universe override for text corpora, which otherwise infer the
    /// smallest universe holding every value. Binary corpora carry their
    /// universe in the header; an override must agree with it.
    pub universe: Option<u64>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            config: BuildConfig::default(),
            min_size: 1,
            universe: None,
        }
    }
}

/// One member of a family. Tries cannot represent the empty set, so an
/// empty member (possible when ingesting with `min_size` 0) is its own
/// variant.
#[derive(Clone, Debug)]
pub enum FamilyEntry {
    Empty,
    Plain(BinaryTrie),
    Run(RunTrie),
}

impl FamilyEntry {
    pub fn len(&self) -> u64 {
        match self {
            FamilyEntry::Empty => 0,
            FamilyEntry::Plain(t) => t.len(),
            FamilyEntry::Run(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn decode(&self) -> Vec<u64> {
        match self {
            FamilyEntry::Empty => Vec::new(),
            FamilyEntry::Plain(t) => t.decode(),
            FamilyEntry::Run(t) => t.decode(),
        }
    }

    pub fn payload_bits(&self) -> u64 {
        match self {
            FamilyEntry::Empty => 0,
            FamilyEntry::Plain(t) => t.payload_bits(),
            FamilyEntry::Run(t) => t.payload_bits(),
        }
    }

    pub fn dir_overhead_bits(&self) -> u64 {
        match self {
            FamilyEntry::Empty => 0,
            FamilyEntry::Plain(t) => t.dir_overhead_bits(),
            FamilyEntry::Run(t) => t.dir_overhead_bits(),
        }
    }

    /// Serialized size of the trie blob alone; 0 for the empty marker.
    pub fn blob_len(&self) -> usize {
        match self {
            FamilyEntry::Empty => 0,
            FamilyEntry::Plain(t) => t.wire_len(),
            FamilyEntry::Run(t) => t.wire_len(),
        }
    }

    fn write_blob<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        match self {
            FamilyEntry::Empty => Ok(()),
            FamilyEntry::Plain(t) => t.write_into(w),
            FamilyEntry::Run(t) => t.write_into(w),
        }
    }
}

/// A collection of named sets over one universe, ready for intersection.
#[derive(Clone, Debug)]
pub struct SetFamily {
    universe: u64,
    config: BuildConfig,
    names: Vec<String>,
    entries: Vec<FamilyEntry>,
    index: HashMap<String, usize>,
}

/// Everything an intersection run produces besides the result set itself.
#[derive(Clone, Debug)]
pub struct QueryAnswer {
    /// Number of elements in the intersection, in every output mode.
    pub size: u64,
    /// The elements themselves; present in element mode only.
    pub elements: Option<Vec<u64>>,
    /// Serialized size of the result trie; present in trie mode when the
    /// result is nonempty.
    pub trie_wire_bytes: Option<u64>,
    pub stats: TraversalStats,
}

impl SetFamily {
    /// Builds a family from already-validated sets. All sets must share
    /// one universe; names must be unique single tokens.
    pub fn from_sets(sets: Vec<(String, SortedSet)>, config: BuildConfig) -> Result<Self> {
        let universe = match sets.first() {
            Some((_, s)) => s.universe(),
            None => 2,
        };
        for (name, s) in &sets {
            if s.universe() != universe {
                return Err(Error::InvalidInput(format!(
                    "set {name} has universe {}, expected {universe}",
                    s.universe()
                )));
            }
        }
        Self::assemble(sets, universe, config)
    }

    fn assemble(
        sets: Vec<(String, SortedSet)>,
        universe: u64,
        config: BuildConfig,
    ) -> Result<Self> {
        if universe < 2 {
            return Err(Error::InvalidInput(format!(
                "universe must be at least 2, got {universe}"
            )));
        }
        let mut index = HashMap::with_capacity(sets.len());
        for (i, (name, _)) in sets.iter().enumerate() {
            check_name(name).map_err(Error::InvalidInput)?;
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate set name {name}")));
            }
        }
        let entries = build_entries(&sets, config)?;
        Ok(SetFamily {
            universe,
            config,
            names: sets.into_iter().map(|(name, _)| name).collect(),
            entries,
            index,
        })
    }

    /// Parses a text corpus: one set per line as `name: v1 v2 ...` with
    /// strictly increasing decimal values; blank lines and `#` comments
    /// are skipped. `label` names the source in error messages.
    pub fn ingest_text<R: BufRead>(r: R, label: &str, opts: &IngestOptions) -> Result<Self> {
        let parse = |line: usize, msg: String| Error::Parse {
            path: label.to_string(),
            line,
            msg,
        };
        let mut raw: Vec<(String, Vec<u64>, usize)> = Vec::new();
        let mut seen = HashSet::new();
        let mut max_value = None::<u64>;
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (name, rest) = text
                .split_once(':')
                .ok_or_else(|| parse(lineno, "expected `name: v1 v2 ...`".into()))?;
            let name = name.trim();
            check_name(name).map_err(|msg| parse(lineno, msg))?;
            if !seen.insert(name.to_string()) {
                return Err(parse(lineno, format!("duplicate set name {name}")));
            }
            let mut values = Vec::new();
            for tok in rest.split_whitespace() {
                let v: u64 = tok
                    .parse()
                    .map_err(|_| parse(lineno, format!("bad value {tok}")))?;
                values.push(v);
            }
            if let Some(&last) = values.last() {
                max_value = Some(max_value.map_or(last, |m: u64| m.max(last)));
            }
            raw.push((name.to_string(), values, lineno));
        }
        let universe = match opts.universe {
            Some(u) => u,
            None => max_value.map_or(2, |m| (m + 1).max(2)),
        };
        let mut sets = Vec::new();
        for (name, values, lineno) in raw {
            if (values.len() as u64) < opts.min_size {
                continue;
            }
            let set = SortedSet::new(values, universe)
                .map_err(|e| parse(lineno, format!("set {name}: {e}")))?;
            sets.push((name, set));
        }
        Self::assemble(sets, universe, opts.config)
    }

    /// Parses a binary corpus: magic `SETF`, u64 set count, u64 universe,
    /// then per set a u16-length name, u64 element count, and that many
    /// u32 little-endian values, strictly increasing.
    pub fn ingest_binary<R: Read>(mut r: R, opts: &IngestOptions) -> Result<Self> {
        let bad = |detail: String| Error::Format {
            what: "SETF corpus",
            detail,
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != SETS_MAGIC {
            return Err(bad(format!("bad magic {magic:?}")));
        }
        let count = read_u64(&mut r)?;
        let universe = read_u64(&mut r)?;
        if universe < 2 {
            return Err(bad(format!("universe must be at least 2, got {universe}")));
        }
        if let Some(u) = opts.universe {
            if u != universe {
                return Err(Error::InvalidInput(format!(
                    "universe override {u} disagrees with corpus universe {universe}"
                )));
            }
        }
        let mut sets = Vec::new();
        for _ in 0..count {
            let name = read_name(&mut r)?;
            check_name(&name).map_err(|msg| bad(msg))?;
            let n = read_u64(&mut r)?;
            let mut values = Vec::with_capacity((n as usize).min(1 << 20));
            let mut buf = [0u8; 4];
            for _ in 0..n {
                r.read_exact(&mut buf)?;
                values.push(u32::from_le_bytes(buf) as u64);
            }
            if (values.len() as u64) < opts.min_size {
                continue;
            }
            let set = SortedSet::new(values, universe)
                .map_err(|e| bad(format!("set {name}: {e}")))?;
            sets.push((name, set));
        }
        Self::assemble(sets, universe, opts.config)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn kind(&self) -> TrieKind {
        self.config.kind
    }

    pub fn config(&self) -> BuildConfig {
        self.config
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn entry(&self, i: usize) -> &FamilyEntry {
        &self.entries[i]
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSet(name.to_string()))
    }

    /// The elements of one member, decoded from its trie.
    pub fn decode_set(&self, name: &str) -> Result<Vec<u64>> {
        Ok(self.entries[self.position(name)?].decode())
    }

    /// Intersects the named members. Any empty member short-circuits to
    /// the empty answer. `threads == 0` uses all cores, 1 is sequential.
    pub fn intersect(
        &self,
        names: &[&str],
        mode: OutputMode,
        threads: usize,
    ) -> Result<QueryAnswer> {
        let idxs = self.prepare(names)?;
        self.resolved_intersect(&idxs, mode, threads)
    }

    /// Minimum certificate for the intersection of the named members,
    /// computed on their decoded element arrays.
    pub fn certify(&self, names: &[&str], kind: CertificateKind) -> Result<Certificate> {
        let idxs = self.prepare(names)?;
        let decoded: Vec<SortedSet> = idxs
            .iter()
            .map(|&i| SortedSet::new(self.entries[i].decode(), self.universe))
            .collect::<Result<_>>()?;
        let refs: Vec<&SortedSet> = decoded.iter().collect();
        match kind {
            CertificateKind::Alternation => compute_delta(&refs),
            CertificateKind::RunAlternation => compute_xi(&refs),
        }
    }

    fn prepare(&self, names: &[&str]) -> Result<Vec<usize>> {
        if names.len() < 2 {
            return Err(Error::TooFewSets);
        }
        names.iter().map(|n| self.position(n)).collect()
    }

    fn resolved_intersect(
        &self,
        idxs: &[usize],
        mode: OutputMode,
        threads: usize,
    ) -> Result<QueryAnswer> {
        if idxs.iter().any(|&i| self.entries[i].is_empty()) {
            return Ok(QueryAnswer {
                size: 0,
                elements: (mode == OutputMode::Elements).then(Vec::new),
                trie_wire_bytes: None,
                stats: TraversalStats::default(),
            });
        }
        match self.config.kind {
            TrieKind::Plain => {
                let tries: Vec<&BinaryTrie> = idxs
                    .iter()
                    .map(|&i| match &self.entries[i] {
                        FamilyEntry::Plain(t) => Ok(t),
                        _ => Err(Error::MixedTrieKinds),
                    })
                    .collect::<Result<_>>()?;
                let (res, stats) = par_intersect(&tries, mode, threads)?;
                Ok(match res {
                    Intersection::Elements(v) => QueryAnswer {
                        size: v.len() as u64,
                        elements: Some(v),
                        trie_wire_bytes: None,
                        stats,
                    },
                    Intersection::EmptyTrie => QueryAnswer {
                        size: 0,
                        elements: None,
                        trie_wire_bytes: None,
                        stats,
                    },
                    Intersection::Trie(t) => QueryAnswer {
                        size: t.len(),
                        elements: None,
                        trie_wire_bytes: Some(t.wire_len() as u64),
                        stats,
                    },
                })
            }
            TrieKind::Run => {
                let tries: Vec<&RunTrie> = idxs
                    .iter()
                    .map(|&i| match &self.entries[i] {
                        FamilyEntry::Run(t) => Ok(t),
                        _ => Err(Error::MixedTrieKinds),
                    })
                    .collect::<Result<_>>()?;
                let (res, stats) = par_intersect_runs(&tries, mode, threads)?;
                Ok(match res {
                    Intersection::Elements(v) => QueryAnswer {
                        size: v.len() as u64,
                        elements: Some(v),
                        trie_wire_bytes: None,
                        stats,
                    },
                    Intersection::EmptyTrie => QueryAnswer {
                        size: 0,
                        elements: None,
                        trie_wire_bytes: None,
                        stats,
                    },
                    Intersection::Trie(t) => QueryAnswer {
                        size: t.len(),
                        elements: None,
                        trie_wire_bytes: Some(t.wire_len() as u64),
                        stats,
                    },
                })
            }
        }
    }

    /// Serializes the family: header with kind, rank variant, directory
    /// flags, universe and member count, then per member its name and
    /// trie blob. The encoding is canonical.
    pub fn save<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&FAMILY_MAGIC)?;
        w.write_all(&FAMILY_VERSION.to_le_bytes())?;
        w.write_all(&[self.config.kind.tag()])?;
        w.write_all(&[self.config.rank_variant.tag()])?;
        let flags = self.config.with_ranks as u8 | (self.config.select_samples as u8) << 1;
        w.write_all(&[flags])?;
        w.write_all(&self.universe.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for (name, entry) in self.names.iter().zip(&self.entries) {
            w.write_all(&(name.len() as u16).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            let tag = if entry.is_empty() { 0u8 } else { 1u8 };
            w.write_all(&[tag])?;
            entry.write_blob(w)?;
        }
        Ok(())
    }

    /// Exact byte size [`SetFamily::save`] will produce.
    pub fn wire_len(&self) -> usize {
        let mut total = 4 + 2 + 1 + 1 + 1 + 8 + 8;
        for (name, entry) in self.names.iter().zip(&self.entries) {
            total += 2 + name.len() + 1 + entry.blob_len();
        }
        total
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let bad = |detail: String| Error::Format {
            what: "family container",
            detail,
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != FAMILY_MAGIC {
            return Err(bad(format!("bad magic {magic:?}")));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != FAMILY_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let mut b3 = [0u8; 3];
        r.read_exact(&mut b3)?;
        let kind = TrieKind::from_tag(b3[0])?;
        let rank_variant = RankVariant::from_tag(b3[1])?;
        if b3[2] & !0b11 != 0 {
            return Err(bad(format!("unknown flag bits {:#04x}", b3[2])));
        }
        let config = BuildConfig {
            kind,
            rank_variant,
            with_ranks: b3[2] & 1 != 0,
            select_samples: b3[2] & 2 != 0,
        };
        let universe = read_u64(&mut r)?;
        if universe < 2 {
            return Err(bad(format!("universe must be at least 2, got {universe}")));
        }
        let count = read_u64(&mut r)?;
        let mut names = Vec::new();
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for i in 0..count {
            let name = read_name(&mut r)?;
            check_name(&name).map_err(bad)?;
            if index.insert(name.clone(), i as usize).is_some() {
                return Err(bad(format!("duplicate set name {name}")));
            }
            let mut tag = [0u8; 1];
            r.read_exact(&mut tag)?;
            let entry = match tag[0] {
                0 => FamilyEntry::Empty,
                1 => match kind {
                    TrieKind::Plain => FamilyEntry::Plain(BinaryTrie::read_from(
                        &mut r,
                        config.with_ranks,
                        config.select_samples,
                    )?),
                    TrieKind::Run => {
                        FamilyEntry::Run(RunTrie::read_from(&mut r, config.with_ranks)?)
                    }
                },
                t => return Err(bad(format!("unknown entry tag {t}"))),
            };
            match &entry {
                FamilyEntry::Plain(t) if t.universe() != universe => {
                    return Err(bad(format!(
                        "set {name} has universe {}, family says {universe}",
                        t.universe()
                    )));
                }
                FamilyEntry::Run(t) if t.universe() != universe => {
                    return Err(bad(format!(
                        "set {name} has universe {}, family says {universe}",
                        t.universe()
                    )));
                }
                _ => {}
            }
            names.push(name);
            entries.push(entry);
        }
        Ok(SetFamily {
            universe,
            config,
            names,
            entries,
            index,
        })
    }

    /// Per-set and aggregate space measures, in raw bits and in bits per
    /// integer, reconciled against the exact serialized sizes.
    pub fn report(&self) -> FamilyReport {
        let mut sets = Vec::with_capacity(self.entries.len());
        let mut elements = 0u64;
        let mut sums = [0u64; 5];
        let mut payload = 0u64;
        let mut dirs = 0u64;
        let mut blob_bytes = 0u64;
        for (name, entry) in self.names.iter().zip(&self.entries) {
            let set = SortedSet::new(entry.decode(), self.universe)
                .expect("decoded members are sorted and in range");
            let n = set.len() as u64;
            let measures = [
                gap_measure(&set),
                rle_measure(&set),
                trie_measure(&set),
                rtrie_measure(&set),
                binom_bound(n, self.universe).expect("member size is at most the universe"),
            ];
            let row = SetReport {
                name: name.clone(),
                n,
                gap: measures[0],
                rle: measures[1],
                trie: measures[2],
                rtrie: measures[3],
                binom_bits: measures[4],
                payload_bits: entry.payload_bits(),
                dir_bits: entry.dir_overhead_bits(),
                stored_bits: entry.payload_bits() + entry.dir_overhead_bits(),
                wire_bytes: entry.blob_len() as u64,
                bpi_gap: bpi(measures[0], n),
                bpi_rle: bpi(measures[1], n),
                bpi_trie: bpi(measures[2], n),
                bpi_rtrie: bpi(measures[3], n),
                bpi_binom: bpi(measures[4], n),
                bpi_stored: bpi(entry.payload_bits() + entry.dir_overhead_bits(), n),
            };
            elements += n;
            for (acc, m) in sums.iter_mut().zip(measures) {
                *acc += m;
            }
            payload += row.payload_bits;
            dirs += row.dir_bits;
            blob_bytes += row.wire_bytes;
            sets.push(row);
        }
        FamilyReport {
            universe: self.universe,
            kind: self.config.kind.as_str().to_string(),
            rank_variant: variant_name(self.config.rank_variant).to_string(),
            with_ranks: self.config.with_ranks,
            select_samples: self.config.select_samples,
            sets,
            totals: FamilyTotals {
                sets: self.entries.len(),
                elements,
                payload_bits: payload,
                dir_bits: dirs,
                blob_bytes,
                file_bytes: self.wire_len() as u64,
                bpi_gap: bpi(sums[0], elements),
                bpi_rle: bpi(sums[1], elements),
                bpi_trie: bpi(sums[2], elements),
                bpi_rtrie: bpi(sums[3], elements),
                bpi_binom: bpi(sums[4], elements),
                bpi_stored: bpi(payload + dirs, elements),
            },
        }
    }

    /// Replays every query of the log, timing the intersection call of
    /// each. Failures become error rows; the run always completes.
    pub fn run_queries(&self, log: &QueryLog, opts: &QueryOptions) -> QueryBatchReport {
        let rows = self.map_queries(&log.queries, opts.parallel, |names| {
            self.run_one(names, opts)
        });
        let summary = summarize(rows.iter().map(|r| (r.error.is_none(), r.ns, r.size)));
        QueryBatchReport { rows, summary }
    }

    fn run_one(&self, names: &[String], opts: &QueryOptions) -> QueryRow {
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        match self.try_run_one(&refs, opts) {
            Ok(row) => QueryRow {
                names: names.to_vec(),
                ..row
            },
            Err(e) => QueryRow::failed(names.to_vec(), &e),
        }
    }

    fn try_run_one(&self, names: &[&str], opts: &QueryOptions) -> Result<QueryRow> {
        let idxs = self.prepare(names)?;
        let start = Instant::now();
        let mut answer = self.resolved_intersect(&idxs, opts.mode, opts.threads)?;
        let ns = start.elapsed().as_nanos() as u64;
        let (delta, xi) = if opts.certify {
            let decoded: Vec<SortedSet> = idxs
                .iter()
                .map(|&i| SortedSet::new(self.entries[i].decode(), self.universe))
                .collect::<Result<_>>()?;
            let refs: Vec<&SortedSet> = decoded.iter().collect();
            (
                Some(compute_delta(&refs)?.len() as u64),
                Some(compute_xi(&refs)?.len() as u64),
            )
        } else {
            (None, None)
        };
        let elements = if opts.dump {
            match answer.elements.take() {
                Some(v) => Some(v),
                None => Some(
                    self.resolved_intersect(&idxs, OutputMode::Elements, opts.threads)?
                        .elements
                        .unwrap_or_default(),
                ),
            }
        } else {
            None
        };
        Ok(QueryRow {
            names: Vec::new(),
            error: None,
            size: answer.size,
            ns,
            stats: answer.stats,
            delta,
            xi,
            elements,
        })
    }

    /// Benchmarks every query: `warmups` discarded passes, then the
    /// median over `runs` timed passes.
    pub fn bench_queries(
        &self,
        log: &QueryLog,
        opts: &QueryOptions,
        warmups: usize,
        runs: usize,
    ) -> BenchBatchReport {
        let runs = runs.max(1);
        let rows = self.map_queries(&log.queries, opts.parallel, |names| {
            self.bench_one(names, opts, warmups, runs)
        });
        let summary = summarize(rows.iter().map(|r| (r.error.is_none(), r.median_ns, r.size)));
        BenchBatchReport { rows, summary }
    }

    fn bench_one(
        &self,
        names: &[String],
        opts: &QueryOptions,
        warmups: usize,
        runs: usize,
    ) -> BenchRow {
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let idxs = match self.prepare(&refs) {
            Ok(idxs) => idxs,
            Err(e) => return BenchRow::failed(names.to_vec(), &e),
        };
        let mut last = None;
        let mut runs_ns = Vec::with_capacity(runs);
        for pass in 0..warmups + runs {
            let start = Instant::now();
            let answer = match self.resolved_intersect(&idxs, opts.mode, opts.threads) {
                Ok(a) => a,
                Err(e) => return BenchRow::failed(names.to_vec(), &e),
            };
            let ns = start.elapsed().as_nanos() as u64;
            if pass >= warmups {
                runs_ns.push(ns);
            }
            last = Some(answer);
        }
        let answer = last.expect("at least one timed pass runs");
        let mut sorted = runs_ns.clone();
        sorted.sort_unstable();
        BenchRow {
            names: names.to_vec(),
            error: None,
            size: answer.size,
            median_ns: sorted[sorted.len() / 2],
            runs_ns,
            stats: answer.stats,
        }
    }

    /// Runs `f` over the queries, in order or on a worker pool.
    fn map_queries<T: Send, F>(&self, queries: &[Vec<String>], parallel: bool, f: F) -> Vec<T>
    where
        F: Fn(&[String]) -> T + Sync,
    {
        let workers = if parallel {
            std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1)
                .min(queries.len().max(1))
        } else {
            1
        };
        if workers <= 1 {
            return queries.iter().map(|q| f(q)).collect();
        }
        let next = AtomicUsize::new(0);
        let mut slots: Vec<Option<T>> = Vec::new();
        slots.resize_with(queries.len(), || None);
        let done: Vec<(usize, T)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    scope.spawn(|| {
                        let mut out = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= queries.len() {
                                break;
                            }
                            out.push((i, f(&queries[i])));
                        }
                        out
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("query worker panicked"))
                .collect()
        });
        for (i, row) in done {
            slots[i] = Some(row);
        }
        slots
            .into_iter()
            .map(|s| s.expect("every query produced a row"))
            .collect()
    }
}

/// A replayable list of queries, each a tuple of set names.
#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    pub queries: Vec<Vec<String>>,
}

impl QueryLog {
    /// Parses one query per line, names separated by whitespace. Blank
    /// lines and `#` comments are skipped. Name resolution and arity are
    /// checked at replay time, per query.
    pub fn parse<R: BufRead>(r: R) -> Result<Self> {
        let mut queries = Vec::new();
        for line in r.lines() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            queries.push(text.split_whitespace().map(str::to_string).collect());
        }
        Ok(QueryLog { queries })
    }
}

/// Replay and bench settings.
#[derive(Clone, Copy, Debug)]
pub struct QueryOptions {
    pub mode: OutputMode,
    /// Threads per intersection; 0 uses all cores.
    pub threads: usize,
    /// Also compute certificate sizes per query (outside the timing).
    pub certify: bool,
    /// Carry result elements in the rows.
    pub dump: bool,
    /// Replay queries on a worker pool. Off by default: concurrent rows
    /// distort per-query timings.
    pub parallel: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            mode: OutputMode::Elements,
            threads: 1,
            certify: false,
            dump: false,
            parallel: false,
        }
    }
}

/// One replayed query.
#[derive(Clone, Debug, Serialize)]
pub struct QueryRow {
    pub names: Vec<String>,
    /// Why the query failed; the remaining fields are zero when set.
    pub error: Option<String>,
    pub size: u64,
    /// Wall time of the intersection call alone.
    pub ns: u64,
    pub stats: TraversalStats,
    pub delta: Option<u64>,
    pub xi: Option<u64>,
    pub elements: Option<Vec<u64>>,
}

impl QueryRow {
    fn failed(names: Vec<String>, e: &Error) -> Self {
        QueryRow {
            names,
            error: Some(e.to_string()),
            size: 0,
            ns: 0,
            stats: TraversalStats::default(),
            delta: None,
            xi: None,
            elements: None,
        }
    }
}

/// One benchmarked query.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub names: Vec<String>,
    pub error: Option<String>,
    pub size: u64,
    pub median_ns: u64,
    /// The individual timed passes, in execution order.
    pub runs_ns: Vec<u64>,
    pub stats: TraversalStats,
}

impl BenchRow {
    fn failed(names: Vec<String>, e: &Error) -> Self {
        BenchRow {
            names,
            error: Some(e.to_string()),
            size: 0,
            median_ns: 0,
            runs_ns: Vec::new(),
            stats: TraversalStats::default(),
        }
    }
}

/// Aggregates over one replay or bench run. Percentiles are nearest-rank
/// over the successful rows.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BatchSummary {
    pub queries: usize,
    pub errors: usize,
    pub total_size: u64,
    pub mean_ns: u64,
    pub p50_ns: u64,
    pub p90_ns: u64,
    pub p99_ns: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QueryBatchReport {
    pub rows: Vec<QueryRow>,
    pub summary: BatchSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchBatchReport {
    pub rows: Vec<BenchRow>,
    pub summary: BatchSummary,
}

/// Space measures of one member set.
#[derive(Clone, Debug, Serialize)]
pub struct SetReport {
    pub name: String,
    pub n: u64,
    pub gap: u64,
    pub rle: u64,
    pub trie: u64,
    pub rtrie: u64,
    pub binom_bits: u64,
    pub payload_bits: u64,
    pub dir_bits: u64,
    pub stored_bits: u64,
    pub wire_bytes: u64,
    pub bpi_gap: f64,
    pub bpi_rle: f64,
    pub bpi_trie: f64,
    pub bpi_rtrie: f64,
    pub bpi_binom: f64,
    pub bpi_stored: f64,
}

/// Family-wide sums; aggregate bpi is total bits over total elements.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyTotals {
    pub sets: usize,
    pub elements: u64,
    pub payload_bits: u64,
    pub dir_bits: u64,
    pub blob_bytes: u64,
    pub file_bytes: u64,
    pub bpi_gap: f64,
    pub bpi_rle: f64,
    pub bpi_trie: f64,
    pub bpi_rtrie: f64,
    pub bpi_binom: f64,
    pub bpi_stored: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub universe: u64,
    pub kind: String,
    pub rank_variant: String,
    pub with_ranks: bool,
    pub select_samples: bool,
    pub sets: Vec<SetReport>,
    pub totals: FamilyTotals,
}

fn bpi(bits: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        bits as f64 / n as f64
    }
}

fn check_name(name: &str) -> std::result::Result<(), String> {
    if name.is_empty() {
        return Err("empty set name".into());
    }
    if name.len() > u16::MAX as usize {
        return Err(format!("set name longer than {} bytes", u16::MAX));
    }
    if name.split_whitespace().count() != 1 {
        return Err(format!("set name {name:?} must be a single token"));
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_name<R: Read>(r: &mut R) -> Result<String> {
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let len = u16::from_le_bytes(b2) as usize;
    let mut bytes = vec![0u8; len];
    r.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|_| Error::Format {
        what: "set name",
        detail: "not valid UTF-8".into(),
    })
}

fn build_entries(sets: &[(String, SortedSet)], config: BuildConfig) -> Result<Vec<FamilyEntry>> {
    let build_one = |s: &SortedSet| -> Result<FamilyEntry> {
        if s.is_empty() {
            return Ok(FamilyEntry::Empty);
        }
        Ok(match config.kind {
            TrieKind::Plain => FamilyEntry::Plain(BinaryTrie::build(s, config.trie_options())?),
            TrieKind::Run => FamilyEntry::Run(RunTrie::build(s, config.trie_options())?),
        })
    };
    let workers = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1)
        .min(sets.len().max(1));
    if workers <= 1 {
        return sets.iter().map(|(_, s)| build_one(s)).collect();
    }
    let next = AtomicUsize::new(0);
    let built: Vec<(usize, Result<FamilyEntry>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= sets.len() {
                            break;
                        }
                        out.push((i, build_one(&sets[i].1)));
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("ingest worker panicked"))
            .collect()
    });
    let mut slots: Vec<Option<Result<FamilyEntry>>> = Vec::new();
    slots.resize_with(sets.len(), || None);
    for (i, res) in built {
        slots[i] = Some(res);
    }
    slots
        .into_iter()
        .map(|s| s.expect("every set was built"))
        .collect()
}

fn summarize(rows: impl Iterator<Item = (bool, u64, u64)>) -> BatchSummary {
    let mut queries = 0;
    let mut errors = 0;
    let mut total_size = 0;
    let mut times = Vec::new();
    for (ok, ns, size) in rows {
        queries += 1;
        if ok {
            times.push(ns);
            total_size += size;
        } else {
            errors += 1;
        }
    }
    times.sort_unstable();
    let pct = |q: usize| -> u64 {
        if times.is_empty() {
            0
        } else {
            times[(q * times.len()).div_ceil(100).max(1) - 1]
        }
    };
    let mean = if times.is_empty() {
        0
    } else {
        times.iter().sum::<u64>() / times.len() as u64
    };
    BatchSummary {
        queries,
        errors,
        total_size,
        mean_ns: mean,
        p50_ns: pct(50),
        p90_ns: pct(90),
        p99_ns: pct(99),
    }
}
