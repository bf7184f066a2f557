//! Multi-way intersection by joint trie descent.
//!
//! All algorithms here take `k >= 2` tries over the same universe. The
//! main one walks all tries in lockstep, one node tuple at a time: the
//! bitwise AND `s` of the k node codes says which directions every set
//! still allows, so any branch missing from one set prunes the whole
//! subtree for free. Each visited tuple costs exactly one `rank1` per trie
//! (the right child of a `11` code is the pair after the left child), and
//! the result can be produced either as elements or directly as a trie of
//! the same kind, built level by level during the walk.
//!
//! On run tries the descent adds an exclusion mask: a set whose node is
//! `00` covers the whole interval and stops constraining the subtree. If
//! every set is excluded the interval itself is emitted as a run; if one
//! set remains its subtree is copied verbatim, with no steering work.
//!
//! Two simpler algorithms over plain sorted arrays serve as baselines:
//! [`bk_intersect`] leapfrogs a candidate value through per-set successor
//! searches that double their step from a moving finger, and
//! [`tp_intersect_naive`] recursively halves the universe. Both produce
//! the same elements, much more slowly on inputs whose structure the
//! joint descent can exploit.

use serde::Serialize;

use crate::bintrie::{BinaryTrie, BuildOptions};
use crate::bitvec::BitVec;
use crate::measures::SortedSet;
use crate::runtrie::RunTrie;
use crate::{Error, Result};

/// What the intersection should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputMode {
    /// The elements, in increasing order.
    Elements,
    /// A freshly assembled trie of the result (built with default
    /// options), or [`Intersection::EmptyTrie`] when nothing survives.
    Trie,
}

/// Result of an intersection, parameterized by the trie kind.
#[derive(Clone, Debug)]
pub enum Intersection<T> {
    Elements(Vec<u64>),
    /// Trie mode, empty result: there is no trie of the empty set.
    EmptyTrie,
    Trie(T),
}

impl Intersection<BinaryTrie> {
    pub fn into_elements(self) -> Vec<u64> {
        match self {
            Intersection::Elements(v) => v,
            Intersection::EmptyTrie => Vec::new(),
            Intersection::Trie(t) => t.decode(),
        }
    }
}

impl Intersection<RunTrie> {
    pub fn into_elements(self) -> Vec<u64> {
        match self {
            Intersection::Elements(v) => v,
            Intersection::EmptyTrie => Vec::new(),
            Intersection::Trie(t) => t.decode(),
        }
    }
}

/// Work counters for one intersection run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TraversalStats {
    /// Node tuples examined during the joint descent.
    pub nodes_visited: u64,
    /// Tuples that were expanded into child tuples.
    pub expanded_nodes: u64,
    /// Steering rank1 calls: one per trie per expanded tuple. Lookups
    /// made while copying a single remaining subtree are not steering and
    /// are not counted here.
    pub rank1_calls: u64,
    /// Nodes copied verbatim when only one run trie stayed active.
    pub copied_nodes: u64,
    /// Elements in the result (runs counted by their length).
    pub emitted: u64,
}

pub(crate) fn common_universe_plain(tries: &[&BinaryTrie]) -> Result<u64> {
    if tries.len() < 2 {
        return Err(Error::TooFewSets);
    }
    let u = tries[0].universe();
    if tries.iter().any(|t| t.universe() != u) {
        return Err(Error::InvalidInput(
            "intersection inputs must share one universe".into(),
        ));
    }
    Ok(u)
}

pub(crate) fn common_universe_runs(tries: &[&RunTrie]) -> Result<u64> {
    if tries.len() < 2 {
        return Err(Error::TooFewSets);
    }
    if tries.len() > 64 {
        return Err(Error::InvalidInput(
            "run intersection supports at most 64 sets".into(),
        ));
    }
    let u = tries[0].universe();
    if tries.iter().any(|t| t.universe() != u) {
        return Err(Error::InvalidInput(
            "intersection inputs must share one universe".into(),
        ));
    }
    Ok(u)
}

pub(crate) fn codes_to_levels(codes: Vec<Vec<u8>>) -> Vec<BitVec> {
    codes
        .into_iter()
        .map(|cs| {
            let mut bits = BitVec::with_capacity(cs.len() * 2);
            for c in cs {
                bits.push_pair(c);
            }
            bits
        })
        .collect()
}

/// Intersects plain binary tries by steered descent.
pub fn ac_intersect(
    tries: &[&BinaryTrie],
    mode: OutputMode,
) -> Result<(Intersection<BinaryTrie>, TraversalStats)> {
    let u = common_universe_plain(tries)?;
    let mut walk = PlainWalk::new(tries, mode);
    let roots = vec![0u64; tries.len()];
    let nonempty = walk.descend(1, 0, &roots);
    let stats = walk.stats;
    let out = match mode {
        OutputMode::Elements => Intersection::Elements(walk.elems),
        OutputMode::Trie => {
            if nonempty {
                let levels = codes_to_levels(walk.codes);
                Intersection::Trie(BinaryTrie::from_levels(levels, u, BuildOptions::default()))
            } else {
                Intersection::EmptyTrie
            }
        }
    };
    Ok((out, stats))
}

#[derive(Default)]
pub(crate) struct Scratch {
    left: Vec<u64>,
    right: Vec<u64>,
}

pub(crate) struct PlainWalk<'a> {
    tries: &'a [&'a BinaryTrie],
    ell: u32,
    mode: OutputMode,
    pub(crate) elems: Vec<u64>,
    pub(crate) codes: Vec<Vec<u8>>,
    scratch: Vec<Scratch>,
    pub(crate) stats: TraversalStats,
}

impl<'a> PlainWalk<'a> {
    pub(crate) fn new(tries: &'a [&'a BinaryTrie], mode: OutputMode) -> Self {
        let ell = tries[0].ell();
        PlainWalk {
            tries,
            ell,
            mode,
            elems: Vec::new(),
            codes: vec![Vec::new(); ell as usize],
            scratch: (0..ell).map(|_| Scratch::default()).collect(),
            stats: TraversalStats::default(),
        }
    }
}

impl PlainWalk<'_> {
    /// Visits one node tuple; returns whether its subtree contributed.
    pub(crate) fn descend(&mut self, l: u32, pfx: u64, pairs: &[u64]) -> bool {
        self.stats.nodes_visited += 1;
        let mut s = 0b11u8;
        for (i, t) in self.tries.iter().enumerate() {
            s &= t.pair_code(l, pairs[i]);
        }
        if s == 0 {
            return false;
        }
        let li = (l - 1) as usize;
        if l == self.ell {
            match self.mode {
                OutputMode::Elements => {
                    if s & 0b10 != 0 {
                        self.elems.push(pfx << 1);
                    }
                    if s & 0b01 != 0 {
                        self.elems.push(pfx << 1 | 1);
                    }
                }
                OutputMode::Trie => self.codes[li].push(s),
            }
            self.stats.emitted += s.count_ones() as u64;
            return true;
        }
        let mut scratch = std::mem::take(&mut self.scratch[li]);
        scratch.left.clear();
        scratch.right.clear();
        self.stats.expanded_nodes += 1;
        self.stats.rank1_calls += self.tries.len() as u64;
        for (i, t) in self.tries.iter().enumerate() {
            let p = pairs[i];
            match s {
                0b10 => scratch.left.push(t.child_pair(l, p, false)),
                0b01 => scratch.right.push(t.child_pair(l, p, true)),
                _ => {
                    // s is 11, so every code is 11 and the right child
                    // pair follows the left one directly.
                    let lc = t.child_pair(l, p, false);
                    scratch.left.push(lc);
                    scratch.right.push(lc + 1);
                }
            }
        }
        let slot = if self.mode == OutputMode::Trie {
            self.codes[li].push(0);
            self.codes[li].len() - 1
        } else {
            0
        };
        let lnon = s & 0b10 != 0 && self.descend(l + 1, pfx << 1, &scratch.left);
        let rnon = s & 0b01 != 0 && self.descend(l + 1, pfx << 1 | 1, &scratch.right);
        self.scratch[li] = scratch;
        let code = (lnon as u8) << 1 | rnon as u8;
        if self.mode == OutputMode::Trie {
            if code == 0 {
                // Dead subtree: the placeholder is still the last entry,
                // every descendant already retracted its own.
                self.codes[li].truncate(slot);
            } else {
                self.codes[li][slot] = code;
            }
        }
        code != 0
    }
}

/// Intersects run tries by steered descent with exclusion.
pub fn ac_intersect_runs(
    tries: &[&RunTrie],
    mode: OutputMode,
) -> Result<(Intersection<RunTrie>, TraversalStats)> {
    let u = common_universe_runs(tries)?;
    let mut walk = RunWalk::new(tries, mode);
    let roots = vec![0u64; tries.len()];
    let nonempty = walk.descend(1, 0, &roots, 0);
    let stats = walk.stats;
    let out = match mode {
        OutputMode::Elements => Intersection::Elements(walk.elems),
        OutputMode::Trie => {
            if nonempty {
                let levels = codes_to_levels(walk.codes);
                Intersection::Trie(RunTrie::from_levels(levels, u, BuildOptions::default()))
            } else {
                Intersection::EmptyTrie
            }
        }
    };
    Ok((out, stats))
}

pub(crate) struct RunWalk<'a> {
    tries: &'a [&'a RunTrie],
    ell: u32,
    mode: OutputMode,
    pub(crate) elems: Vec<u64>,
    pub(crate) codes: Vec<Vec<u8>>,
    scratch: Vec<Scratch>,
    pub(crate) stats: TraversalStats,
}

impl<'a> RunWalk<'a> {
    pub(crate) fn new(tries: &'a [&'a RunTrie], mode: OutputMode) -> Self {
        let ell = tries[0].ell();
        RunWalk {
            tries,
            ell,
            mode,
            elems: Vec::new(),
            codes: vec![Vec::new(); ell as usize],
            scratch: (0..ell).map(|_| Scratch::default()).collect(),
            stats: TraversalStats::default(),
        }
    }
}

impl RunWalk<'_> {
    fn span(&self, l: u32) -> u64 {
        1u64 << (self.ell - l + 1)
    }

    /// Visits one node tuple. Bit `i` of `excl` says trie `i` already
    /// landed on a run at an ancestor, so it no longer constrains this
    /// subtree. Returns whether the subtree contributed.
    pub(crate) fn descend(&mut self, l: u32, pfx: u64, pairs: &[u64], excl: u64) -> bool {
        self.stats.nodes_visited += 1;
        let li = (l - 1) as usize;
        let mut excl = excl;
        let mut s = 0b11u8;
        for (i, t) in self.tries.iter().enumerate() {
            if excl >> i & 1 != 0 {
                continue;
            }
            let c = t.pair_code(l, pairs[i]);
            if c == 0b00 {
                excl |= 1 << i;
            } else {
                s &= c;
            }
        }
        let active = self.tries.len() - excl.count_ones() as usize;
        if active == 0 {
            // Every set covers the whole interval: the interval is in
            // the result as one run.
            match self.mode {
                OutputMode::Elements => {
                    let base = pfx * self.span(l);
                    self.elems.extend(base..base + self.span(l));
                }
                OutputMode::Trie => self.codes[li].push(0b00),
            }
            self.stats.emitted += self.span(l);
            return true;
        }
        if active == 1 {
            let i = (0..self.tries.len()).find(|&j| excl >> j & 1 == 0).unwrap();
            self.copy_subtree(self.tries[i], l, pairs[i], pfx);
            return true;
        }
        if s == 0 {
            return false;
        }
        if l == self.ell {
            match self.mode {
                OutputMode::Elements => {
                    if s & 0b10 != 0 {
                        self.elems.push(pfx << 1);
                    }
                    if s & 0b01 != 0 {
                        self.elems.push(pfx << 1 | 1);
                    }
                }
                OutputMode::Trie => self.codes[li].push(s),
            }
            self.stats.emitted += s.count_ones() as u64;
            return true;
        }
        let mut scratch = std::mem::take(&mut self.scratch[li]);
        scratch.left.clear();
        scratch.right.clear();
        self.stats.expanded_nodes += 1;
        self.stats.rank1_calls += active as u64;
        for (i, t) in self.tries.iter().enumerate() {
            if excl >> i & 1 != 0 {
                // Stale position, never read below this point.
                scratch.left.push(pairs[i]);
                scratch.right.push(pairs[i]);
                continue;
            }
            let p = pairs[i];
            match s {
                0b10 => {
                    scratch.left.push(t.child_pair(l, p, false));
                    scratch.right.push(0);
                }
                0b01 => {
                    scratch.left.push(0);
                    scratch.right.push(t.child_pair(l, p, true));
                }
                _ => {
                    let lc = t.child_pair(l, p, false);
                    scratch.left.push(lc);
                    scratch.right.push(lc + 1);
                }
            }
        }
        let slot = if self.mode == OutputMode::Trie {
            self.codes[li].push(0);
            self.codes[li].len() - 1
        } else {
            0
        };
        let lnon = s & 0b10 != 0 && self.descend(l + 1, pfx << 1, &scratch.left, excl);
        let rnon = s & 0b01 != 0 && self.descend(l + 1, pfx << 1 | 1, &scratch.right, excl);
        self.scratch[li] = scratch;
        let code = (lnon as u8) << 1 | rnon as u8;
        if self.mode == OutputMode::Trie {
            if code == 0 {
                self.codes[li].truncate(slot);
            } else {
                self.codes[li][slot] = code;
            }
        }
        code != 0
    }

    /// Copies the subtree of the single remaining constraining trie into
    /// the output untouched: intersecting with full intervals changes
    /// nothing.
    pub(crate) fn copy_subtree(&mut self, t: &RunTrie, l: u32, p: u64, pfx: u64) {
        self.stats.copied_nodes += 1;
        let c = t.pair_code(l, p);
        if self.mode == OutputMode::Trie {
            self.codes[(l - 1) as usize].push(c);
        }
        if c == 0b00 {
            if self.mode == OutputMode::Elements {
                let base = pfx * self.span(l);
                self.elems.extend(base..base + self.span(l));
            }
            self.stats.emitted += self.span(l);
            return;
        }
        if l == self.ell {
            if self.mode == OutputMode::Elements {
                if c & 0b10 != 0 {
                    self.elems.push(pfx << 1);
                }
                if c & 0b01 != 0 {
                    self.elems.push(pfx << 1 | 1);
                }
            }
            self.stats.emitted += c.count_ones() as u64;
            return;
        }
        if c & 0b10 != 0 {
            self.copy_subtree(t, l + 1, t.child_pair(l, p, false), pfx << 1);
        }
        if c & 0b01 != 0 {
            self.copy_subtree(t, l + 1, t.child_pair(l, p, true), pfx << 1 | 1);
        }
    }
}

/// Baseline: round-robin a candidate value through per-set successor
/// searches over the sorted arrays, each search doubling its step from a
/// per-set finger, until every set agrees on the candidate.
pub fn bk_intersect(sets: &[&SortedSet]) -> Result<Vec<u64>> {
    if sets.len() < 2 {
        return Err(Error::TooFewSets);
    }
    let u = sets[0].universe();
    if sets.iter().any(|s| s.universe() != u) {
        return Err(Error::InvalidInput(
            "intersection inputs must share one universe".into(),
        ));
    }
    let mut fingers = vec![0usize; sets.len()];
    let mut out = Vec::new();
    let mut x = 0u64;
    let mut agreed = 0usize;
    let mut i = 0usize;
    loop {
        let elems = sets[i].elems();
        let pos = successor_from(elems, fingers[i], x);
        fingers[i] = pos;
        if pos == elems.len() {
            return Ok(out);
        }
        if elems[pos] == x {
            agreed += 1;
            if agreed == sets.len() {
                out.push(x);
                // Advancing strictly is what guarantees termination
                // after a match.
                if x + 1 >= u {
                    return Ok(out);
                }
                x += 1;
                agreed = 0;
            }
        } else {
            x = elems[pos];
            agreed = 1;
        }
        i = (i + 1) % sets.len();
    }
}

/// First index at or after `from` whose value is `>= x`, found by
/// doubling the probe distance and binary-searching the final gap. The
/// fingers only move forward, so a full scan costs the sum of the
/// doubling searches rather than one binary search per probe.
fn successor_from(elems: &[u64], from: usize, x: u64) -> usize {
    if from >= elems.len() || elems[from] >= x {
        return from;
    }
    let mut lo = from;
    let mut step = 1usize;
    while lo + step < elems.len() && elems[lo + step] < x {
        lo += step;
        step <<= 1;
    }
    let hi = (lo + step).min(elems.len());
    lo + 1 + elems[lo + 1..hi].partition_point(|&e| e < x)
}

/// Baseline: recursive universe halving over plain sorted arrays. A
/// one-value interval where every set is still nonempty is in the result.
pub fn tp_intersect_naive(sets: &[&SortedSet]) -> Result<Vec<u64>> {
    if sets.len() < 2 {
        return Err(Error::TooFewSets);
    }
    let u = sets[0].universe();
    if sets.iter().any(|s| s.universe() != u) {
        return Err(Error::InvalidInput(
            "intersection inputs must share one universe".into(),
        ));
    }
    let slices: Vec<&[u64]> = sets.iter().map(|s| s.elems()).collect();
    let mut out = Vec::new();
    tp_rec(&slices, 0, sets[0].padded_universe(), &mut out);
    Ok(out)
}

fn tp_rec(slices: &[&[u64]], lo: u64, hi: u64, out: &mut Vec<u64>) {
    if slices.iter().any(|s| s.is_empty()) {
        return;
    }
    if hi - lo == 1 {
        out.push(lo);
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let lefts: Vec<&[u64]> = slices
        .iter()
        .map(|s| &s[..s.partition_point(|&x| x < mid)])
        .collect();
    let rights: Vec<&[u64]> = slices
        .iter()
        .map(|s| &s[s.partition_point(|&x| x < mid)..])
        .collect();
    tp_rec(&lefts, lo, mid, out);
    tp_rec(&rights, mid, hi, out);
}

/// For each trie, the rank of every given element in that trie. Pairs an
/// intersection result with per-set positions, e.g. to fetch satellite
/// records. Every trie needs its last-level rank directory.
pub fn rank_sequences(tries: &[&BinaryTrie], elements: &[u64]) -> Result<Vec<Vec<u64>>> {
    if tries.is_empty() {
        return Err(Error::TooFewSets);
    }
    let u = tries[0].universe();
    if tries.iter().any(|t| t.universe() != u) {
        return Err(Error::InvalidInput(
            "rank sequences need a shared universe".into(),
        ));
    }
    if let Some(&x) = elements.iter().find(|&&x| x >= u) {
        return Err(Error::InvalidInput(format!(
            "element {x} outside universe {u}"
        )));
    }
    tries
        .iter()
        .map(|t| elements.iter().map(|&x| t.set_rank(x)).collect())
        .collect()
}
