//! The run-compressed variant of the level-wise binary trie.
//!
//! Identical layout to [`crate::bintrie`], with one extra rule: a node
//! whose whole subtree interval is contained in the set keeps its 2-bit
//! slot but stores `00` and has no children. Since `00` cannot occur in
//! the plain encoding, landing on one during a descent means every value
//! under that node is present. A maximal run of `2^k` aligned values
//! therefore costs one node instead of a full subtree, which is what makes
//! dense stretches cheap: the total 1-bit count equals the run-aware
//! measure from [`crate::measures::rtrie_measure`].
//!
//! Rank needs more than the plain trie's final `rank1`, because elements
//! hidden inside runs never reach the last level. Each level carries an
//! aligned-`00` counting directory; a run at level `l` left of the query
//! path contributes `2^(ell - l + 1)` elements. When the query path itself
//! ends on a run, the levels below it are handled with a frontier sweep:
//! the nodes left of the run form a prefix of every deeper level, so one
//! `rank1` per level tracks the prefix width while `rank00` adds the runs
//! inside it.

use std::io::{Read, Write};

use crate::bintrie::{validate_raw_levels, BuildOptions, Level, WireHeader, WIRE_HEADER_LEN};
use crate::bitvec::BitVec;
use crate::measures::SortedSet;
use crate::{Error, Result};

/// A static set of integers stored as a run-compressed binary trie.
#[derive(Clone, Debug)]
pub struct RunTrie {
    levels: Vec<Level>,
    u: u64,
    ell: u32,
    n: u64,
    opts: BuildOptions,
}

impl RunTrie {
    /// Builds the run trie for a nonempty set over a universe of at
    /// least 2. `select_samples` has no effect here; run tries answer no
    /// select queries.
    pub fn build(s: &SortedSet, opts: BuildOptions) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidInput(
                "cannot build a trie for the empty set".into(),
            ));
        }
        if s.universe() < 2 {
            return Err(Error::InvalidInput(
                "trie universe must be at least 2".into(),
            ));
        }
        let ell = s.ell();
        let mut raw = vec![BitVec::new(); ell as usize];
        build_run_levels(s.elems(), 1, ell, 0, 1u64 << ell, &mut raw);
        Ok(Self::assemble(raw, s.universe(), s.len() as u64, opts))
    }

    pub(crate) fn from_levels(raw: Vec<BitVec>, u: u64, opts: BuildOptions) -> Self {
        let n = count_elements(&raw);
        Self::assemble(raw, u, n, opts)
    }

    fn assemble(raw: Vec<BitVec>, u: u64, n: u64, opts: BuildOptions) -> Self {
        let ell = raw.len() as u32;
        let levels: Vec<Level> = raw
            .into_iter()
            .enumerate()
            .map(|(i, bits)| {
                let last = i as u32 == ell - 1;
                Level::build(
                    bits,
                    opts.rank_variant,
                    !last || opts.last_level_rank,
                    false,
                    true,
                )
            })
            .collect();
        RunTrie {
            levels,
            u,
            ell,
            n,
            opts,
        }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn universe(&self) -> u64 {
        self.u
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn options(&self) -> BuildOptions {
        self.opts
    }

    pub(crate) fn level(&self, l: u32) -> &Level {
        &self.levels[(l - 1) as usize]
    }

    /// The raw code bits of level `l` (1-based, root level first). A `00`
    /// pair here marks an elided full subtree.
    pub fn level_bits(&self, l: u32) -> &BitVec {
        &self.level(l).bits
    }

    #[inline]
    pub(crate) fn pair_code(&self, l: u32, p: u64) -> u8 {
        self.level(l).bits.pair(p as usize)
    }

    #[inline]
    pub(crate) fn level_rank1(&self, l: u32, i: u64) -> u64 {
        self.level(l).rank1(i)
    }

    #[inline]
    pub(crate) fn child_pair(&self, l: u32, p: u64, right: bool) -> u64 {
        self.level_rank1(l, 2 * p + right as u64) - 1
    }

    /// Width in values of the subtree interval of a node at level `l`.
    #[inline]
    fn span(&self, l: u32) -> u64 {
        1u64 << (self.ell - l + 1)
    }

    /// Membership by descent: a run landing answers yes immediately.
    pub fn contains(&self, x: u64) -> bool {
        assert!(x < self.u, "membership argument {x} outside universe");
        let mut p = 0u64;
        for l in 1..=self.ell {
            let c = self.pair_code(l, p);
            if c == 0b00 {
                return true;
            }
            let b = x >> (self.ell - l) & 1;
            let present = if b == 0 { c & 0b10 != 0 } else { c & 0b01 != 0 };
            if !present {
                return false;
            }
            if l == self.ell {
                return true;
            }
            p = self.child_pair(l, p, b == 1);
        }
        unreachable!()
    }

    /// Number of elements `<= x`. Needs the opt-in last-level rank
    /// directory; the run counting directories are always present.
    ///
    /// Two phases: first find the predecessor of `x` by descent, then
    /// re-descend along the predecessor's own bits, adding the elements of
    /// every run left of the path, level by level.
    pub fn run_rank(&self, x: u64) -> Result<u64> {
        assert!(x < self.u, "rank argument {x} outside universe");
        if self.level(self.ell).rank.is_none() {
            return Err(Error::MissingDirectory("a rank directory on the last level"));
        }
        match self.run_predecessor(x) {
            None => Ok(0),
            Some(y) => Ok(self.rank_of_member(y)),
        }
    }

    /// Largest element `<= x`, if any.
    pub fn run_predecessor(&self, x: u64) -> Option<u64> {
        assert!(x < self.u, "predecessor argument {x} outside universe");
        let ell = self.ell;
        let mut p = 0u64;
        let mut v_last: Option<(u32, u64, u64)> = None;
        let mut pfx = 0u64;
        for l in 1..=ell {
            let c = self.pair_code(l, p);
            if c == 0b00 {
                return Some(x);
            }
            let b = x >> (ell - l) & 1;
            if b == 1 && c & 0b10 != 0 {
                v_last = Some((l, p, pfx));
            }
            let present = if b == 0 { c & 0b10 != 0 } else { c & 0b01 != 0 };
            if present {
                if l == ell {
                    return Some(x);
                }
                p = self.child_pair(l, p, b == 1);
                pfx = pfx << 1 | b;
            } else {
                break;
            }
        }
        v_last.map(|(lv, pv, pfxv)| {
            if lv == ell {
                pfxv << 1
            } else {
                self.max_value(lv + 1, self.child_pair(lv, pv, false), pfxv << 1)
            }
        })
    }

    /// Largest value under node `(l, p)` with prefix value `pfx`; a run
    /// landing short-circuits to the end of its interval.
    fn max_value(&self, mut l: u32, mut p: u64, mut pfx: u64) -> u64 {
        loop {
            let c = self.pair_code(l, p);
            if c == 0b00 {
                return (pfx + 1) * self.span(l) - 1;
            }
            if l == self.ell {
                return pfx << 1 | (c & 0b01 != 0) as u64;
            }
            let right = c & 0b01 != 0;
            p = self.child_pair(l, p, right);
            pfx = pfx << 1 | right as u64;
            l += 1;
        }
    }

    /// Rank of a value known to be in the set.
    fn rank_of_member(&self, y: u64) -> u64 {
        let ell = self.ell;
        let mut p = 0u64;
        let mut d = 0u64;
        for l in 1..=ell {
            let level = self.level(l);
            let zeros = level.zeros.as_ref().expect("run levels carry rank00");
            d += self.span(l) * zeros.rank_pairs00(&level.bits, 2 * p as usize);
            let c = self.pair_code(l, p);
            if c == 0b00 {
                // y sits inside this run. Count what lies left of it on
                // the levels below: the nodes left of the run occupy a
                // prefix of each deeper level, starting with the children
                // of the edges before the run node.
                let base = y >> (ell - l + 1) << (ell - l + 1);
                let mut f = level.rank1(2 * p + 1);
                if l == ell {
                    // The 1-bits before the run node on this last level
                    // are plain leaves left of it.
                    d += f;
                }
                for l2 in l + 1..=ell {
                    let deeper = self.level(l2);
                    let dz = deeper.zeros.as_ref().expect("run levels carry rank00");
                    d += self.span(l2) * dz.rank_pairs00(&deeper.bits, 2 * f as usize);
                    if f == 0 {
                        continue;
                    }
                    if l2 == ell {
                        d += deeper.rank1(2 * f - 1);
                    } else {
                        f = deeper.rank1(2 * f - 1);
                    }
                }
                return d + (y - base + 1);
            }
            let b = y >> (ell - l) & 1;
            if l == ell {
                return d + level.rank1(2 * p + b);
            }
            p = self.child_pair(l, p, b == 1);
        }
        unreachable!()
    }

    /// All elements in increasing order, runs expanded.
    pub fn decode(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.n as usize);
        self.decode_subtree(1, 0, 0, &mut out);
        out
    }

    pub(crate) fn decode_subtree(&self, l: u32, p: u64, pfx: u64, out: &mut Vec<u64>) {
        let c = self.pair_code(l, p);
        if c == 0b00 {
            let base = pfx * self.span(l);
            out.extend(base..base + self.span(l));
            return;
        }
        if l == self.ell {
            if c & 0b10 != 0 {
                out.push(pfx << 1);
            }
            if c & 0b01 != 0 {
                out.push(pfx << 1 | 1);
            }
            return;
        }
        if c & 0b10 != 0 {
            self.decode_subtree(l + 1, self.child_pair(l, p, false), pfx << 1, out);
        }
        if c & 0b01 != 0 {
            self.decode_subtree(l + 1, self.child_pair(l, p, true), pfx << 1 | 1, out);
        }
    }

    pub fn payload_bits(&self) -> u64 {
        self.levels.iter().map(|l| l.bits.len() as u64).sum()
    }

    /// Total 1-bits across levels; equals the run-aware trie measure.
    pub fn one_bits(&self) -> u64 {
        self.levels.iter().map(|l| l.bits.count_ones()).sum()
    }

    pub fn dir_overhead_bits(&self) -> u64 {
        self.levels.iter().map(|l| l.overhead_bits()).sum()
    }

    /// Structural self-check: valid linkage, no `11` on the last level
    /// (a full leaf pair must be a run), no two sibling runs (their parent
    /// should have been the run), and a consistent element count.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |detail: String| Error::Format {
            what: "run trie",
            detail,
        };
        if self.levels.is_empty() || self.levels[0].bits.pair_count() != 1 {
            return Err(bad("level 1 must hold exactly the root".into()));
        }
        for l in 1..=self.ell {
            let bits = &self.level(l).bits;
            if l < self.ell {
                let next_pairs = self.level(l + 1).bits.pair_count() as u64;
                if bits.count_ones() != next_pairs {
                    return Err(bad(format!(
                        "level {l} has {} edges but level {} has {} nodes",
                        bits.count_ones(),
                        l + 1,
                        next_pairs
                    )));
                }
                for p in 0..bits.pair_count() {
                    if bits.pair(p) == 0b11 {
                        let left = self.child_pair(l, p as u64, false);
                        let right = left + 1;
                        if self.pair_code(l + 1, left) == 0b00
                            && self.pair_code(l + 1, right) == 0b00
                        {
                            return Err(bad(format!(
                                "level {l} pair {p}: both children are runs, not maximal"
                            )));
                        }
                    }
                }
            } else {
                for p in 0..bits.pair_count() {
                    if bits.pair(p) == 0b11 {
                        return Err(bad(format!(
                            "last level pair {p} is 11, must be a run"
                        )));
                    }
                }
            }
        }
        let counted = count_elements_levels(&self.levels, self.ell);
        if counted != self.n {
            return Err(bad(format!(
                "recorded {} elements but structure holds {counted}",
                self.n
            )));
        }
        Ok(())
    }

    /// Wire format: magic `RTRI`, then the same header and level payload
    /// as the plain trie. Run counting directories are always rebuilt on
    /// load; the last-level rank directory is restated by the caller.
    pub fn write_into<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        WireHeader {
            u: self.u,
            ell: self.ell,
            n: self.n,
            variant: self.opts.rank_variant,
        }
        .write_into(b"RTRI", w)?;
        for level in &self.levels {
            level.bits.write_into(w)?;
        }
        Ok(())
    }

    pub fn wire_len(&self) -> usize {
        WIRE_HEADER_LEN + self.levels.iter().map(|l| l.bits.wire_len()).sum::<usize>()
    }

    pub fn read_from<R: Read>(r: &mut R, last_level_rank: bool) -> Result<Self> {
        let header = WireHeader::read_from(b"RTRI", "run trie", r)?;
        let mut raw = Vec::with_capacity(header.ell as usize);
        for _ in 0..header.ell {
            raw.push(BitVec::read_from(r)?);
        }
        validate_raw_levels(&raw, "run trie")?;
        let trie = Self::assemble(
            raw,
            header.u,
            header.n,
            BuildOptions {
                rank_variant: header.variant,
                last_level_rank,
                select_samples: false,
            },
        );
        trie.check_invariants()?;
        Ok(trie)
    }
}

fn build_run_levels(elems: &[u64], l: u32, ell: u32, lo: u64, hi: u64, levels: &mut [BitVec]) {
    if elems.len() as u64 == hi - lo {
        levels[(l - 1) as usize].push_pair(0b00);
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let split = elems.partition_point(|&x| x < mid);
    let (left, right) = elems.split_at(split);
    let code = (!left.is_empty() as u8) << 1 | !right.is_empty() as u8;
    levels[(l - 1) as usize].push_pair(code);
    if l < ell {
        if !left.is_empty() {
            build_run_levels(left, l + 1, ell, lo, mid, levels);
        }
        if !right.is_empty() {
            build_run_levels(right, l + 1, ell, mid, hi, levels);
        }
    }
}

fn count_elements(raw: &[BitVec]) -> u64 {
    let ell = raw.len() as u32;
    let mut n = 0u64;
    for (i, bits) in raw.iter().enumerate() {
        let l = i as u32 + 1;
        let mut zeros = 0u64;
        for p in 0..bits.pair_count() {
            if bits.pair(p) == 0b00 {
                zeros += 1;
            }
        }
        n += zeros << (ell - l + 1);
        if l == ell {
            n += bits.count_ones();
        }
    }
    n
}

fn count_elements_levels(levels: &[Level], ell: u32) -> u64 {
    let mut n = 0u64;
    for (i, level) in levels.iter().enumerate() {
        let l = i as u32 + 1;
        let zeros = level
            .zeros
            .as_ref()
            .map_or(0, |z| z.total());
        n += zeros << (ell - l + 1);
        if l == ell {
            n += level.bits.count_ones();
        }
    }
    n
}
