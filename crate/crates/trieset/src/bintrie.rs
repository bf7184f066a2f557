//! The level-wise compact binary trie and its set primitives.
//!
//! A set over `[0..u)` becomes a binary trie over the `ell = ceil(lg u)`-bit
//! codes of its elements, stored as one bit vector per level. Each node
//! contributes one 2-bit code: bit pair `(left, right)` says which children
//! exist, so `10` is "left child only", `01` "right only", `11` both; `00`
//! never appears here (the run-compressed trie in [`crate::runtrie`] claims
//! it). The node at pair position `p` of level `l` finds its children in
//! level `l + 1` by counting 1-bits: every 1 in level `l` is an edge, and
//! child nodes appear there in exactly edge order, so
//!
//! ```text
//! left child pair  = rank1(B_l, 2p) - 1
//! right child pair = rank1(B_l, 2p + 1) - 1   (= left + 1 when code is 11)
//! ```
//!
//! with rank1 inclusive of its position. The deepest vector's 1-bits
//! enumerate the elements in order, which yields rank and select over the
//! set itself: rank descends to the element (or its predecessor) and ranks
//! the final bit; select starts from the j-th 1 of the last level and
//! climbs upward with per-level select, reading one code bit per level from
//! the parity of each position.
//!
//! Interior levels always carry rank directories (navigation needs them).
//! The last level's directory, and select sampling, are opt-in via
//! [`BuildOptions`]: intersection never ranks the last level, so the
//! default build does not pay for it.

use std::io::{Read, Write};

use crate::bitvec::{select1_scan, BitVec, Pairs00Dir, RankDir, RankVariant, SelectDir};
use crate::measures::{ell_for_universe, SortedSet};
use crate::{Error, Result};

/// Optional structures chosen at build time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub rank_variant: RankVariant,
    /// Build a rank directory on the deepest level too, enabling
    /// [`BinaryTrie::set_rank`] and per-element rank sequences.
    pub last_level_rank: bool,
    /// Sample select positions on every level. Select works without this
    /// (scan fallback); the samples only bound the scan.
    pub select_samples: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            rank_variant: RankVariant::Dense,
            last_level_rank: false,
            select_samples: false,
        }
    }
}

/// One trie level: the code bits plus whatever directories were requested.
#[derive(Clone, Debug)]
pub(crate) struct Level {
    pub(crate) bits: BitVec,
    pub(crate) rank: Option<RankDir>,
    pub(crate) select: Option<SelectDir>,
    /// Aligned-`00` counting, used by run tries only.
    pub(crate) zeros: Option<Pairs00Dir>,
}

impl Level {
    pub(crate) fn build(
        bits: BitVec,
        variant: RankVariant,
        want_rank: bool,
        want_select: bool,
        want_zeros: bool,
    ) -> Self {
        let rank = want_rank.then(|| RankDir::build(&bits, variant));
        let select = want_select.then(|| SelectDir::build(&bits));
        let zeros = want_zeros.then(|| Pairs00Dir::build(&bits));
        Level {
            bits,
            rank,
            select,
            zeros,
        }
    }

    pub(crate) fn rank1(&self, i: u64) -> u64 {
        self.rank
            .as_ref()
            .expect("level has no rank directory")
            .rank1(&self.bits, i as usize)
    }

    pub(crate) fn select1(&self, j: u64) -> u64 {
        match &self.select {
            Some(dir) => dir.select1(&self.bits, j) as u64,
            None => select1_scan(&self.bits, j) as u64,
        }
    }

    pub(crate) fn overhead_bits(&self) -> u64 {
        self.rank.as_ref().map_or(0, |d| d.overhead_bits())
            + self.select.as_ref().map_or(0, |d| d.overhead_bits())
            + self.zeros.as_ref().map_or(0, |d| d.overhead_bits())
    }
}

/// Shared header layout for the trie wire formats.
pub(crate) struct WireHeader {
    pub u: u64,
    pub ell: u32,
    pub n: u64,
    pub variant: RankVariant,
}

pub(crate) const WIRE_VERSION: u16 = 1;
pub(crate) const WIRE_HEADER_LEN: usize = 4 + 2 + 8 + 1 + 8 + 1;

impl WireHeader {
    pub(crate) fn write_into<W: Write>(&self, magic: &[u8; 4], w: &mut W) -> std::io::Result<()> {
        w.write_all(magic)?;
        w.write_all(&WIRE_VERSION.to_le_bytes())?;
        w.write_all(&self.u.to_le_bytes())?;
        w.write_all(&[self.ell as u8])?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&[self.variant.tag()])?;
        Ok(())
    }

    pub(crate) fn read_from<R: Read>(magic: &[u8; 4], what: &'static str, r: &mut R) -> Result<Self> {
        let mut m = [0u8; 4];
        r.read_exact(&mut m)?;
        if &m != magic {
            return Err(Error::Format {
                what,
                detail: format!("bad magic {m:?}"),
            });
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != WIRE_VERSION {
            return Err(Error::Format {
                what,
                detail: format!("unsupported version {version}"),
            });
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let u = u64::from_le_bytes(b8);
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b1)?;
        let ell = b1[0] as u32;
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8);
        r.read_exact(&mut b1)?;
        let variant = RankVariant::from_tag(b1[0])?;
        if ell != ell_for_universe(u) {
            return Err(Error::Format {
                what,
                detail: format!("depth {ell} does not match universe {u}"),
            });
        }
        Ok(WireHeader { u, ell, n, variant })
    }
}

/// Structural sanity of freshly deserialized level vectors, checked before
/// any directory is built over them: every level must hold whole 2-bit
/// pairs, the root level exactly one pair, and each level one pair per
/// 1-bit of its parent. Directory construction is only safe on vectors
/// that pass.
pub(crate) fn validate_raw_levels(raw: &[BitVec], what: &'static str) -> Result<()> {
    let bad = |detail: String| Error::Format { what, detail };
    for (i, bv) in raw.iter().enumerate() {
        if bv.len() % 2 != 0 {
            return Err(bad(format!(
                "level {} has odd bit length {}",
                i + 1,
                bv.len()
            )));
        }
    }
    if let Some(first) = raw.first() {
        if first.len() != 2 {
            return Err(bad(format!(
                "root level has {} bits, expected 2",
                first.len()
            )));
        }
    }
    for i in 0..raw.len().saturating_sub(1) {
        let ones = raw[i].count_ones();
        let pairs = (raw[i + 1].len() / 2) as u64;
        if ones != pairs {
            return Err(bad(format!(
                "level {} has {ones} edges but level {} has {pairs} nodes",
                i + 1,
                i + 2
            )));
        }
    }
    Ok(())
}

/// A static set of integers stored as a level-wise binary trie.
#[derive(Clone, Debug)]
pub struct BinaryTrie {
    levels: Vec<Level>,
    u: u64,
    ell: u32,
    n: u64,
    opts: BuildOptions,
}

impl BinaryTrie {
    /// Builds the trie for a nonempty set over a universe of at least 2.
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
        build_levels(s.elems(), 1, ell, 0, 1u64 << ell, &mut raw);
        Ok(Self::assemble(raw, s.universe(), s.len() as u64, opts))
    }

    /// Wraps already-built level vectors (intersection output). The caller
    /// guarantees the level-wise shape; element count and directories are
    /// derived here.
    pub(crate) fn from_levels(raw: Vec<BitVec>, u: u64, opts: BuildOptions) -> Self {
        let n = raw.last().map_or(0, |b| b.count_ones());
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
                    opts.select_samples,
                    false,
                )
            })
            .collect();
        BinaryTrie {
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

    /// The raw code bits of level `l` (1-based, root level first). Mostly
    /// useful for inspecting or asserting on the exact stored shape.
    pub fn level_bits(&self, l: u32) -> &BitVec {
        &self.level(l).bits
    }

    /// The 2-bit code of the node at pair position `p` of level `l`.
    #[inline]
    pub(crate) fn pair_code(&self, l: u32, p: u64) -> u8 {
        self.level(l).bits.pair(p as usize)
    }

    #[inline]
    pub(crate) fn level_rank1(&self, l: u32, i: u64) -> u64 {
        self.level(l).rank1(i)
    }

    /// Pair position of a child at level `l + 1`.
    #[inline]
    pub(crate) fn child_pair(&self, l: u32, p: u64, right: bool) -> u64 {
        self.level_rank1(l, 2 * p + right as u64) - 1
    }

    fn last_level_rank1(&self, i: u64) -> Result<u64> {
        let level = self.level(self.ell);
        match &level.rank {
            Some(dir) => Ok(dir.rank1(&level.bits, i as usize)),
            None => Err(Error::MissingDirectory("a rank directory on the last level")),
        }
    }

    /// Number of elements `<= x`. Needs the opt-in last-level rank
    /// directory.
    pub fn set_rank(&self, x: u64) -> Result<u64> {
        assert!(x < self.u, "rank argument {x} outside universe");
        let ell = self.ell;
        let mut p = 0u64;
        let mut v_last: Option<(u32, u64)> = None;
        for l in 1..=ell {
            let b = x >> (ell - l) & 1;
            let c = self.pair_code(l, p);
            if b == 1 && c & 0b10 != 0 {
                v_last = Some((l, p));
            }
            if l == ell {
                // Whether or not x's own bit is set, the inclusive rank of
                // its bit position counts exactly the elements <= x.
                return self.last_level_rank1(2 * p + b);
            }
            let present = if b == 0 { c & 0b10 != 0 } else { c & 0b01 != 0 };
            if present {
                p = self.child_pair(l, p, b == 1);
            } else {
                // The predecessor is the largest leaf under the left child
                // of the last node where the path went right past one.
                return match v_last {
                    None => Ok(0),
                    Some((lv, pv)) => {
                        debug_assert!(lv < ell);
                        let q = self.max_leaf_pos(lv + 1, self.child_pair(lv, pv, false));
                        self.last_level_rank1(q)
                    }
                };
            }
        }
        unreachable!("descent always returns at the last level")
    }

    /// The j-th smallest element, 1-based.
    pub fn set_select(&self, j: u64) -> Result<u64> {
        if j < 1 || j > self.n {
            return Err(Error::InvalidInput(format!(
                "select rank {j} outside [1..{}]",
                self.n
            )));
        }
        let mut q = self.level(self.ell).select1(j);
        let mut x = q & 1;
        for l in (1..self.ell).rev() {
            // The node holding position q at level l+1 is the (q/2 + 1)-th
            // 1-bit of level l; its parity is the next code bit upward.
            q = self.level(l).select1(q / 2 + 1);
            x |= (q & 1) << (self.ell - l);
        }
        Ok(x)
    }

    /// Smallest element `>= x`, if any.
    pub fn successor(&self, x: u64) -> Option<u64> {
        assert!(x < self.u, "successor argument {x} outside universe");
        let ell = self.ell;
        let mut p = 0u64;
        let mut pfx = 0u64;
        let mut u_last: Option<(u32, u64, u64)> = None;
        for l in 1..=ell {
            let b = x >> (ell - l) & 1;
            let c = self.pair_code(l, p);
            if b == 0 && c & 0b01 != 0 {
                u_last = Some((l, p, pfx));
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
        u_last.map(|(lu, pu, pfxu)| {
            if lu == ell {
                pfxu << 1 | 1
            } else {
                self.min_leaf(lu + 1, self.child_pair(lu, pu, true), pfxu << 1 | 1)
            }
        })
    }

    /// Largest element `<= x`, if any.
    pub fn predecessor(&self, x: u64) -> Option<u64> {
        assert!(x < self.u, "predecessor argument {x} outside universe");
        let ell = self.ell;
        let mut p = 0u64;
        let mut pfx = 0u64;
        let mut v_last: Option<(u32, u64, u64)> = None;
        for l in 1..=ell {
            let b = x >> (ell - l) & 1;
            let c = self.pair_code(l, p);
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
                self.max_leaf(lv + 1, self.child_pair(lv, pv, false), pfxv << 1)
            }
        })
    }

    /// Largest leaf value in the subtree rooted at `(l, p)` whose node
    /// prefix value is `pfx`.
    fn max_leaf(&self, mut l: u32, mut p: u64, mut pfx: u64) -> u64 {
        while l < self.ell {
            let right = self.pair_code(l, p) & 0b01 != 0;
            p = self.child_pair(l, p, right);
            pfx = pfx << 1 | right as u64;
            l += 1;
        }
        pfx << 1 | (self.pair_code(l, p) & 0b01 != 0) as u64
    }

    fn min_leaf(&self, mut l: u32, mut p: u64, mut pfx: u64) -> u64 {
        while l < self.ell {
            let left = self.pair_code(l, p) & 0b10 != 0;
            p = self.child_pair(l, p, !left);
            pfx = pfx << 1 | !left as u64;
            l += 1;
        }
        pfx << 1 | (self.pair_code(l, p) & 0b10 == 0) as u64
    }

    /// Bit position in the last level of the largest leaf under `(l, p)`.
    fn max_leaf_pos(&self, mut l: u32, mut p: u64) -> u64 {
        while l < self.ell {
            let right = self.pair_code(l, p) & 0b01 != 0;
            p = self.child_pair(l, p, right);
            l += 1;
        }
        2 * p + (self.pair_code(l, p) & 0b01 != 0) as u64
    }

    /// All elements in increasing order.
    pub fn decode(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.n as usize);
        self.decode_subtree(1, 0, 0, &mut out);
        out
    }

    /// Appends the elements below node `(l, p)` (prefix value `pfx`).
    pub(crate) fn decode_subtree(&self, l: u32, p: u64, pfx: u64, out: &mut Vec<u64>) {
        let c = self.pair_code(l, p);
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

    /// Total stored code bits across levels (no directories). Equals
    /// `2 (trie(S) - n + 1)`: every node is two bits, and nodes = edges
    /// minus leaves plus the root.
    pub fn payload_bits(&self) -> u64 {
        self.levels.iter().map(|l| l.bits.len() as u64).sum()
    }

    /// Total 1-bits across levels; equals the trie measure (edge count).
    pub fn one_bits(&self) -> u64 {
        self.levels.iter().map(|l| l.bits.count_ones()).sum()
    }

    /// Measured directory overhead in bits.
    pub fn dir_overhead_bits(&self) -> u64 {
        self.levels.iter().map(|l| l.overhead_bits()).sum()
    }

    /// Structural self-check, used by tests and the deserializer: valid
    /// codes everywhere (no `00`), level linkage (each level's 1-count is
    /// the next level's node count), and the recorded element count.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |detail: String| Error::Format {
            what: "binary trie",
            detail,
        };
        if self.levels.is_empty() || self.levels[0].bits.pair_count() != 1 {
            return Err(bad("level 1 must hold exactly the root".into()));
        }
        for l in 1..=self.ell {
            let bits = &self.level(l).bits;
            if Pairs00Dir::build(bits).total() != 0 {
                return Err(bad(format!("level {l} contains a 00 code")));
            }
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
            }
        }
        if self.level(self.ell).bits.count_ones() != self.n {
            return Err(bad("element count does not match last-level 1-bits".into()));
        }
        Ok(())
    }

    /// Wire format: magic `BTRI`, version u16, universe u64, depth u8,
    /// element count u64, rank-variant tag u8, then each level bottom
    /// vector in the bit-vector wire format, levels 1..=ell in order.
    /// Directories are rebuilt on load.
    pub fn write_into<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        WireHeader {
            u: self.u,
            ell: self.ell,
            n: self.n,
            variant: self.opts.rank_variant,
        }
        .write_into(b"BTRI", w)?;
        for level in &self.levels {
            level.bits.write_into(w)?;
        }
        Ok(())
    }

    pub fn wire_len(&self) -> usize {
        WIRE_HEADER_LEN + self.levels.iter().map(|l| l.bits.wire_len()).sum::<usize>()
    }

    /// Reads a trie back; the optional directories are not stored, so the
    /// caller restates which ones to rebuild.
    pub fn read_from<R: Read>(r: &mut R, last_level_rank: bool, select_samples: bool) -> Result<Self> {
        let header = WireHeader::read_from(b"BTRI", "binary trie", r)?;
        let mut raw = Vec::with_capacity(header.ell as usize);
        for _ in 0..header.ell {
            raw.push(BitVec::read_from(r)?);
        }
        validate_raw_levels(&raw, "binary trie")?;
        let trie = Self::assemble(
            raw,
            header.u,
            header.n,
            BuildOptions {
                rank_variant: header.variant,
                last_level_rank,
                select_samples,
            },
        );
        trie.check_invariants()?;
        Ok(trie)
    }
}

/// Depth-first construction: one 2-bit code per reachable node, appended to
/// its level in left-to-right node order.
fn build_levels(elems: &[u64], l: u32, ell: u32, lo: u64, hi: u64, levels: &mut [BitVec]) {
    let mid = lo + (hi - lo) / 2;
    let split = elems.partition_point(|&x| x < mid);
    let (left, right) = elems.split_at(split);
    let code = (!left.is_empty() as u8) << 1 | !right.is_empty() as u8;
    levels[(l - 1) as usize].push_pair(code);
    if l < ell {
        if !left.is_empty() {
            build_levels(left, l + 1, ell, lo, mid, levels);
        }
        if !right.is_empty() {
            build_levels(right, l + 1, ell, mid, hi, levels);
        }
    }
}
