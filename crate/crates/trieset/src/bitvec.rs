//! Bit vectors with sampled rank and select directories.
//!
//! [`BitVec`] is an append-built, immutable-after-build sequence of bits
//! packed LSB-first into 64-bit words. Trie levels store 2-bit node codes in
//! it: the code of the node at pair position `p` occupies bits `2p` (left
//! child present) and `2p + 1` (right child present).
//!
//! Three rank directory layouts trade space for scan length, all answering
//! `rank1(i)` = number of 1-bits in positions `[0..=i]`:
//!
//! * [`RankVariant::Dense`]: per 512-bit superblock, one absolute 64-bit
//!   count plus seven packed 9-bit in-superblock prefix counts. Rank touches
//!   one word of payload. Overhead 128/512 = 25%.
//! * [`RankVariant::Sparse`]: per 2048-bit superblock, one absolute count
//!   plus four packed 16-bit prefix counts for its 512-bit sub-blocks. Rank
//!   scans at most eight payload words. Overhead 128/2048 = 6.25%.
//! * [`RankVariant::Interleaved`]: one absolute count per 512-bit block,
//!   meant to live next to its payload in memory. Same scan length as
//!   Sparse. Overhead 64/512 = 12.5%.
//!
//! [`Pairs00Dir`] counts aligned `00` pairs (the run markers of the
//! run-compressed trie; a plain `00` count over bits would also catch the
//! middle of `0110 0...`-style patterns, so the count is pair-aligned).
//! [`SelectDir`] samples the position of every 8192nd 1-bit; select without
//! a directory falls back to a scan, so the directory is purely an
//! accelerator and is opt-in.

use std::io::{Read, Write};

use crate::{Error, Result};

const WORD_BITS: usize = 64;
/// Even-position mask: one bit per aligned pair slot.
const PAIR_SLOTS: u64 = 0x5555_5555_5555_5555;
/// One select sample per this many 1-bits.
const SELECT_SAMPLE: usize = 8192;

/// An append-built bit sequence packed LSB-first into 64-bit words.
///
/// Bits past `len` in the last word are always zero; every builder and the
/// deserializer maintain that, so popcounts over whole words are safe.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitVec {
            words: Vec::with_capacity(bits.div_ceil(WORD_BITS)),
            len: 0,
        }
    }

    /// Builds from pre-packed words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        assert!(len <= words.len() * WORD_BITS, "len exceeds provided words");
        words.truncate(len.div_ceil(WORD_BITS));
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        BitVec { words, len }
    }

    /// Parses a string of `0`/`1` characters; position 0 is the first
    /// character. Whitespace is skipped so codes can be written in readable
    /// 2-bit groups, e.g. `"11 01 00 10"`.
    pub fn from_bit_str(s: &str) -> Self {
        let mut bv = BitVec::new();
        for c in s.chars() {
            match c {
                '0' => bv.push(false),
                '1' => bv.push(true),
                c if c.is_whitespace() => {}
                c => panic!("invalid bit character {c:?}"),
            }
        }
        bv
    }

    /// Renders the bits as a `0`/`1` string (testing and debug output).
    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn push(&mut self, bit: bool) {
        let off = self.len % WORD_BITS;
        if off == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1u64 << off;
        }
        self.len += 1;
    }

    /// Appends a 2-bit node code; bit 1 of `code` is the left-child bit and
    /// is stored first, so `0b10` reads as "left child only".
    pub fn push_pair(&mut self, code: u8) {
        debug_assert!(code < 4);
        self.push(code & 0b10 != 0);
        self.push(code & 0b01 != 0);
    }

    /// Appends all bits of `other`, preserving order.
    pub fn append(&mut self, other: &BitVec) {
        if other.len == 0 {
            return;
        }
        let off = self.len % WORD_BITS;
        if off == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            let last = self.words.len() - 1;
            self.words[last] |= other.words[0] << off;
            for w in 1..other.words.len() {
                self.words
                    .push(other.words[w - 1] >> (WORD_BITS - off) | other.words[w] << off);
            }
            let produced = (self.words.len() - 1 - last) * WORD_BITS + (WORD_BITS - off);
            if produced < other.len {
                self.words
                    .push(other.words[other.words.len() - 1] >> (WORD_BITS - off));
            }
        }
        self.len += other.len;
        self.words.truncate(self.len.div_ceil(WORD_BITS));
        let tail = self.len % WORD_BITS;
        if tail != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << tail) - 1;
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    /// The 2-bit code at pair position `p` (left bit high, right bit low).
    #[inline]
    pub fn pair(&self, p: usize) -> u8 {
        assert!(2 * p + 1 < self.len, "pair index {p} out of range");
        let w = self.words[2 * p / WORD_BITS] >> (2 * p % WORD_BITS);
        // Stored order is (left, right); swap into the left-high code value.
        ((w & 1) << 1 | (w >> 1) & 1) as u8
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of stored pairs (len / 2).
    #[inline]
    pub fn pair_count(&self) -> usize {
        debug_assert!(self.len % 2 == 0);
        self.len / 2
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Serialized size in bytes: the length header plus the payload words.
    pub fn wire_len(&self) -> usize {
        8 + self.words.len() * 8
    }

    /// Wire format: bit length as u64 little-endian, then the payload words
    /// little-endian. Directories are never serialized.
    pub fn write_into<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&(self.len as u64).to_le_bytes())?;
        for word in &self.words {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let len = u64::from_le_bytes(buf) as usize;
        let nwords = len.div_ceil(WORD_BITS);
        // The length field is untrusted wire data: cap the preallocation so
        // a corrupt header cannot demand gigabytes up front. The read loop
        // still stops at the real end of input.
        let mut words = Vec::with_capacity(nwords.min(1 << 16));
        for _ in 0..nwords {
            r.read_exact(&mut buf)?;
            words.push(u64::from_le_bytes(buf));
        }
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last() {
                if last >> tail != 0 {
                    return Err(Error::Format {
                        what: "bit vector",
                        detail: "nonzero bits past the stated length".into(),
                    });
                }
            }
        }
        Ok(BitVec { words, len })
    }
}

/// Mask selecting bits `[0..=off]` of a word.
#[inline]
fn incl_mask(off: usize) -> u64 {
    debug_assert!(off < WORD_BITS);
    !0u64 >> (WORD_BITS - 1 - off)
}

/// Rank directory layout; see the module docs for the space/scan tradeoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankVariant {
    Dense,
    Sparse,
    Interleaved,
}

impl RankVariant {
    pub fn tag(self) -> u8 {
        match self {
            RankVariant::Dense => 0,
            RankVariant::Sparse => 1,
            RankVariant::Interleaved => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(RankVariant::Dense),
            1 => Ok(RankVariant::Sparse),
            2 => Ok(RankVariant::Interleaved),
            t => Err(Error::Format {
                what: "rank variant tag",
                detail: format!("unknown tag {t}"),
            }),
        }
    }
}

/// Sampled rank1 directory over one [`BitVec`].
#[derive(Clone, Debug)]
pub struct RankDir {
    variant: RankVariant,
    /// Absolute 1-count before each superblock.
    abs: Vec<u64>,
    /// Packed relative counts; meaning depends on the variant.
    rel: Vec<u64>,
    built_len: usize,
    total_ones: u64,
}

/// Words per 512-bit block.
const BLOCK_WORDS: usize = 8;
/// Words per Sparse superblock (2048 bits).
const SPARSE_SB_WORDS: usize = 32;

impl RankDir {
    pub fn build(bv: &BitVec, variant: RankVariant) -> Self {
        let words = bv.words();
        let (sb_words, two_level) = match variant {
            RankVariant::Dense => (BLOCK_WORDS, true),
            RankVariant::Sparse => (SPARSE_SB_WORDS, true),
            RankVariant::Interleaved => (BLOCK_WORDS, false),
        };
        let nsb = words.len().div_ceil(sb_words).max(1);
        let mut abs = Vec::with_capacity(nsb);
        let mut rel = Vec::with_capacity(if two_level { nsb } else { 0 });
        let mut total = 0u64;
        for sb in 0..nsb {
            abs.push(total);
            let start = sb * sb_words;
            let mut packed = 0u64;
            let mut in_sb = 0u64;
            for off in 0..sb_words {
                if two_level && off > 0 {
                    match variant {
                        // Cumulative count before each of words 1..=7, 9 bits each.
                        RankVariant::Dense => packed |= in_sb << (9 * (off - 1)),
                        // Cumulative count before each 512-bit sub-block, 16 bits
                        // each (sub-block 0 keeps an explicit zero).
                        RankVariant::Sparse if off % BLOCK_WORDS == 0 => {
                            packed |= in_sb << (16 * (off / BLOCK_WORDS))
                        }
                        _ => {}
                    }
                }
                if let Some(w) = words.get(start + off) {
                    in_sb += w.count_ones() as u64;
                }
            }
            if two_level {
                rel.push(packed);
            }
            total += in_sb;
        }
        RankDir {
            variant,
            abs,
            rel,
            built_len: bv.len(),
            total_ones: total,
        }
    }

    pub fn variant(&self) -> RankVariant {
        self.variant
    }

    /// Total 1-bits in the vector the directory was built over.
    pub fn total_ones(&self) -> u64 {
        self.total_ones
    }

    /// Directory size in bits (the measured overhead).
    pub fn overhead_bits(&self) -> u64 {
        ((self.abs.len() + self.rel.len()) * WORD_BITS) as u64
    }

    /// Number of 1-bits in `bv[0..=i]`.
    pub fn rank1(&self, bv: &BitVec, i: usize) -> u64 {
        assert_eq!(self.built_len, bv.len(), "directory built over another vector");
        assert!(i < bv.len(), "rank index {i} out of range (len {})", bv.len());
        let words = bv.words();
        let wi = i / WORD_BITS;
        let off = i % WORD_BITS;
        match self.variant {
            RankVariant::Dense => {
                let sb = wi / BLOCK_WORDS;
                let wo = wi % BLOCK_WORDS;
                let rel = if wo == 0 {
                    0
                } else {
                    self.rel[sb] >> (9 * (wo - 1)) & 0x1ff
                };
                self.abs[sb] + rel + (words[wi] & incl_mask(off)).count_ones() as u64
            }
            RankVariant::Sparse => {
                let sb = wi / SPARSE_SB_WORDS;
                let blk = wi % SPARSE_SB_WORDS / BLOCK_WORDS;
                let mut r = self.abs[sb] + (self.rel[sb] >> (16 * blk) & 0xffff);
                let blk_start = sb * SPARSE_SB_WORDS + blk * BLOCK_WORDS;
                for w in &words[blk_start..wi] {
                    r += w.count_ones() as u64;
                }
                r + (words[wi] & incl_mask(off)).count_ones() as u64
            }
            RankVariant::Interleaved => {
                let sb = wi / BLOCK_WORDS;
                let mut r = self.abs[sb];
                for w in &words[sb * BLOCK_WORDS..wi] {
                    r += w.count_ones() as u64;
                }
                r + (words[wi] & incl_mask(off)).count_ones() as u64
            }
        }
    }
}

/// Count of aligned `00` pairs in one word, restricted to its first
/// `npairs` pair slots.
#[inline]
fn count00_word(w: u64, npairs: usize) -> u64 {
    debug_assert!(npairs <= 32);
    let z = !w & (!w >> 1) & PAIR_SLOTS;
    let m = if npairs == 32 {
        !0u64
    } else {
        (1u64 << (2 * npairs)) - 1
    };
    (z & m).count_ones() as u64
}

/// Directory for counting aligned `00` node codes, one absolute count per
/// 512-bit block plus a bounded word sweep.
#[derive(Clone, Debug)]
pub struct Pairs00Dir {
    abs: Vec<u64>,
    built_len: usize,
    total: u64,
}

impl Pairs00Dir {
    pub fn build(bv: &BitVec) -> Self {
        assert!(bv.len() % 2 == 0, "pair directory over odd-length vector");
        let words = bv.words();
        let nblk = words.len().div_ceil(BLOCK_WORDS).max(1);
        let mut abs = Vec::with_capacity(nblk);
        let mut total = 0u64;
        let total_pairs = bv.len() / 2;
        for blk in 0..nblk {
            abs.push(total);
            for off in 0..BLOCK_WORDS {
                let wi = blk * BLOCK_WORDS + off;
                if let Some(w) = words.get(wi) {
                    let npairs = (total_pairs - (wi * 32).min(total_pairs)).min(32);
                    total += count00_word(*w, npairs);
                }
            }
        }
        Pairs00Dir {
            abs,
            built_len: bv.len(),
            total,
        }
    }

    /// Total aligned `00` pairs in the whole vector.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn overhead_bits(&self) -> u64 {
        (self.abs.len() * WORD_BITS) as u64
    }

    /// Number of aligned `00` pairs strictly before pair `i / 2`; `i` must
    /// be even (a node-aligned bit position). `i == len` counts them all.
    pub fn rank_pairs00(&self, bv: &BitVec, i: usize) -> u64 {
        assert_eq!(self.built_len, bv.len(), "directory built over another vector");
        assert!(i % 2 == 0, "pair rank at odd bit position {i}");
        assert!(i <= bv.len(), "pair rank index {i} out of range");
        let p = i / 2; // count pairs with index < p
        if p == 0 {
            return 0;
        }
        let words = bv.words();
        let wi = 2 * (p - 1) / WORD_BITS; // word holding the last counted pair
        let blk = wi / BLOCK_WORDS;
        let mut r = self.abs[blk];
        for w in blk * BLOCK_WORDS..wi {
            r += count00_word(words[w], 32);
        }
        r + count00_word(words[wi], p - wi * 32)
    }
}

/// Position (0-based) of the `r`-th set bit of `w`; `r` is 1-based and must
/// not exceed the popcount.
#[inline]
fn select_in_word(mut w: u64, r: u64) -> usize {
    debug_assert!(r >= 1 && r <= w.count_ones() as u64);
    for _ in 1..r {
        w &= w - 1;
    }
    w.trailing_zeros() as usize
}

/// Select without a directory: scan from the start. Always available; the
/// sampled [`SelectDir`] only shortens the scan.
pub fn select1_scan(bv: &BitVec, j: u64) -> usize {
    assert!(j >= 1, "select rank is 1-based");
    let mut remaining = j;
    for (wi, w) in bv.words().iter().enumerate() {
        let ones = w.count_ones() as u64;
        if ones >= remaining {
            return wi * WORD_BITS + select_in_word(*w, remaining);
        }
        remaining -= ones;
    }
    panic!("select1({j}) out of range: vector has fewer 1-bits");
}

/// Sampled select directory: the position of every 8192nd 1-bit, plus a
/// block scan from the nearest sample.
#[derive(Clone, Debug)]
pub struct SelectDir {
    samples: Vec<u64>,
    built_len: usize,
    total_ones: u64,
}

impl SelectDir {
    pub fn build(bv: &BitVec) -> Self {
        let mut samples = Vec::new();
        let mut seen = 0u64;
        for (wi, w) in bv.words().iter().enumerate() {
            let ones = w.count_ones() as u64;
            let mut next_sample = (samples.len() as u64) * SELECT_SAMPLE as u64 + 1;
            while next_sample <= seen + ones {
                let pos = wi * WORD_BITS + select_in_word(*w, next_sample - seen);
                samples.push(pos as u64);
                next_sample += SELECT_SAMPLE as u64;
            }
            seen += ones;
        }
        SelectDir {
            samples,
            built_len: bv.len(),
            total_ones: seen,
        }
    }

    pub fn overhead_bits(&self) -> u64 {
        (self.samples.len() * WORD_BITS) as u64
    }

    /// Smallest position `i` with `rank1(i) == j`; `j` is 1-based.
    pub fn select1(&self, bv: &BitVec, j: u64) -> usize {
        assert_eq!(self.built_len, bv.len(), "directory built over another vector");
        assert!(
            j >= 1 && j <= self.total_ones,
            "select1({j}) out of range (vector has {} ones)",
            self.total_ones
        );
        let sample = (j - 1) / SELECT_SAMPLE as u64;
        let start = self.samples[sample as usize] as usize;
        // `start` holds 1-bit number `sample * 8192 + 1`; skip the rest.
        let mut remaining = j - sample * SELECT_SAMPLE as u64;
        let words = bv.words();
        let mut wi = start / WORD_BITS;
        let mut w = words[wi] & !0u64 << (start % WORD_BITS);
        loop {
            let ones = w.count_ones() as u64;
            if ones >= remaining {
                return wi * WORD_BITS + select_in_word(w, remaining);
            }
            remaining -= ones;
            wi += 1;
            w = words[wi];
        }
    }
}
