//! Compressed integer sets over level-wise binary tries.
//!
//! A set S over a universe [0..u) is stored as a binary trie of the
//! ceil(lg u)-bit codes of its elements, one bit vector per level, two bits
//! per node (left-child and right-child presence). The representation
//! supports rank/select/predecessor/successor directly on the compressed
//! form and intersects k sets in a single synchronized descent whose cost
//! adapts to how interleaved the inputs are. A run-compressed variant elides
//! maximal full subtrees (runs of consecutive elements) and marks their
//! roots with the otherwise unused `00` code.
//!
//! Module map:
//!
//! * [`bitvec`] - bit vectors plus the sampled rank/select directories
//!   everything else sits on.
//! * [`measures`] - compression measures (`gap`, `rle`, `trie`, `rtrie`)
//!   and the binomial space bound, for comparing representations.
//! * [`bintrie`] - the plain level-wise trie and its set primitives.
//! * [`runtrie`] - the run-compressed trie.
//! * [`intersect`] - synchronized k-way intersection over both trie kinds,
//!   plus two classical sorted-array algorithms kept as reference oracles.
//! * [`certify`] - partition certificates: the instance-difficulty measures
//!   delta and xi, with validation.
//! * [`parallel`] - multithreaded intersection that splits the descent at a
//!   top trie and stitches per-level outputs back deterministically.
//! * [`family`] - named set families, persistence, query logs, statistics,
//!   and benchmarking; the layer the `trieset` CLI binary drives.

pub mod bintrie;
pub mod bitvec;
pub mod certify;
mod error;
pub mod family;
pub mod intersect;
pub mod measures;
pub mod parallel;
pub mod runtrie;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
