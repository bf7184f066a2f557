use thiserror::Error;

/// Errors shared across the library.
///
/// Out-of-range *indices* (a bit index past the end of a vector, a pair
/// index past the last node) are caller bugs and panic instead; everything
/// that can legitimately arrive from the outside world is an `Error`.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented precondition (unsorted, duplicate,
    /// out of universe, empty where an element is required, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation needs an optional directory that this structure was
    /// built without.
    #[error("operation requires {0}; rebuild with the corresponding option")]
    MissingDirectory(&'static str),

    /// A query mixed plain and run tries.
    #[error("query mixes plain-trie and run-trie sets")]
    MixedTrieKinds,

    /// Intersection called with fewer than two sets.
    #[error("intersection requires at least two sets")]
    TooFewSets,

    /// A query referenced a name the family does not contain.
    #[error("unknown set name: {0}")]
    UnknownSet(String),

    /// A text input failed to parse; carries the 1-based line number.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A binary payload is malformed (bad magic, truncated, bad tag, ...).
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
