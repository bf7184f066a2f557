//! C ABI over the trieset library.
//!
//! Conventions, shared by every function here:
//!
//! * Handles (`trieset_trie`, `trieset_rtrie`, `trieset_family`) are opaque
//!   pointers owned by the library. Every `*_build`/`*_load` that reports
//!   `TRIESET_OK` transfers ownership of `*out` to the caller, who must
//!   release it with the matching `*_free`. The free functions accept null.
//! * Functions that can fail return a [`trieset_status`]; output parameters
//!   are written only on `TRIESET_OK` unless documented otherwise. On any
//!   other status, [`trieset_last_error`] returns a message for the calling
//!   thread, valid until that thread's next failing call.
//! * Element arrays produced by the intersection functions are allocated
//!   here and must be returned through [`trieset_elements_free`].
//! * Panics never unwind across the boundary; they surface as
//!   `TRIESET_ERR_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};

use trieset::bintrie::{BinaryTrie, BuildOptions};
use trieset::family::{BuildConfig, IngestOptions, SetFamily, TrieKind};
use trieset::intersect::{ac_intersect, ac_intersect_runs, OutputMode};
use trieset::measures::SortedSet;
use trieset::runtrie::RunTrie;
use trieset::Error;

/// Status code of every fallible call.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum trieset_status {
    TRIESET_OK = 0,
    /// A required pointer argument was null.
    TRIESET_ERR_NULL_ARGUMENT = 1,
    /// Malformed input: unsorted elements, out-of-range values, bad sizes.
    TRIESET_ERR_INVALID_INPUT = 2,
    /// The operation needs a directory the handle was built without.
    TRIESET_ERR_MISSING_DIRECTORY = 3,
    /// A query mixed plain-trie and run-trie sets.
    TRIESET_ERR_MIXED_KINDS = 4,
    /// An intersection was asked for fewer than two sets.
    TRIESET_ERR_TOO_FEW_SETS = 5,
    /// A set name is not present in the family.
    TRIESET_ERR_UNKNOWN_SET = 6,
    /// A text corpus failed to parse.
    TRIESET_ERR_PARSE = 7,
    /// A binary payload is malformed.
    TRIESET_ERR_FORMAT = 8,
    /// An underlying I/O operation failed.
    TRIESET_ERR_IO = 9,
    /// A string argument was not valid UTF-8.
    TRIESET_ERR_UTF8 = 10,
    /// The caller's buffer is too small; the required size was reported.
    TRIESET_ERR_BUFFER_TOO_SMALL = 11,
    /// An internal panic was caught at the boundary.
    TRIESET_ERR_PANIC = 12,
}

use trieset_status::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: trieset_status, msg: &str) -> trieset_status {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
    status
}

fn fail_with(e: &Error) -> trieset_status {
    let status = match e {
        Error::InvalidInput(_) => TRIESET_ERR_INVALID_INPUT,
        Error::MissingDirectory(_) => TRIESET_ERR_MISSING_DIRECTORY,
        Error::MixedTrieKinds => TRIESET_ERR_MIXED_KINDS,
        Error::TooFewSets => TRIESET_ERR_TOO_FEW_SETS,
        Error::UnknownSet(_) => TRIESET_ERR_UNKNOWN_SET,
        Error::Parse { .. } => TRIESET_ERR_PARSE,
        Error::Format { .. } => TRIESET_ERR_FORMAT,
        Error::Io(_) => TRIESET_ERR_IO,
    };
    fail(status, &e.to_string())
}

/// Message for the calling thread's most recent failure. Never null; empty
/// before the first failure. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn trieset_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn trieset_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guard<F: FnOnce() -> trieset_status>(f: F) -> trieset_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(TRIESET_ERR_PANIC, "internal panic caught at the C boundary"),
    }
}

/// An immutable set stored as a level-wise binary trie.
#[allow(non_camel_case_types)]
pub struct trieset_trie {
    inner: BinaryTrie,
}

/// An immutable set stored as a run-compressed binary trie.
#[allow(non_camel_case_types)]
pub struct trieset_rtrie {
    inner: RunTrie,
}

/// A named collection of sets sharing one universe.
#[allow(non_camel_case_types)]
pub struct trieset_family {
    inner: SetFamily,
    names: Vec<CString>,
}

unsafe fn input_set(
    elems: *const u64,
    n: usize,
    universe: u64,
) -> Result<SortedSet, trieset_status> {
    if elems.is_null() && n > 0 {
        return Err(fail(TRIESET_ERR_NULL_ARGUMENT, "elems is null"));
    }
    let slice = if n == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(elems, n)
    };
    SortedSet::new(slice.to_vec(), universe).map_err(|e| fail_with(&e))
}

/// Builds a plain-trie set from `n` strictly increasing elements below
/// `universe`. `with_ranks` enables `trieset_trie_rank`; `with_select`
/// additionally speeds up `trieset_trie_select`.
///
/// # Safety
/// `elems` must point to `n` readable `uint64_t` values (or be null when
/// `n == 0`); `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_build(
    elems: *const u64,
    n: usize,
    universe: u64,
    with_ranks: bool,
    with_select: bool,
    out: *mut *mut trieset_trie,
) -> trieset_status {
    guard(|| {
        if out.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "out is null");
        }
        let set = match input_set(elems, n, universe) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let opts = BuildOptions {
            last_level_rank: with_ranks,
            select_samples: with_select,
            ..BuildOptions::default()
        };
        match BinaryTrie::build(&set, opts) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(trieset_trie { inner: t }));
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Releases a trie handle. Null is a no-op.
///
/// # Safety
/// `t` must be a pointer previously returned through `trieset_trie_build`
/// and not freed since.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_free(t: *mut trieset_trie) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of elements; 0 for null.
///
/// # Safety
/// `t` must be a live trie handle or null.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_len(t: *const trieset_trie) -> u64 {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Universe size the set was built over; 0 for null.
///
/// # Safety
/// `t` must be a live trie handle or null.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_universe(t: *const trieset_trie) -> u64 {
    t.as_ref().map_or(0, |t| t.inner.universe())
}

unsafe fn decode_into(
    elems: Vec<u64>,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> trieset_status {
    if written.is_null() {
        return fail(TRIESET_ERR_NULL_ARGUMENT, "written is null");
    }
    *written = elems.len();
    if elems.len() > cap {
        return fail(
            TRIESET_ERR_BUFFER_TOO_SMALL,
            &format!("need room for {} elements, have {cap}", elems.len()),
        );
    }
    if !elems.is_empty() {
        if buf.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "buf is null");
        }
        std::ptr::copy_nonoverlapping(elems.as_ptr(), buf, elems.len());
    }
    TRIESET_OK
}

/// Copies the elements in increasing order into `buf`. `*written` always
/// receives the element count, so a `TRIESET_ERR_BUFFER_TOO_SMALL` reply
/// doubles as a size query (pass `cap == 0`).
///
/// # Safety
/// `t` must be a live trie handle; `buf` must have room for `cap` values;
/// `written` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_decode(
    t: *const trieset_trie,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> trieset_status {
    guard(|| {
        let Some(t) = t.as_ref() else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie is null");
        };
        decode_into(t.inner.decode(), buf, cap, written)
    })
}

/// Number of elements `<= x`. Requires a handle built `with_ranks`.
///
/// # Safety
/// `t` must be a live trie handle; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_rank(
    t: *const trieset_trie,
    x: u64,
    out: *mut u64,
) -> trieset_status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie or out is null");
        };
        if x >= t.inner.universe() {
            return fail(
                TRIESET_ERR_INVALID_INPUT,
                &format!("{x} outside universe [0..{})", t.inner.universe()),
            );
        }
        match t.inner.set_rank(x) {
            Ok(r) => {
                *out = r;
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// The `j`-th smallest element, 1-based.
///
/// # Safety
/// `t` must be a live trie handle; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_select(
    t: *const trieset_trie,
    j: u64,
    out: *mut u64,
) -> trieset_status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie or out is null");
        };
        match t.inner.set_select(j) {
            Ok(v) => {
                *out = v;
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Smallest element `>= x`. `*found` reports whether one exists; `*out` is
/// written only when it does.
///
/// # Safety
/// `t` must be a live trie handle; `out` and `found` must be valid
/// destinations.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_successor(
    t: *const trieset_trie,
    x: u64,
    out: *mut u64,
    found: *mut bool,
) -> trieset_status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null() || found.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie, out or found is null");
        };
        if x >= t.inner.universe() {
            return fail(
                TRIESET_ERR_INVALID_INPUT,
                &format!("{x} outside universe [0..{})", t.inner.universe()),
            );
        }
        match t.inner.successor(x) {
            Some(v) => {
                *out = v;
                *found = true;
            }
            None => *found = false,
        }
        TRIESET_OK
    })
}

/// Largest element `<= x`. Same contract as [`trieset_trie_successor`].
///
/// # Safety
/// `t` must be a live trie handle; `out` and `found` must be valid
/// destinations.
#[no_mangle]
pub unsafe extern "C" fn trieset_trie_predecessor(
    t: *const trieset_trie,
    x: u64,
    out: *mut u64,
    found: *mut bool,
) -> trieset_status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null() || found.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie, out or found is null");
        };
        if x >= t.inner.universe() {
            return fail(
                TRIESET_ERR_INVALID_INPUT,
                &format!("{x} outside universe [0..{})", t.inner.universe()),
            );
        }
        match t.inner.predecessor(x) {
            Some(v) => {
                *out = v;
                *found = true;
            }
            None => *found = false,
        }
        TRIESET_OK
    })
}

fn leak_elements(elems: Vec<u64>, out: *mut *mut u64, out_len: *mut usize) -> trieset_status {
    unsafe {
        *out_len = elems.len();
        *out = if elems.is_empty() {
            std::ptr::null_mut()
        } else {
            Box::into_raw(elems.into_boxed_slice()) as *mut u64
        };
    }
    TRIESET_OK
}

/// Releases an element array returned by one of the intersection calls.
/// `ptr` may be null when `len == 0`.
///
/// # Safety
/// `ptr`/`len` must be exactly the pair reported by the producing call.
#[no_mangle]
pub unsafe extern "C" fn trieset_elements_free(ptr: *mut u64, len: usize) {
    if !ptr.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(ptr, len)));
    }
}

/// Intersects `k >= 2` plain-trie sets over one universe. On success the
/// library allocates `*out`/`*out_len`; release with
/// [`trieset_elements_free`].
///
/// # Safety
/// `tries` must point to `k` live trie handles; `out` and `out_len` must
/// be valid destinations.
#[no_mangle]
pub unsafe extern "C" fn trieset_intersect(
    tries: *const *const trieset_trie,
    k: usize,
    out: *mut *mut u64,
    out_len: *mut usize,
) -> trieset_status {
    guard(|| {
        if tries.is_null() || out.is_null() || out_len.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "tries, out or out_len is null");
        }
        let handles = std::slice::from_raw_parts(tries, k);
        let mut refs = Vec::with_capacity(k);
        for (i, &h) in handles.iter().enumerate() {
            match h.as_ref() {
                Some(t) => refs.push(&t.inner),
                None => return fail(TRIESET_ERR_NULL_ARGUMENT, &format!("tries[{i}] is null")),
            }
        }
        match ac_intersect(&refs, OutputMode::Elements) {
            Ok((result, _)) => leak_elements(result.into_elements(), out, out_len),
            Err(e) => fail_with(&e),
        }
    })
}

/// Builds a run-trie set; `with_ranks` enables `trieset_rtrie_rank`.
///
/// # Safety
/// Same contract as [`trieset_trie_build`].
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_build(
    elems: *const u64,
    n: usize,
    universe: u64,
    with_ranks: bool,
    out: *mut *mut trieset_rtrie,
) -> trieset_status {
    guard(|| {
        if out.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "out is null");
        }
        let set = match input_set(elems, n, universe) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let opts = BuildOptions {
            last_level_rank: with_ranks,
            ..BuildOptions::default()
        };
        match RunTrie::build(&set, opts) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(trieset_rtrie { inner: t }));
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Releases a run-trie handle. Null is a no-op.
///
/// # Safety
/// `t` must be a pointer previously returned through
/// `trieset_rtrie_build` and not freed since.
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_free(t: *mut trieset_rtrie) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of elements; 0 for null.
///
/// # Safety
/// `t` must be a live run-trie handle or null.
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_len(t: *const trieset_rtrie) -> u64 {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Universe size the set was built over; 0 for null.
///
/// # Safety
/// `t` must be a live run-trie handle or null.
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_universe(t: *const trieset_rtrie) -> u64 {
    t.as_ref().map_or(0, |t| t.inner.universe())
}

/// Copies the elements in increasing order; same contract as
/// [`trieset_trie_decode`].
///
/// # Safety
/// Same contract as [`trieset_trie_decode`].
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_decode(
    t: *const trieset_rtrie,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> trieset_status {
    guard(|| {
        let Some(t) = t.as_ref() else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie is null");
        };
        decode_into(t.inner.decode(), buf, cap, written)
    })
}

/// Membership test.
///
/// # Safety
/// `t` must be a live run-trie handle; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_contains(
    t: *const trieset_rtrie,
    x: u64,
    out: *mut bool,
) -> trieset_status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie or out is null");
        };
        if x >= t.inner.universe() {
            return fail(
                TRIESET_ERR_INVALID_INPUT,
                &format!("{x} outside universe [0..{})", t.inner.universe()),
            );
        }
        *out = t.inner.contains(x);
        TRIESET_OK
    })
}

/// Number of elements `<= x`. Requires a handle built `with_ranks`.
///
/// # Safety
/// `t` must be a live run-trie handle; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_rank(
    t: *const trieset_rtrie,
    x: u64,
    out: *mut u64,
) -> trieset_status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie or out is null");
        };
        if x >= t.inner.universe() {
            return fail(
                TRIESET_ERR_INVALID_INPUT,
                &format!("{x} outside universe [0..{})", t.inner.universe()),
            );
        }
        match t.inner.run_rank(x) {
            Ok(r) => {
                *out = r;
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Largest element `<= x`; same contract as [`trieset_trie_predecessor`].
///
/// # Safety
/// Same contract as [`trieset_trie_predecessor`].
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_predecessor(
    t: *const trieset_rtrie,
    x: u64,
    out: *mut u64,
    found: *mut bool,
) -> trieset_status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null() || found.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "trie, out or found is null");
        };
        if x >= t.inner.universe() {
            return fail(
                TRIESET_ERR_INVALID_INPUT,
                &format!("{x} outside universe [0..{})", t.inner.universe()),
            );
        }
        match t.inner.run_predecessor(x) {
            Some(v) => {
                *out = v;
                *found = true;
            }
            None => *found = false,
        }
        TRIESET_OK
    })
}

/// Intersects `k >= 2` run-trie sets; same contract as
/// [`trieset_intersect`].
///
/// # Safety
/// Same contract as [`trieset_intersect`].
#[no_mangle]
pub unsafe extern "C" fn trieset_rtrie_intersect(
    tries: *const *const trieset_rtrie,
    k: usize,
    out: *mut *mut u64,
    out_len: *mut usize,
) -> trieset_status {
    guard(|| {
        if tries.is_null() || out.is_null() || out_len.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "tries, out or out_len is null");
        }
        let handles = std::slice::from_raw_parts(tries, k);
        let mut refs = Vec::with_capacity(k);
        for (i, &h) in handles.iter().enumerate() {
            match h.as_ref() {
                Some(t) => refs.push(&t.inner),
                None => return fail(TRIESET_ERR_NULL_ARGUMENT, &format!("tries[{i}] is null")),
            }
        }
        match ac_intersect_runs(&refs, OutputMode::Elements) {
            Ok((result, _)) => leak_elements(result.into_elements(), out, out_len),
            Err(e) => fail_with(&e),
        }
    })
}

fn wrap_family(inner: SetFamily) -> *mut trieset_family {
    let names = inner
        .names()
        .iter()
        .map(|n| CString::new(n.as_str()).unwrap_or_default())
        .collect();
    Box::into_raw(Box::new(trieset_family { inner, names }))
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, trieset_status> {
    if p.is_null() {
        return Err(fail(TRIESET_ERR_NULL_ARGUMENT, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TRIESET_ERR_UTF8, &format!("{what} is not valid UTF-8")))
}

/// Parses a text corpus (`name: v1 v2 ...` lines, `#` comments) into a
/// family of tries. `run_tries` selects the run-compressed representation;
/// `universe` fixes the universe, or infers it from the data when 0.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_from_text(
    text: *const c_char,
    run_tries: bool,
    universe: u64,
    out: *mut *mut trieset_family,
) -> trieset_status {
    guard(|| {
        if out.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "out is null");
        }
        let text = match cstr(text, "text") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let opts = IngestOptions {
            config: BuildConfig {
                kind: if run_tries { TrieKind::Run } else { TrieKind::Plain },
                ..BuildConfig::default()
            },
            universe: (universe != 0).then_some(universe),
            ..IngestOptions::default()
        };
        match SetFamily::ingest_text(Cursor::new(text), "text", &opts) {
            Ok(f) => {
                *out = wrap_family(f);
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Loads a family container from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_load(
    path: *const c_char,
    out: *mut *mut trieset_family,
) -> trieset_status {
    guard(|| {
        if out.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "out is null");
        }
        let path = match cstr(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) => return fail(TRIESET_ERR_IO, &format!("{path}: {e}")),
        };
        match SetFamily::load(BufReader::new(file)) {
            Ok(f) => {
                *out = wrap_family(f);
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Writes a family container to a file, replacing any existing content.
///
/// # Safety
/// `f` must be a live family handle; `path` must be a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_save(
    f: *const trieset_family,
    path: *const c_char,
) -> trieset_status {
    guard(|| {
        let Some(f) = f.as_ref() else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "family is null");
        };
        let path = match cstr(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let file = match File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(TRIESET_ERR_IO, &format!("{path}: {e}")),
        };
        let mut w = BufWriter::new(file);
        if let Err(e) = f.inner.save(&mut w).and_then(|()| w.flush()) {
            return fail(TRIESET_ERR_IO, &e.to_string());
        }
        TRIESET_OK
    })
}

/// Releases a family handle. Null is a no-op.
///
/// # Safety
/// `f` must be a pointer previously returned by a family constructor and
/// not freed since.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_free(f: *mut trieset_family) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of member sets; 0 for null.
///
/// # Safety
/// `f` must be a live family handle or null.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_count(f: *const trieset_family) -> usize {
    f.as_ref().map_or(0, |f| f.inner.len())
}

/// Shared universe size; 0 for null.
///
/// # Safety
/// `f` must be a live family handle or null.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_universe(f: *const trieset_family) -> u64 {
    f.as_ref().map_or(0, |f| f.inner.universe())
}

/// Name of the `i`-th set, or null when `i` is out of range. The pointer
/// stays valid while the family handle lives.
///
/// # Safety
/// `f` must be a live family handle or null.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_name(
    f: *const trieset_family,
    i: usize,
) -> *const c_char {
    f.as_ref()
        .and_then(|f| f.names.get(i))
        .map_or(std::ptr::null(), |n| n.as_ptr())
}

/// Number of elements in the named set.
///
/// # Safety
/// `f` must be a live family handle; `name` must be NUL-terminated; `out`
/// must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_set_len(
    f: *const trieset_family,
    name: *const c_char,
    out: *mut u64,
) -> trieset_status {
    guard(|| {
        let (Some(f), false) = (f.as_ref(), out.is_null()) else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "family or out is null");
        };
        let name = match cstr(name, "name") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match f.inner.decode_set(name) {
            Ok(elems) => {
                *out = elems.len() as u64;
                TRIESET_OK
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Intersects `k >= 2` member sets by name with `threads` workers
/// (0 uses all available cores). Allocation contract as
/// [`trieset_intersect`].
///
/// # Safety
/// `names` must point to `k` NUL-terminated strings; `out` and `out_len`
/// must be valid destinations.
#[no_mangle]
pub unsafe extern "C" fn trieset_family_intersect(
    f: *const trieset_family,
    names: *const *const c_char,
    k: usize,
    threads: usize,
    out: *mut *mut u64,
    out_len: *mut usize,
) -> trieset_status {
    guard(|| {
        let Some(f) = f.as_ref() else {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "family is null");
        };
        if names.is_null() || out.is_null() || out_len.is_null() {
            return fail(TRIESET_ERR_NULL_ARGUMENT, "names, out or out_len is null");
        }
        let raw = std::slice::from_raw_parts(names, k);
        let mut resolved = Vec::with_capacity(k);
        for (i, &p) in raw.iter().enumerate() {
            match cstr(p, &format!("names[{i}]")) {
                Ok(s) => resolved.push(s),
                Err(status) => return status,
            }
        }
        match f.inner.intersect(&resolved, OutputMode::Elements, threads) {
            Ok(answer) => leak_elements(answer.elements.unwrap_or_default(), out, out_len),
            Err(e) => fail_with(&e),
        }
    })
}
