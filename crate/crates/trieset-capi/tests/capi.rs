//! Exercises the C ABI from Rust, then compiles and runs a small C client
//! against the committed header and the staticlib artifact.

use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use trieset_capi::trieset_status::*;
use trieset_capi::*;

const A: [u64; 8] = [1, 3, 7, 8, 9, 10, 11, 12];
const B: [u64; 5] = [2, 5, 7, 12, 15];

fn build_plain(elems: &[u64], with_ranks: bool, with_select: bool) -> *mut trieset_trie {
    let mut t = ptr::null_mut();
    let status =
        unsafe { trieset_trie_build(elems.as_ptr(), elems.len(), 16, with_ranks, with_select, &mut t) };
    assert_eq!(status, TRIESET_OK);
    assert!(!t.is_null());
    t
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(trieset_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn plain_trie_round_trip_and_point_queries() {
    unsafe {
        let t = build_plain(&A, true, true);
        assert_eq!(trieset_trie_len(t), 8);
        assert_eq!(trieset_trie_universe(t), 16);

        // Size query, then the real decode.
        let mut written = 0usize;
        assert_eq!(
            trieset_trie_decode(t, ptr::null_mut(), 0, &mut written),
            TRIESET_ERR_BUFFER_TOO_SMALL
        );
        assert_eq!(written, 8);
        let mut buf = [0u64; 8];
        assert_eq!(
            trieset_trie_decode(t, buf.as_mut_ptr(), buf.len(), &mut written),
            TRIESET_OK
        );
        assert_eq!(buf, A);

        let mut r = 0u64;
        assert_eq!(trieset_trie_rank(t, 7, &mut r), TRIESET_OK);
        assert_eq!(r, 3);
        assert_eq!(trieset_trie_rank(t, 16, &mut r), TRIESET_ERR_INVALID_INPUT);
        assert!(last_error().contains("universe"));

        let mut v = 0u64;
        assert_eq!(trieset_trie_select(t, 4, &mut v), TRIESET_OK);
        assert_eq!(v, 8);
        assert_eq!(trieset_trie_select(t, 9, &mut v), TRIESET_ERR_INVALID_INPUT);

        let mut found = false;
        assert_eq!(trieset_trie_successor(t, 4, &mut v, &mut found), TRIESET_OK);
        assert!(found);
        assert_eq!(v, 7);
        assert_eq!(trieset_trie_successor(t, 13, &mut v, &mut found), TRIESET_OK);
        assert!(!found);
        assert_eq!(trieset_trie_predecessor(t, 0, &mut v, &mut found), TRIESET_OK);
        assert!(!found);
        assert_eq!(trieset_trie_predecessor(t, 6, &mut v, &mut found), TRIESET_OK);
        assert!(found);
        assert_eq!(v, 3);

        trieset_trie_free(t);
        trieset_trie_free(ptr::null_mut());
    }
}

#[test]
fn build_rejects_bad_input_with_messages() {
    unsafe {
        let mut t = ptr::null_mut();
        let unsorted = [3u64, 1];
        assert_eq!(
            trieset_trie_build(unsorted.as_ptr(), 2, 16, false, false, &mut t),
            TRIESET_ERR_INVALID_INPUT
        );
        assert!(last_error().contains("increasing"), "{}", last_error());

        assert_eq!(
            trieset_trie_build(ptr::null(), 0, 16, false, false, &mut t),
            TRIESET_ERR_INVALID_INPUT,
            "empty sets have no trie"
        );
        assert_eq!(
            trieset_trie_build(A.as_ptr(), A.len(), 16, false, false, ptr::null_mut()),
            TRIESET_ERR_NULL_ARGUMENT
        );

        let good = build_plain(&A, false, false);
        let mut r = 0u64;
        assert_eq!(
            trieset_trie_rank(good, 7, &mut r),
            TRIESET_ERR_MISSING_DIRECTORY
        );
        trieset_trie_free(good);
    }
}

#[test]
fn intersections_allocate_and_free() {
    unsafe {
        let a = build_plain(&A, false, false);
        let b = build_plain(&B, false, false);
        let tries = [a as *const trieset_trie, b as *const trieset_trie];
        let mut out = ptr::null_mut();
        let mut len = 0usize;
        assert_eq!(
            trieset_intersect(tries.as_ptr(), 2, &mut out, &mut len),
            TRIESET_OK
        );
        assert_eq!(std::slice::from_raw_parts(out, len), &[7, 12]);
        trieset_elements_free(out, len);

        assert_eq!(
            trieset_intersect(tries.as_ptr(), 1, &mut out, &mut len),
            TRIESET_ERR_TOO_FEW_SETS
        );
        let with_null = [a as *const trieset_trie, ptr::null()];
        assert_eq!(
            trieset_intersect(with_null.as_ptr(), 2, &mut out, &mut len),
            TRIESET_ERR_NULL_ARGUMENT
        );

        // Disjoint sets produce a null/zero pair that free accepts.
        let c_elems = [0u64, 4];
        let mut c = ptr::null_mut();
        assert_eq!(
            trieset_trie_build(c_elems.as_ptr(), 2, 16, false, false, &mut c),
            TRIESET_OK
        );
        let disjoint = [a as *const trieset_trie, c as *const trieset_trie];
        assert_eq!(
            trieset_intersect(disjoint.as_ptr(), 2, &mut out, &mut len),
            TRIESET_OK
        );
        assert_eq!(len, 0);
        assert!(out.is_null());
        trieset_elements_free(out, len);

        trieset_trie_free(a);
        trieset_trie_free(b);
        trieset_trie_free(c);
    }
}

#[test]
fn run_tries_mirror_the_plain_interface() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(
            trieset_rtrie_build(A.as_ptr(), A.len(), 16, true, &mut a),
            TRIESET_OK
        );
        let mut b = ptr::null_mut();
        assert_eq!(
            trieset_rtrie_build(B.as_ptr(), B.len(), 16, false, &mut b),
            TRIESET_OK
        );
        assert_eq!(trieset_rtrie_len(a), 8);
        assert_eq!(trieset_rtrie_universe(a), 16);

        let mut hit = false;
        assert_eq!(trieset_rtrie_contains(a, 9, &mut hit), TRIESET_OK);
        assert!(hit);
        assert_eq!(trieset_rtrie_contains(a, 6, &mut hit), TRIESET_OK);
        assert!(!hit);

        let mut r = 0u64;
        assert_eq!(trieset_rtrie_rank(a, 10, &mut r), TRIESET_OK);
        assert_eq!(r, 6);
        assert_eq!(trieset_rtrie_rank(b, 10, &mut r), TRIESET_ERR_MISSING_DIRECTORY);

        let mut v = 0u64;
        let mut found = false;
        assert_eq!(trieset_rtrie_predecessor(a, 6, &mut v, &mut found), TRIESET_OK);
        assert!(found);
        assert_eq!(v, 3);

        let mut written = 0usize;
        let mut buf = [0u64; 8];
        assert_eq!(
            trieset_rtrie_decode(a, buf.as_mut_ptr(), buf.len(), &mut written),
            TRIESET_OK
        );
        assert_eq!(buf, A);

        let tries = [a as *const trieset_rtrie, b as *const trieset_rtrie];
        let mut out = ptr::null_mut();
        let mut len = 0usize;
        assert_eq!(
            trieset_rtrie_intersect(tries.as_ptr(), 2, &mut out, &mut len),
            TRIESET_OK
        );
        assert_eq!(std::slice::from_raw_parts(out, len), &[7, 12]);
        trieset_elements_free(out, len);

        trieset_rtrie_free(a);
        trieset_rtrie_free(b);
    }
}

#[test]
fn families_parse_query_and_persist() {
    unsafe {
        let text = CString::new("a: 1 3 7 8 9 10 11 12\nb: 2 5 7 12 15\n").unwrap();
        let mut fam = ptr::null_mut();
        assert_eq!(
            trieset_family_from_text(text.as_ptr(), true, 16, &mut fam),
            TRIESET_OK
        );
        assert_eq!(trieset_family_count(fam), 2);
        assert_eq!(trieset_family_universe(fam), 16);
        let name0 = trieset_family_name(fam, 0);
        assert_eq!(CStr::from_ptr(name0).to_str().unwrap(), "a");
        assert!(trieset_family_name(fam, 2).is_null());

        let a = CString::new("a").unwrap();
        let mut n = 0u64;
        assert_eq!(trieset_family_set_len(fam, a.as_ptr(), &mut n), TRIESET_OK);
        assert_eq!(n, 8);
        let nosuch = CString::new("nosuch").unwrap();
        assert_eq!(
            trieset_family_set_len(fam, nosuch.as_ptr(), &mut n),
            TRIESET_ERR_UNKNOWN_SET
        );

        let b = CString::new("b").unwrap();
        let names = [a.as_ptr(), b.as_ptr()];
        let mut out = ptr::null_mut();
        let mut len = 0usize;
        assert_eq!(
            trieset_family_intersect(fam, names.as_ptr(), 2, 1, &mut out, &mut len),
            TRIESET_OK
        );
        assert_eq!(std::slice::from_raw_parts(out, len), &[7, 12]);
        trieset_elements_free(out, len);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("f.tfam").to_str().unwrap()).unwrap();
        assert_eq!(trieset_family_save(fam, path.as_ptr()), TRIESET_OK);
        let mut reloaded = ptr::null_mut();
        assert_eq!(trieset_family_load(path.as_ptr(), &mut reloaded), TRIESET_OK);
        assert_eq!(trieset_family_count(reloaded), 2);
        assert_eq!(
            trieset_family_intersect(reloaded, names.as_ptr(), 2, 1, &mut out, &mut len),
            TRIESET_OK
        );
        assert_eq!(std::slice::from_raw_parts(out, len), &[7, 12]);
        trieset_elements_free(out, len);
        trieset_family_free(reloaded);
        trieset_family_free(fam);

        let missing = CString::new("/no/such/file.tfam").unwrap();
        assert_eq!(
            trieset_family_load(missing.as_ptr(), &mut reloaded),
            TRIESET_ERR_IO
        );

        // A universe too small for the data is rejected at parse time.
        let mut bad = ptr::null_mut();
        assert_eq!(
            trieset_family_from_text(text.as_ptr(), false, 4, &mut bad),
            TRIESET_ERR_PARSE
        );
    }
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(trieset_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

const C_CLIENT: &str = r#"
#include <stdio.h>
#include <string.h>
#include "trieset.h"

int main(void) {
    uint64_t a_elems[] = {1, 3, 7, 8, 9, 10, 11, 12};
    uint64_t b_elems[] = {2, 5, 7, 12, 15};
    trieset_trie *a = NULL, *b = NULL;
    if (trieset_trie_build(a_elems, 8, 16, true, true, &a) != TRIESET_OK) return 1;
    if (trieset_trie_build(b_elems, 5, 16, false, false, &b) != TRIESET_OK) return 2;

    const trieset_trie *tries[2] = {a, b};
    uint64_t *out = NULL;
    size_t out_len = 0;
    if (trieset_intersect(tries, 2, &out, &out_len) != TRIESET_OK) return 3;
    if (out_len != 2 || out[0] != 7 || out[1] != 12) return 4;
    trieset_elements_free(out, out_len);

    uint64_t r = 0;
    if (trieset_trie_rank(a, 7, &r) != TRIESET_OK || r != 3) return 5;
    if (trieset_trie_rank(b, 7, &r) != TRIESET_ERR_MISSING_DIRECTORY) return 6;
    if (strlen(trieset_last_error()) == 0) return 7;

    trieset_trie_free(a);
    trieset_trie_free(b);
    printf("ok\n");
    return 0;
}
"#;

#[test]
fn c_client_compiles_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let lib = exe
        .parent()
        .and_then(|deps| deps.parent())
        .map(|debug| debug.join("libtrieset_capi.a"));
    let Some(lib) = lib.filter(|p| p.exists()) else {
        eprintln!("staticlib not found next to the test binary; skipping C client");
        return;
    };
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    std::fs::write(&src, C_CLIENT).unwrap();
    let bin = dir.path().join("client");

    let compile = Command::new("gcc")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .output();
    let compile = match compile {
        Ok(out) => out,
        Err(e) => {
            eprintln!("gcc unavailable ({e}); skipping C client");
            return;
        }
    };
    assert!(
        compile.status.success(),
        "C client failed to compile: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().unwrap();
    assert!(
        run.status.success(),
        "C client exited with {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
