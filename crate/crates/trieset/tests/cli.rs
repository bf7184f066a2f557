//! End-to-end checks of the `trieset` binary: exit codes, stdout shapes,
//! JSON output, and both corpus input formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trieset"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("stdout parses as JSON")
}

const CORPUS: &str = "\
# running example
a: 1 3 7 8 9 10 11 12
b: 2 5 7 12 15
";

fn write_corpus(dir: &Path) -> String {
    let path = dir.join("corpus.txt");
    fs::write(&path, CORPUS).unwrap();
    path.to_str().unwrap().to_string()
}

fn build_family(dir: &Path, extra: &[&str]) -> String {
    let corpus = write_corpus(dir);
    let fam = dir.join("family.tfam").to_str().unwrap().to_string();
    let mut args = vec!["build", &corpus, "-o", &fam, "--universe", "16"];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "build failed: {}", stderr(&out));
    assert!(stdout(&out).contains("built 2 sets"), "{}", stdout(&out));
    fam
}

#[test]
fn help_and_usage_errors() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Usage"));

    let out = run(&["query", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    let out = run(&["stats", "/no/such/family.tfam"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));
    assert!(stderr(&out).contains("family.tfam"));
}

#[test]
fn malformed_corpus_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "a: 1 2 3\nb: 4 oops 6\n").unwrap();
    let fam = dir.path().join("f.tfam");
    let out = run(&[
        "build",
        path.to_str().unwrap(),
        "-o",
        fam.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.txt:2:"), "missing line number: {err}");
    assert!(!fam.exists() || fs::metadata(&fam).unwrap().len() == 0);
}

#[test]
fn stats_json_reconciles_with_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path(), &[]);
    let out = run(&["stats", &fam, "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["universe"], 16);
    assert_eq!(v["kind"], "trie");
    assert_eq!(v["sets"][0]["name"], "a");
    assert_eq!(v["sets"][0]["n"], 8);
    assert_eq!(v["sets"][0]["trie"], 20);
    assert!((v["sets"][0]["bpi_trie"].as_f64().unwrap() - 2.5).abs() < 1e-12);
    let file_bytes = v["totals"]["file_bytes"].as_u64().unwrap();
    assert_eq!(file_bytes, fs::metadata(&fam).unwrap().len());

    // Human-readable variant mentions every set and a total line.
    let out = run(&["stats", &fam]);
    let text = stdout(&out);
    assert!(text.contains("a") && text.contains("b") && text.contains("TOTAL"));
}

#[test]
fn query_handles_good_and_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path(), &[]);
    let log = dir.path().join("q.txt");
    fs::write(&log, "a b\na nosuch\n").unwrap();

    let out = run(&[
        "query",
        &fam,
        log.to_str().unwrap(),
        "--dump",
        "--certify",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["size"], 2);
    assert_eq!(rows[0]["elements"], serde_json::json!([7, 12]));
    assert_eq!(rows[0]["delta"], 8);
    assert_eq!(rows[0]["xi"], 8);
    assert!(rows[1]["error"]
        .as_str()
        .unwrap()
        .contains("nosuch"));
    assert_eq!(v["summary"]["queries"], 2);
    assert_eq!(v["summary"]["errors"], 1);
    assert_eq!(v["summary"]["total_size"], 2);

    // Plain-text output shows the elements and carries the error.
    let out = run(&["query", &fam, log.to_str().unwrap(), "--dump"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("7 12"), "{text}");
    assert!(text.contains("nosuch"), "{text}");

    // Trie output mode and multithreading agree on the size.
    let out = run(&[
        "query",
        &fam,
        log.to_str().unwrap(),
        "--mode",
        "trie",
        "--threads",
        "4",
        "--json",
    ]);
    let v = json(&out);
    assert_eq!(v["rows"][0]["size"], 2);
}

#[test]
fn certify_emits_both_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path(), &[]);
    let log = dir.path().join("q.txt");
    fs::write(&log, "a b\n").unwrap();
    let out = run(&["certify", &fam, log.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v[0]["delta"], 8);
    assert_eq!(v[0]["xi"], 8);
    assert_eq!(v[0]["delta_intervals"].as_array().unwrap().len(), 8);
    let first = &v[0]["delta_intervals"][0];
    assert_eq!(first["lo"], 0);
    assert_eq!(first["hi"], 1);
    assert_eq!(first["label"], "b");
}

#[test]
fn bench_reports_each_timed_pass() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path(), &[]);
    let log = dir.path().join("q.txt");
    fs::write(&log, "a b\n").unwrap();
    let out = run(&[
        "bench",
        &fam,
        log.to_str().unwrap(),
        "--warmups",
        "1",
        "--runs",
        "4",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["rows"][0]["runs_ns"].as_array().unwrap().len(), 4);
    assert!(v["rows"][0]["median_ns"].as_u64().is_some());
    assert_eq!(v["rows"][0]["size"], 2);
}

#[test]
fn run_trie_family_answers_the_same() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path(), &["--kind", "rtrie", "--rank", "sparse"]);
    let log = dir.path().join("q.txt");
    fs::write(&log, "a b\n").unwrap();
    let out = run(&["query", &fam, log.to_str().unwrap(), "--dump", "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["rows"][0]["elements"], serde_json::json!([7, 12]));

    let out = run(&["stats", &fam, "--json"]);
    assert_eq!(json(&out)["kind"], "rtrie");
}

fn setf_bytes(u: u64, sets: &[(&str, &[u32])]) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(b"SETF");
    b.extend_from_slice(&(sets.len() as u64).to_le_bytes());
    b.extend_from_slice(&u.to_le_bytes());
    for (name, vals) in sets {
        b.extend_from_slice(&(name.len() as u16).to_le_bytes());
        b.extend_from_slice(name.as_bytes());
        b.extend_from_slice(&(vals.len() as u64).to_le_bytes());
        for v in *vals {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    b
}

#[test]
fn binary_corpus_is_sniffed_and_ingested() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("sets.setf");
    fs::write(
        &corpus,
        setf_bytes(
            16,
            &[
                ("a", &[1, 3, 7, 8, 9, 10, 11, 12]),
                ("b", &[2, 5, 7, 12, 15]),
            ],
        ),
    )
    .unwrap();
    let fam = dir.path().join("f.tfam");
    let out = run(&[
        "build",
        corpus.to_str().unwrap(),
        "-o",
        fam.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let log = dir.path().join("q.txt");
    fs::write(&log, "a b\n").unwrap();
    let out = run(&["query", fam.to_str().unwrap(), log.to_str().unwrap(), "--dump", "--json"]);
    let v = json(&out);
    assert_eq!(v["rows"][0]["elements"], serde_json::json!([7, 12]));

    // A truncated binary corpus is a hard error, not a silent partial load.
    let full = fs::read(&corpus).unwrap();
    fs::write(&corpus, &full[..full.len() - 3]).unwrap();
    let out = run(&[
        "build",
        corpus.to_str().unwrap(),
        "-o",
        fam.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
