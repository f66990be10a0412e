//! End-to-end runs of the installed binary: pipelines, exit codes, column
//! remapping, date bucketing, stats output, and byte-level determinism.

use std::io::Write as _;
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quadricons"))
}

struct Run {
    code: i32,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

fn run(args: &[&str], stdin: Option<&[u8]>) -> Run {
    let mut cmd = bin();
    cmd.args(args)
        .stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("binary should spawn");
    if let Some(bytes) = stdin {
        child
            .stdin
            .take()
            .unwrap()
            .write_all(bytes)
            .expect("stdin should accept the payload");
    }
    let out = child.wait_with_output().expect("binary should exit");
    Run {
        code: out.status.code().expect("no exit code (killed by signal?)"),
        stdout: out.stdout,
        stderr: out.stderr,
    }
}

fn gen_args(seed: &str) -> Vec<&str> {
    vec![
        "gen", "--users", "5", "--tags", "4", "--resources", "3", "--dates", "2",
        "--density", "0.4", "--seed", seed,
    ]
}

#[test]
fn gen_is_deterministic_and_seed_sensitive() {
    let a = run(&gen_args("42"), None);
    let b = run(&gen_args("42"), None);
    let c = run(&gen_args("43"), None);
    assert_eq!(a.code, 0, "stderr: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "same seed must give identical bytes");
    assert_ne!(a.stdout, c.stdout, "different seed should move some cell");
    assert_eq!(
        a.stdout.iter().filter(|&&b| b == b'\n').count(),
        52,
        "seed-42 instance has a pinned quadruple count"
    );
}

#[test]
fn gen_pipes_into_mine_through_stdin() {
    let rows = run(&gen_args("42"), None);
    assert_eq!(rows.code, 0);

    // Reading the same bytes from a file and from stdin must agree.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.tsv");
    std::fs::write(&path, &rows.stdout).unwrap();
    let from_file = run(
        &[
            "mine",
            path.to_str().unwrap(),
            "--min-users",
            "2",
            "--min-tags",
            "2",
        ],
        None,
    );
    let from_stdin = run(
        &["mine", "-", "--min-users", "2", "--min-tags", "2"],
        Some(&rows.stdout),
    );
    assert_eq!(from_file.code, 0);
    assert_eq!(from_stdin.code, 0);
    assert_eq!(from_file.stdout, from_stdin.stdout);

    // The pinned concept count for this pipe.
    let lines: Vec<&[u8]> = from_file.stdout.split(|&b| b == b'\n').filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 7);
    for line in lines {
        let v: serde_json::Value = serde_json::from_slice(line).unwrap();
        for key in ["extent", "modus", "intent", "variable"] {
            assert!(v[key].is_array(), "concept line missing {key}");
        }
        assert!(v["extent"].as_array().unwrap().len() >= 2);
        assert!(v["modus"].as_array().unwrap().len() >= 2);
    }
}

#[test]
fn mine_is_byte_deterministic() {
    let rows = run(&gen_args("7"), None);
    let a = run(&["mine", "-"], Some(&rows.stdout));
    let b = run(&["mine", "-"], Some(&rows.stdout));
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn verify_exits_zero_on_agreement() {
    let rows = run(&gen_args("42"), None);
    let report = run(
        &["verify", "-", "--min-users", "2", "--min-tags", "2"],
        Some(&rows.stdout),
    );
    assert_eq!(report.code, 0, "stderr: {}", String::from_utf8_lossy(&report.stderr));
    let v: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(v["miner_count"], 7);
    assert_eq!(v["oracle_count"], 7);
    assert_eq!(v["missing"].as_array().unwrap().len(), 0);
    assert_eq!(v["extra"].as_array().unwrap().len(), 0);
    assert_eq!(v["soundness_violations"].as_array().unwrap().len(), 0);
}

#[test]
fn input_errors_exit_two() {
    // missing file
    let missing = run(&["stats", "/nonexistent/nope.tsv"], None);
    assert_eq!(missing.code, 2);
    assert!(!missing.stderr.is_empty());

    // no parseable rows
    let garbage = run(&["mine", "-"], Some(b"one column only\n"));
    assert_eq!(garbage.code, 2);

    // an impossible generator spec is rejected before any output
    let empty_dim = run(
        &["gen", "--users", "0", "--tags", "4", "--resources", "3", "--dates", "2"],
        None,
    );
    assert_eq!(empty_dim.code, 2);

    let big = run(
        &[
            "gen", "--users", "40", "--tags", "10", "--resources", "8",
            "--dates", "8", "--density", "0.3", "--seed", "1",
        ],
        None,
    );
    assert_eq!(big.code, 0);
    let refused = run(&["verify", "-", "--cap-bits", "20"], Some(&big.stdout));
    assert_eq!(refused.code, 2);
    assert!(
        String::from_utf8_lossy(&refused.stderr).contains("exceeds the cap"),
        "refusal should say what blew the cap: {}",
        String::from_utf8_lossy(&refused.stderr)
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"], None).code, 0);
    assert_eq!(run(&["--version"], None).code, 0);
    assert_eq!(run(&["mine", "--help"], None).code, 0);
    // unknown flag is a usage error
    assert_eq!(run(&["mine", "-", "--bogus"], Some(b"")).code, 2);
}

#[test]
fn columns_remap_and_header_skips() {
    let data = "\
when,what,who,item\n\
2008-02-21,jazz,alice,track9\n\
2008-02-21,jazz,bob,track9\n";
    let out = run(
        &[
            "stats", "-", "--delimiter", ",", "--skip-header",
            "--user-col", "2", "--tag-col", "1", "--resource-col", "3", "--date-col", "0",
        ],
        Some(data.as_bytes()),
    );
    assert_eq!(out.code, 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["users"], 2);
    assert_eq!(v["tags"], 1);
    assert_eq!(v["resources"], 1);
    assert_eq!(v["dates"], 1);
    assert_eq!(v["quadruples"], 2);
}

#[test]
fn month_granularity_buckets_epoch_dates() {
    // same month, different epoch seconds: bucketing must merge them
    let data = "\
alice\tjazz\ttrack9\t1203552000\n\
bob\tjazz\ttrack9\t1203638400\n";
    let mined = run(
        &["mine", "-", "--date-granularity", "month", "--min-users", "2"],
        Some(data.as_bytes()),
    );
    assert_eq!(mined.code, 0);
    let line = mined.stdout.split(|&b| b == b'\n').next().unwrap();
    let v: serde_json::Value = serde_json::from_slice(line).unwrap();
    assert_eq!(v["variable"], serde_json::json!(["2008-02"]));
    assert_eq!(v["extent"], serde_json::json!(["alice", "bob"]));

    // raw granularity keeps the two timestamps distinct: no 2-user concept
    let raw = run(&["mine", "-", "--min-users", "2"], Some(data.as_bytes()));
    assert_eq!(raw.code, 0);
    assert!(raw.stdout.is_empty());
}

#[test]
fn mine_stats_reports_counts_memory_and_compression() {
    let rows = run(&gen_args("42"), None);
    let mined = run(
        &["mine", "-", "--min-users", "2", "--min-tags", "2", "--stats"],
        Some(&rows.stdout),
    );
    assert_eq!(mined.code, 0);
    let stats: serde_json::Value = serde_json::from_slice(&mined.stderr)
        .unwrap_or_else(|e| panic!("stats stderr should be JSON ({e}): {}", String::from_utf8_lossy(&mined.stderr)));
    assert_eq!(stats["concepts"], 7);
    assert_eq!(stats["initial_generators"].as_u64().unwrap(), 19);
    assert!(stats["peak_memory_kb"].as_u64().unwrap() > 0);
    let quadsets = stats["quadset_count"].as_u64().unwrap();
    assert!(quadsets >= 7, "concepts can never outnumber quadri-sets");
    let compacity = stats["compacity"].as_f64().unwrap();
    assert!(compacity > 0.0 && compacity <= 1.0);
    assert_eq!(compacity, 7.0 / quadsets as f64);
    assert!(stats["total_ms"].is_number());
}

#[test]
fn tsv_output_has_four_comma_joined_columns() {
    let rows = run(&gen_args("42"), None);
    let mined = run(
        &[
            "mine", "-", "--min-users", "2", "--min-tags", "2",
            "--format", "tsv",
        ],
        Some(&rows.stdout),
    );
    assert_eq!(mined.code, 0);
    let text = String::from_utf8(mined.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    for line in lines {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 4, "line was: {line}");
        for col in cols {
            assert!(!col.is_empty());
            for member in col.split(',') {
                assert!(!member.is_empty());
            }
        }
    }
}
