//! End-to-end tests of the command-line surface: CSV contract, manifest
//! round-trips, flag/file precedence, diagnostics, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_noma-ie"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

const HEADER: &str =
    "snr_db,user,scheme,beta_e,a_f,bits,errors_case1,errors_case2,errors_borrowed,ber,source";

#[test]
fn simulate_writes_contract_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "simulate",
        "--snr-db",
        "10",
        "--target-errors",
        "50",
        "--max-bits",
        "20000",
        "--a-f",
        "0.75",
        "--out",
        out,
        "--stem",
        "t",
        "--quiet",
    ];
    let first = run(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    let fu = read(&dir.path().join("t_fu.csv"));
    let nu = read(&dir.path().join("t_nu.csv"));

    let mut lines = fu.lines();
    assert_eq!(lines.next().unwrap(), HEADER);
    let row = lines.next().unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 11);
    assert_eq!(fields[0], "10");
    assert_eq!(fields[1], "fu");
    assert_eq!(fields[2], "noma-ie");
    assert!(fields[3].starts_with("0.4226"), "resolved coefficient: {row}");
    assert_eq!(fields[4], "0.75");
    assert_eq!(fields[10], "sim");
    assert!(!fu.contains('\r'), "line-feed endings only");
    assert!(nu.lines().nth(1).unwrap().split(',').nth(1) == Some("nu"));

    // Bit-for-bit reproducibility of a rerun.
    let rerun_dir = tempfile::tempdir().unwrap();
    let mut args2: Vec<&str> = args.to_vec();
    let pos = args2.iter().position(|a| *a == out).unwrap();
    let rerun_out = rerun_dir.path().to_str().unwrap();
    args2[pos] = rerun_out;
    let second = run(&args2);
    assert!(second.status.success());
    assert_eq!(fu, read(&rerun_dir.path().join("t_fu.csv")));
    assert_eq!(nu, read(&rerun_dir.path().join("t_nu.csv")));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let first = run(&[
        "simulate",
        "--scheme",
        "im-noma",
        "--snr-db",
        "12,18",
        "--a-f",
        "0.8",
        "--beta-e",
        "0.7",
        "--seed",
        "42",
        "--target-errors",
        "40",
        "--max-bits",
        "30000",
        "--out",
        out,
        "--stem",
        "orig",
        "--quiet",
    ]);
    assert!(first.status.success(), "{}", stderr(&first));
    let manifest = dir.path().join("orig.cfg");
    let second = run(&[
        "simulate",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        out,
        "--stem",
        "again",
        "--quiet",
    ]);
    assert!(second.status.success(), "{}", stderr(&second));
    assert_eq!(
        read(&dir.path().join("orig_fu.csv")),
        read(&dir.path().join("again_fu.csv"))
    );
    assert_eq!(
        read(&dir.path().join("orig_nu.csv")),
        read(&dir.path().join("again_nu.csv"))
    );
}

#[test]
fn flags_override_file_entries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("base.cfg");
    std::fs::write(&cfg_path, "a_f = 0.75\nseed = 7\nsnr_db = 10\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let res = run(&[
        "simulate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--a-f",
        "0.9",
        "--target-errors",
        "20",
        "--max-bits",
        "10000",
        "--out",
        out,
        "--stem",
        "o",
        "--quiet",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let manifest = read(&dir.path().join("o.cfg"));
    assert!(manifest.contains("a_f = 0.9"), "{manifest}");
    assert!(manifest.contains("seed = 7"), "{manifest}");
}

#[test]
fn theory_matches_simulate_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = run(&[
        "theory", "--l", "2", "--k-f", "1", "--k-n", "1", "--a-f", "0.9", "--snr-db", "40",
        "--out", out, "--quiet",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let fu = read(&dir.path().join("theory-noma-ie_fu.csv"));
    let mut lines = fu.lines();
    assert_eq!(lines.next().unwrap(), HEADER);
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[5], "0", "no bits are simulated");
    assert_eq!(fields[10], "theory");
    let ber: f64 = fields[9].parse().unwrap();
    assert!(ber > 0.0 && ber < 1e-3);
}

#[test]
fn config_errors_exit_with_code_two() {
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["simulate", "--a-f", "0.4"], "a_F must exceed a_N"),
        (
            vec!["simulate", "--scheme", "nope"],
            "unknown scheme `nope`",
        ),
        (vec!["theory", "--l", "3"], "subblock lengths 2 and 4"),
        (
            vec!["theory", "--scheme", "ofdm-ask"],
            "analytic curves cover only",
        ),
        (vec!["preset", "nosuch"], "unknown preset"),
    ];
    for (args, needle) in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(
            stderr(&out).contains(needle),
            "{args:?} -> {}",
            stderr(&out)
        );
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.cfg");
    std::fs::write(&cfg_path, "mystery = 1\n").unwrap();
    let out = run(&["simulate", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown configuration key `mystery`"));
}

#[test]
fn mapdump_emits_pattern_tables() {
    let out = run(&["mapdump"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9);
    assert_eq!(text.lines().next().unwrap(), "mixed_index_bits,I_F,I_N");

    let out = run(&["mapdump", "--l", "2", "--k-f", "1", "--k-n", "1"]);
    assert_eq!(stdout(&out).lines().count(), 3);

    let out = run(&["mapdump", "--l", "4", "--k-f", "5", "--k-n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table2_prints_and_writes() {
    let out = run(&["table2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "scheme,se,ee_maxpower,ee_realloc");
    assert_eq!(text.lines().count(), 6);
    assert!(text.contains("noma-ie,1.7777777777777777,2.909090909090909,2"));

    let dir = tempfile::tempdir().unwrap();
    let out_arg = dir.path().to_str().unwrap();
    let res = run(&["table2", "--out", out_arg]);
    assert!(res.status.success());
    assert_eq!(read(&dir.path().join("table2.csv")), text);

    let res = run(&["table2", "--a-f", "0.3"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn table2_preset_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = run(&["preset", "table2", "--out", out]);
    assert!(res.status.success(), "{}", stderr(&res));
    let csv = read(&dir.path().join("table2/table2.csv"));
    assert!(csv.starts_with("scheme,se,ee_maxpower,ee_realloc\n"));
}
