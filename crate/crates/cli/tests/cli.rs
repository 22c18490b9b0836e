use std::io::BufReader;
use std::process::{Command, Output};

use grandmo::BitMatrix;

fn grandmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grandmo"))
        .args(args)
        .env_remove("GRANDMO_THREADS")
        .output()
        .expect("run grandmo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const HEADER: &str = "code,n,k,decoder,p_mode,g,b,ebn0_db,p,interleaver,packets,abandon_mmax,abandon_llast,\
trials,block_errors,bler,ci95,mean_queries,max_queries,mean_err_weight,seed";

#[test]
fn codegen_writes_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("bch");
    let out = grandmo(&["codegen", "--code", "bch", "--out", prefix.to_str().unwrap()]);
    assert!(out.status.success());
    let read = |ext: &str| {
        let f = std::fs::File::open(dir.path().join(format!("bch{ext}"))).unwrap();
        BitMatrix::read_text(BufReader::new(f)).unwrap()
    };
    let (g, h) = (read(".G.txt"), read(".H.txt"));
    assert_eq!((g.rows(), g.cols(), h.rows()), (106, 127, 21));
    assert!(h.mul(&g.transpose()).unwrap().is_zero());
    let meta = std::fs::read_to_string(dir.path().join("bch.meta")).unwrap();
    assert_eq!(meta.trim(), "family=bch n=127 k=106 d=7 seed=none primitive_poly=0x89");
}

#[test]
fn patterns_lists_query_order() {
    let out = grandmo(&[
        "patterns",
        "--n",
        "6",
        "--p",
        "0.1",
        "--g",
        "0.3",
        "--delta-l",
        "2",
        "--limit",
        "4",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(2).map(|l| l.split('\t').collect()).collect();
    assert_eq!(text.lines().nth(1).unwrap(), "index\tm\tl\tcase\tlog_prob\tpattern");
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][5], "000000");
    assert_eq!(rows[1][..4], ["1", "1", "1", "case1s"]);
}

#[test]
fn decode_a_codeword_in_one_query() {
    let zero = "0".repeat(127);
    let out = grandmo(&["decode", "--code", "bch", "--ebn0", "4", "--g", "0.05", "--word", &zero]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("status: decoded"));
    assert!(text.contains("queries: 1\n"));

    let mut y = zero.clone().into_bytes();
    y[10] = b'1';
    let y = String::from_utf8(y).unwrap();
    let out = grandmo(&["decode", "--code", "bch", "--decoder", "bm", "--word", &y]);
    assert!(stdout(&out).contains(&format!("codeword: {zero}")));
}

#[test]
fn simulate_is_deterministic_and_thread_independent() {
    let args = [
        "simulate",
        "--decoder",
        "grandmo,bm",
        "--ebn0",
        "3,4",
        "--g",
        "bsc,0.1",
        "--min-errors",
        "10",
        "--max-trials",
        "600",
        "--seed",
        "9",
    ];
    let a = grandmo(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_grandmo"))
        .args(args)
        .env("GRANDMO_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), HEADER);
    assert_eq!(text.lines().count(), 1 + 8);
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').count(), 21);
        assert!(line.ends_with(",9"));
    }
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nseed = 42\nmax_trials=64\n").unwrap();
    let out = grandmo(&[
        "simulate",
        "--decoder",
        "bm",
        "--ebn0",
        "2",
        "--seed",
        "7",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[20], "42");
    assert_eq!(fields[13], "64");
}

#[test]
fn exit_codes() {
    assert_eq!(grandmo(&["simulate", "--decoder", "ml"]).status.code(), Some(2));
    assert_eq!(grandmo(&["simulate", "--interleaver", "zigzag"]).status.code(), Some(2));
    assert_eq!(grandmo(&["decode", "--word", "0101"]).status.code(), Some(2));
    assert_eq!(grandmo(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        grandmo(&["simulate", "--config", "/nonexistent/run.cfg"]).status.code(),
        Some(3)
    );
    assert_eq!(
        grandmo(&[
            "simulate",
            "--decoder",
            "bm",
            "--ebn0",
            "5",
            "--max-trials",
            "64",
            "--out",
            "/nonexistent/x.csv"
        ])
        .status
        .code(),
        Some(3)
    );
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_grandmo"))
        .args(["simulate", "--decoder", "bm", "--ebn0", "5", "--max-trials", "64"])
        .env("GRANDMO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn interleave_study_rows() {
    let out = grandmo(&[
        "interleave-study",
        "--g",
        "0.05",
        "--ebn0",
        "4",
        "--packets",
        "1,4",
        "--min-errors",
        "5",
        "--max-trials",
        "256",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains(",grandmo,") && rows[0].contains(",none,1,"));
    assert!(rows[1].contains(",bm,") && rows[1].contains(",matrix,1,"));
    assert!(rows[2].contains(",matrix,4,"));
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("buffered_bits=529"));
}
