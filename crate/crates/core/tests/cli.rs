use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sgsn::data::load_libsvm;
use tempfile::TempDir;

fn sgsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgsn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_auc(dir: &TempDir) -> PathBuf {
    let out = dir.path().join("ex1.txt");
    let o = sgsn(&[
        "gen",
        "--task",
        "auc",
        "--q",
        "100",
        "--n",
        "20",
        "--p",
        "0.2",
        "--r",
        "0",
        "--seed",
        "7",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn gen_auc_writes_dataset_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let path = gen_auc(&dir);
    let ds = load_libsvm(&path).unwrap();
    assert_eq!(ds.n_samples(), 100);
    assert_eq!(ds.n_features(), 20);
    assert_eq!(
        ds.binary_labels()
            .unwrap()
            .iter()
            .filter(|&&y| y > 0.0)
            .count(),
        20
    );

    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ex1.txt.json")).unwrap())
            .unwrap();
    assert_eq!(side["q_plus"], 20);
    assert_eq!(side["seed"], 7);
}

#[test]
fn gen_mlc_shapes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex3.txt");
    let o = sgsn(&[
        "gen",
        "--task",
        "mlc",
        "--q",
        "50",
        "--d",
        "10",
        "--l",
        "3",
        "--seed",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let ds = load_libsvm(&out).unwrap();
    assert_eq!(ds.n_samples(), 50);
    assert_eq!(ds.n_features(), 10);
    assert_eq!(ds.label_matrix().n_cols(), 3);
}

#[test]
fn gen_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.txt");
    assert_eq!(
        code(&sgsn(&["gen", "--task", "auc", "--q", "10", "--n", "2"])),
        2
    );
    let o = sgsn(&[
        "gen",
        "--task",
        "auc",
        "--q",
        "10",
        "--n",
        "2",
        "--l",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert_eq!(
        code(&sgsn(&[
            "gen",
            "--task",
            "mlc",
            "--q",
            "10",
            "--d",
            "2",
            "--out",
            s(&out)
        ])),
        2
    );
}

#[test]
fn max_iter_zero_exits_3_with_header_only() {
    let dir = TempDir::new().unwrap();
    let data = gen_auc(&dir);
    let trace = dir.path().join("t.csv");
    let o = sgsn(&[
        "solve",
        "--task",
        "auc",
        "--data",
        s(&data),
        "--max-iter",
        "0",
        "--trace",
        s(&trace),
    ]);
    assert_eq!(code(&o), 3);
    assert_eq!(
        std::fs::read_to_string(&trace).unwrap(),
        "k,F,vdo,support,step,alpha,cg_iters,wall_ns\n"
    );
}

#[test]
fn solve_is_deterministic_and_consistent() {
    let dir = TempDir::new().unwrap();
    let data = gen_auc(&dir);
    let run = |name: &str| {
        let trace = dir.path().join(format!("{name}.csv"));
        let summary = dir.path().join(format!("{name}.json"));
        let o = sgsn(&[
            "solve",
            "--task",
            "auc",
            "--data",
            s(&data),
            "--seed",
            "7",
            "--trace",
            s(&trace),
            "--summary",
            s(&summary),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read_to_string(trace).unwrap(),
            std::fs::read_to_string(summary).unwrap(),
        )
    };
    let (t1, s1) = run("a");
    let (t2, _) = run("b");
    assert_eq!(t1, t2);

    let rows: Vec<Vec<&str>> = t1.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!(!rows.is_empty());
    let f: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] <= w[0]), "F must not increase");

    let summary: serde_json::Value = serde_json::from_str(&s1).unwrap();
    let last_vdo: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert_eq!(summary["vdo_final"].as_f64().unwrap(), last_vdo);
    assert_eq!(summary["status"], "converged");
    let pos: Vec<usize> = [
        "\"task\"",
        "\"dataset\"",
        "\"solver\"",
        "\"config\"",
        "\"F_star\"",
        "\"status\"",
    ]
    .iter()
    .map(|k| s1.find(k).unwrap())
    .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "summary key order");
}

#[test]
fn infeasible_tau_is_rejected_with_bound() {
    let dir = TempDir::new().unwrap();
    let data = gen_auc(&dir);
    let o = sgsn(&["solve", "--task", "auc", "--data", s(&data), "--tau", "10"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1/ell_h"));
}

#[test]
fn lambda1_needs_mlc() {
    let dir = TempDir::new().unwrap();
    let data = gen_auc(&dir);
    let o = sgsn(&[
        "solve",
        "--task",
        "auc",
        "--data",
        s(&data),
        "--lambda1",
        "1",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_data_is_internal_error() {
    let o = sgsn(&["solve", "--task", "auc", "--data", "/nonexistent/file.txt"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn solve_mlc_and_pg() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex3.txt");
    assert_eq!(
        code(&sgsn(&[
            "gen",
            "--task",
            "mlc",
            "--q",
            "40",
            "--d",
            "5",
            "--l",
            "2",
            "--seed",
            "2",
            "--out",
            s(&out),
        ])),
        0
    );
    let o = sgsn(&[
        "solve",
        "--task",
        "mlc",
        "--data",
        s(&out),
        "--lambda1",
        "0.25",
    ]);
    assert!(
        matches!(code(&o), 0 | 3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["metric_name"], "hamming_loss");
    assert_eq!(summary["n"], 10);

    let data = gen_auc(&dir);
    let o = sgsn(&[
        "solve",
        "--task",
        "auc",
        "--data",
        s(&data),
        "--solver",
        "pg",
    ]);
    assert!(matches!(code(&o), 0 | 3));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["solver"], "pg");
}

#[test]
fn bench_rows_and_determinism() {
    let dir = TempDir::new().unwrap();
    let data = gen_auc(&dir);
    let run = || {
        let o = sgsn(&[
            "bench",
            "--task",
            "auc",
            "--data",
            s(&data),
            "--folds",
            "5",
            "--seed",
            "3",
            "--jobs",
            "2",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    let kinds: Vec<&str> = a
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(kinds, ["fold", "fold", "fold", "fold", "fold", "mean"]);
}

#[test]
fn bench_rejects_more_folds_than_samples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tiny.txt");
    std::fs::write(&out, "+1 1:1\n-1 1:-1\n+1 1:2\n").unwrap();
    let o = sgsn(&["bench", "--task", "auc", "--data", s(&out), "--folds", "5"]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("folds"));
}

#[test]
fn bench_sweep_emits_candidates_and_selection() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex3.txt");
    sgsn(&[
        "gen",
        "--task",
        "mlc",
        "--q",
        "60",
        "--d",
        "6",
        "--l",
        "2",
        "--seed",
        "4",
        "--out",
        s(&out),
    ]);
    let o = sgsn(&[
        "bench",
        "--task",
        "mlc",
        "--data",
        s(&out),
        "--holdout",
        "0.9",
        "--sweep-lambda1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let kinds: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(kinds.len(), 14);
    assert_eq!(kinds.iter().filter(|&&k| k == "candidate").count(), 13);
    assert_eq!(kinds[13], "selected");

    let o = sgsn(&[
        "bench",
        "--task",
        "auc",
        "--data",
        s(&out),
        "--sweep-lambda1",
    ]);
    assert_eq!(code(&o), 2);
}
