//! End-to-end checks of the installed binary surface.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lapcond"))
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn gen_writes_readable_mtx() {
    let dir = tempdir();
    let out = dir.path().join("grid.mtx");
    let status = bin()
        .args([
            "gen", "--kind", "grid2d", "--n", "16", "--seed", "0", "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let g = lapcond_cli::mtx::ingest_mtx(&out).unwrap();
    assert_eq!(g.n(), 16);
    assert_eq!(g.m(), 24);
}

#[test]
fn gen_ring_and_ws_flags() {
    let dir = tempdir();
    let ring = dir.path().join("ring.mtx");
    assert!(bin()
        .args([
            "gen", "--kind", "ring", "--n", "10", "--deg", "4", "--seed", "1", "--out",
            ring.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    assert_eq!(lapcond_cli::mtx::ingest_mtx(&ring).unwrap().m(), 20);

    let ws = dir.path().join("ws.mtx");
    assert!(bin()
        .args([
            "gen", "--kind", "ws", "--n", "64", "--beta", "0.25", "--seed", "1", "--out",
            ws.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    assert_eq!(lapcond_cli::mtx::ingest_mtx(&ws).unwrap().m(), 128);
}

#[test]
fn bench_emits_json_with_exact_keys() {
    let dir = tempdir();
    let out = dir.path().join("rows.json");
    let status = bin()
        .args([
            "bench",
            "--graph",
            "grid2d:64",
            "--mu",
            "inv-sqrt-n",
            "--levels",
            "2",
            "--precond",
            "pegp,none",
            "--tol",
            "1e-8",
            "--seed",
            "0",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let obj = row.as_object().unwrap();
        assert_eq!(obj.len(), 10);
        for key in [
            "case",
            "n",
            "n_tilde",
            "levels",
            "mu",
            "preconditioner",
            "steps",
            "time",
            "kappa",
            "converged",
        ] {
            assert!(obj.contains_key(key), "missing {key}");
        }
        assert_eq!(obj["converged"], serde_json::Value::Bool(true));
    }
}

#[test]
fn bench_on_generated_mtx_file() {
    let dir = tempdir();
    let mtx = dir.path().join("g.mtx");
    assert!(bin()
        .args([
            "gen", "--kind", "grid2d", "--n", "64", "--seed", "0", "--out",
            mtx.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let out = dir.path().join("rows.csv");
    assert!(bin()
        .args([
            "bench",
            "--graph",
            mtx.to_str().unwrap(),
            "--mu",
            "0.35",
            "--levels",
            "max",
            "--precond",
            "msp",
            "--tol",
            "1e-6",
            "--format",
            "csv",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "case,n,n_tilde,levels,mu,preconditioner,steps,time,kappa,converged"
    );
    let row = lines.next().unwrap();
    assert!(row.contains("msp"));
    assert!(row.ends_with("true"));
}

#[test]
fn analyze_prints_kappa_table() {
    let output = bin()
        .args([
            "analyze",
            "--graph",
            "grid2d:16",
            "--graph",
            "ring:16:4",
            "--mu",
            "inv-sqrt-n",
            "--levels",
            "max",
            "--dense-kappa",
            "--seed",
            "0",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("kappa"));
    assert!(text.contains("grid2d:16"));
    assert!(text.contains("ring:16:4"));
    // two data lines with a numeric kappa column
    let data_lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(data_lines.len(), 2);
    for line in data_lines {
        let last = line.split_whitespace().last().unwrap();
        let kappa: f64 = last.parse().unwrap();
        assert!(kappa >= 1.0);
    }
}

#[test]
fn env_seed_fallback_matches_explicit_flag() {
    let dir = tempdir();
    let with_env = dir.path().join("env.mtx");
    let with_flag = dir.path().join("flag.mtx");
    assert!(bin()
        .env("LAPCOND_SEED", "9")
        .args([
            "gen", "--kind", "ws", "--n", "64", "--out",
            with_env.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args([
            "gen", "--kind", "ws", "--n", "64", "--seed", "9", "--out",
            with_flag.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let a = std::fs::read_to_string(&with_env).unwrap();
    let b = std::fs::read_to_string(&with_flag).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempdir();
    // non-square grid
    assert!(!bin()
        .args([
            "gen", "--kind", "grid2d", "--n", "20", "--out",
            dir.path().join("x.mtx").to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    // unknown preconditioner
    assert!(!bin()
        .args([
            "bench", "--graph", "grid2d:16", "--mu", "0.5", "--levels", "2", "--precond",
            "jacobi", "--tol", "1e-8",
        ])
        .status()
        .unwrap()
        .success());
    // unwritable output path
    assert!(!bin()
        .args([
            "bench",
            "--graph",
            "grid2d:16",
            "--mu",
            "0.5",
            "--levels",
            "2",
            "--precond",
            "pegp",
            "--tol",
            "1e-8",
            "--out",
            "/nonexistent-dir/rows.json",
        ])
        .status()
        .unwrap()
        .success());
}

#[test]
fn real_world_fixture_when_available() {
    // datasets are not bundled; exercise the preprocessing numbers when a
    // local copy exists
    let candidates = [
        PathBuf::from("data/ca-GrQc.mtx"),
        PathBuf::from("../data/ca-GrQc.mtx"),
    ];
    let Some(path) = candidates.iter().find(|p| p.exists()) else {
        eprintln!("ca-GrQc.mtx not present; skipping real-world fixture");
        return;
    };
    let g = lapcond_cli::mtx::ingest_mtx(path).unwrap();
    assert_eq!(g.n(), 4158);
    assert_eq!(g.m(), 13422);
}
