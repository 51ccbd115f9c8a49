use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn blockry(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockry"))
        .args(args)
        .env_remove("BLOCKRY_DATA")
        .output()
        .expect("spawn blockry")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn partial_stagnation_run_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = blockry(&["run", "partial-stag", "--out", out, "--emit-fom", "--diagnostics", "--verify", "--plot"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = read(dir.path(), "iterations.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "j,breakdown_p,res_gmres_1,res_gmres_2,res_fom_1,res_fom_2,fom_generalized,\
         rank_r,rank_c,case,intersection_dim,sin2_1,sin2_2,trig_residual,gap_residual"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 15));
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i + 1);
    }
    assert_eq!(rows[5][1], "1");
    assert_eq!(rows[5][7], "1");

    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("column 1: converged at iteration 6"), "{summary}");
    assert!(summary.contains("breakdown: iteration 6, p = 1"));
    assert!(summary.contains("max verification residual"));
    assert!(read(dir.path(), "plot.gp").contains("iterations.csv"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = blockry(&["run", "partial-stag", "--out", d.path().to_str().unwrap(), "--diagnostics"]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(read(a.path(), "iterations.csv"), read(b.path(), "iterations.csv"));
    assert_eq!(read(a.path(), "summary.txt"), read(b.path(), "summary.txt"));
}

#[test]
fn budget_exhaustion_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockry(&["run", "total-stag", "--max-iter", "10", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read(dir.path(), "iterations.csv").lines().count(), 11);
    assert!(read(dir.path(), "summary.txt").contains("not converged within 10 iterations"));
}

#[test]
fn missing_sherman4_is_an_error_with_a_hint() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockry(&[
        "run",
        "sherman4-mixed",
        "--data-dir",
        dir.path().join("absent").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sherman4.mtx") && err.contains("sparse.tamu.edu"), "{err}");
}

#[test]
fn matrix_file_with_random_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture("standin.mtx");
    let o = blockry(&[
        "run",
        path.to_str().unwrap(),
        "--block-size",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
        "--verify",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("block size: 3"));
    assert!(summary.contains("seeded standard-normal"));
}

#[test]
fn matrix_file_with_rhs() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockry(&[
        "run",
        fixture("standin.mtx").to_str().unwrap(),
        "--rhs",
        fixture("standin_rhs1.mtx").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(dir.path(), "summary.txt").contains("block size: 1"));
}

#[test]
fn bad_arguments_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "partial-stag", "--block-size", "3", "--out", out],
        vec!["run", "no-such-problem", "--out", out],
        vec!["run", "total-stag", "--tol", "0", "--out", out],
        vec!["inspect", "partial-stag", "--at", "0"],
        vec!["run", "partial-stag", "--no-such-flag"],
        vec!["inspect", "partial-stag"],
    ] {
        let o = blockry(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn inspect_prints_full_precision_matrices() {
    let o = blockry(&["inspect", "total-stag", "--at", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("rank_r: 0"));
    assert!(text.contains("case: total-stagnation"));
    for name in ["C~_40 =", "C_40 =", "C^_40 =", "N_40 =", "N^_40 =", "C~_40 (canonical signs) ="] {
        assert!(text.contains(name), "missing {name}");
    }
    assert!(text.contains("1.0000000000000000e0"));
}

#[test]
fn total_stagnation_run_and_verification() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockry(&["run", "total-stag", "--max-iter", "60", "--verify", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(dir.path(), "iterations.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for r in &rows[..48] {
        for v in &r[2..6] {
            assert!((v.parse::<f64>().unwrap() - 1.0).abs() <= 1e-12);
        }
    }
    for r in &rows {
        for v in &r[6..8] {
            if !v.is_empty() {
                assert!(v.parse::<f64>().unwrap() <= 1e-8);
            }
        }
    }
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("status: converged at iteration 50"), "{summary}");
}

#[test]
fn inspect_beyond_the_krylov_space_is_an_error() {
    let o = blockry(&["inspect", "partial-stag", "--at", "40"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exhausted"));
}
