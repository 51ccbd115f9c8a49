mod common;

use blockry::problems::{builtin_experiment, read_matrix_market_file, Experiment, ExperimentConfig, DATA_ENV};
use blockry::Error;
use common::*;

#[test]
fn standin_fixture_loads() {
    let mm = read_matrix_market_file(&fixture("standin.mtx")).unwrap();
    assert_eq!(mm.shape(), (12, 12));
    let config = ExperimentConfig {
        matrix_file: Some(fixture("standin.mtx")),
        ..Default::default()
    };
    let p = builtin_experiment(Experiment::Sherman4Mixed, &config).unwrap();
    assert_eq!(p.dim(), 212);
    assert_eq!(p.block_size(), 2);
    assert!(p.notes.is_empty(), "packaged rhs should be picked up: {:?}", p.notes);
    let random_part = p.b.view((0, 1), (12, 1)).norm();
    assert!((random_part - 1e7).abs() < 1e-6);
    assert_eq!(p.b[(212 - 200 + 49, 0)], 1.0);
    assert_eq!(p.b[(212 - 200 + 149, 1)], 1.0);
}

#[test]
fn missing_rhs_is_substituted_and_noted() {
    let dir = tempfile_dir();
    let m = dir.join("other.mtx");
    std::fs::copy(fixture("standin.mtx"), &m).unwrap();
    let config = ExperimentConfig {
        matrix_file: Some(m),
        ..Default::default()
    };
    let p = builtin_experiment(Experiment::Sherman4Mixed, &config).unwrap();
    assert_eq!(p.notes.len(), 1);
    assert!(p.notes[0].contains("seeded standard-normal"));
    let _ = std::fs::remove_dir_all(dir);
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("blockry-problems-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn missing_sherman4_has_download_hint() {
    let config = ExperimentConfig {
        data_dir: Some("/nonexistent-blockry".into()),
        ..Default::default()
    };
    let err = builtin_experiment(Experiment::Sherman4Mixed, &config).unwrap_err();
    assert!(matches!(err, Error::MissingFile { .. }));
    assert!(err.to_string().contains("sparse.tamu.edu"));
}

#[test]
fn sherman4_dimensions_when_available() {
    let Some(dir) = std::env::var_os(DATA_ENV) else {
        eprintln!("{DATA_ENV} unset; skipping sherman4 dimension check");
        return;
    };
    let path = std::path::Path::new(&dir).join("sherman4.mtx");
    let mm = read_matrix_market_file(&path).unwrap();
    assert_eq!(mm.shape(), (1104, 1104));
    let p = builtin(Experiment::Sherman4Mixed);
    assert_eq!(p.dim(), 1304);
}
