use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use random_grating::harness::{read_dataset, sha256_hex, Manifest, MANIFEST_FILE};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_random-grating"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

const SMALL: &str = r#"{"samples":3,"angle_count":2,"mcch":{"warm_samples":1}}"#;

#[test]
fn generate_is_complete_and_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run(dir, &["--preset", "ex1", "--config", &cfg, "generate"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ds = read_dataset(&a.join("dataset.jsonl")).unwrap();
    assert_eq!(ds.records.len(), 3 * 2);
    assert_eq!(manifest(&a).artifacts, manifest(&b).artifacts);
}

#[test]
fn ex4_dataset_covers_every_stage_wavenumber() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"samples":2,"angle_count":1,"mcch":{"warm_samples":1}}"#);
    let out = run(tmp.path(), &["--preset", "ex4", "--config", &cfg, "generate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ds = read_dataset(&tmp.path().join("dataset.jsonl")).unwrap();
    let mut kappas: Vec<f64> = ds.records.iter().map(|r| r.kappa).collect();
    kappas.dedup();
    assert_eq!(&kappas[..3], &[2.0, 4.0, 6.0]);
    assert_eq!(ds.records.len(), 2 * 3);
}

#[test]
fn pipeline_manifest_hashes_close_over_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = run(tmp.path(), &["--preset", "ex2", "--config", &cfg, "--trace", "pipeline"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    assert!(m.artifacts.len() >= 5);
    for a in &m.artifacts {
        let bytes = fs::read(tmp.path().join(&a.name)).unwrap();
        assert_eq!(sha256_hex(&bytes), a.sha256, "{}", a.name);
        assert_eq!(bytes.len() as u64, a.bytes);
    }
    for phase in ["generate", "invert", "stats"] {
        assert!(m.timings_ms.contains_key(phase), "{phase}");
    }
    let nodes = fs::read_to_string(tmp.path().join("stats_nodes.csv")).unwrap();
    assert_eq!(nodes.lines().count(), 110 + 1);
}

#[test]
fn stats_rerun_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = run(tmp.path(), &["--preset", "ex1", "--config", &cfg, "pipeline"]);
    assert!(out.status.success());
    let first = fs::read(tmp.path().join("stats.json")).unwrap();
    let out = run(tmp.path(), &["--preset", "ex1", "--config", &cfg, "stats"]);
    assert!(out.status.success());
    assert_eq!(fs::read(tmp.path().join("stats.json")).unwrap(), first);
}

#[test]
fn exit_codes_classify_failures() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["--preset", "ex9", "generate"]).status.code(), Some(2));
    let bad = write_config(tmp.path(), r#"{"mcch":{"inversion":{"gamma":-1.0}}}"#);
    let out = run(tmp.path(), &["--preset", "ex1", "--config", &bad, "oracle"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = tmp.path().join("nowhere.jsonl");
    let out = run(
        tmp.path(),
        &["--preset", "ex1", "invert", "--dataset", missing.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_reports_every_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["oracle"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "flat-field",
        "energy-balance",
        "flat-roundtrip",
        "projection-table",
        "gradient",
        "direct-sampling",
    ] {
        assert!(text.contains(name), "{name}");
    }
}
