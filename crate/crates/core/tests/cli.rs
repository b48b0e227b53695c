//! End-to-end tests of the `gnatlab` binary: exit codes, output files,
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gnatlab")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn sphere_config(dir: &Path) -> PathBuf {
    write_config(
        dir,
        "sphere.json",
        r#"{
          "surface": "sphere:1",
          "generators": "sasaki",
          "sample": {
            "base_points": [[1.0, 0.5]],
            "fiber_directions": [[1.0, 0.0], [0.3, -0.7]],
            "t_values": [0.0, 1.0]
          },
          "classify": { "samples": 32 },
          "osserman": { "directions": 6 }
        }"#,
    )
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn verify_identities_exits_zero_and_writes_csv_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(dir.path());
    let out = dir.path().join("report.csv");
    let res = run(&[
        "verify-identities",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("experiment_id,point,t,direction,lam0"));
    assert!(csv.contains("totally-geodesic"));
    assert!(csv.contains("closed-form-spectrum"));
    assert!(!csv.contains('\r'));
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.with_extension("csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["violations"], 0);
    assert_eq!(meta["tolerances"]["identity"], 1e-7);
    assert_eq!(meta["tolerances"]["spectrum"], 1e-6);
    assert_eq!(meta["tolerances"]["osserman"], 1e-5);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(dir.path());
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let res = run(&[
            "report",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"surface": "flat", "genera"#);
    let out = dir.path().join("report.csv");
    let res = run(&[
        "report",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists(), "no partial output on a config error");
    assert!(String::from_utf8_lossy(&res.stderr).contains("configuration error"));
}

#[test]
fn semantic_config_errors_also_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // unknown generator preset
    let cfg = write_config(
        dir.path(),
        "unknown.json",
        r#"{
          "surface": "flat",
          "generators": "round",
          "sample": {
            "base_points": [[0.0, 0.0]],
            "fiber_directions": [[1.0, 0.0]],
            "t_values": [1.0]
          }
        }"#,
    );
    let out = dir.path().join("r.csv");
    let res = run(&[
        "check-metric",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn missing_config_file_exits_2() {
    let res = run(&["spectrum", "--config", "/nonexistent/nowhere.json"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn math_domain_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // generator curve with a pole inside the classification grid
    let cfg = write_config(
        dir.path(),
        "pole.json",
        r#"{
          "surface": "flat",
          "generators": {
            "name": "pole",
            "a1": {"kind": "rational", "num": [1.0], "den": [1.0, -1.0]},
            "a2": {"kind": "rational", "num": [0.0], "den": [1.0]},
            "a3": {"kind": "rational", "num": [0.0], "den": [1.0]},
            "b1": {"kind": "rational", "num": [0.0], "den": [1.0]},
            "b2": {"kind": "rational", "num": [0.0], "den": [1.0]},
            "b3": {"kind": "rational", "num": [0.0], "den": [1.0]}
          },
          "sample": {
            "base_points": [[0.0, 0.0]],
            "fiber_directions": [[1.0, 0.0]],
            "t_values": [0.5]
          },
          "classify": { "t_max": 1.0, "samples": 33 }
        }"#,
    );
    let res = run(&["check-metric", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn json_format_embeds_meta_and_prints_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(dir.path());
    let res = run(&[
        "osserman",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(res.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(doc["meta"]["command"], "osserman");
    assert_eq!(doc["meta"]["summary"]["global"]["is_osserman"], false);
    assert!(!doc["rows"].as_array().unwrap().is_empty());
}

#[test]
fn flat_sasaki_osserman_is_globally_true_with_zero_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "flat.json",
        r#"{
          "surface": "flat",
          "generators": "sasaki",
          "sample": {
            "base_points": [[0.0, 0.0], [2.0, -1.0]],
            "fiber_directions": [[1.0, 0.0]],
            "t_values": [0.0, 1.0, 4.0]
          },
          "osserman": { "directions": 12 }
        }"#,
    );
    let res = run(&[
        "osserman",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(res.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(doc["meta"]["summary"]["global"]["is_osserman"], true);
    for row in doc["rows"].as_array().unwrap() {
        for lam in row["spectrum"].as_array().unwrap() {
            assert!(lam.as_f64().unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn out_flag_overrides_config_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let configured = dir.path().join("configured.csv");
    let cfg = write_config(
        dir.path(),
        "with-out.json",
        &format!(
            r#"{{
              "surface": "flat",
              "generators": "sasaki",
              "sample": {{
                "base_points": [[0.0, 0.0]],
                "fiber_directions": [[1.0, 0.0]],
                "t_values": [1.0]
              }},
              "outputs": {{ "format": "csv", "path": {:?} }}
            }}"#,
            configured.to_str().unwrap()
        ),
    );
    let override_path = dir.path().join("override.csv");
    let res = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        override_path.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert!(override_path.exists());
    assert!(!configured.exists());

    // without --out the configured path is honored
    let res = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(configured.exists());
}
