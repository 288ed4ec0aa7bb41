use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gaborwf::cli::{parse_config, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, OUTPUT_DIR_ENV};
use serde_json::Value;

const STFT: &str = r#"{
  "experiment": "stft",
  "grid": { "n_points": 512, "extent": 32.0 },
  "signal": { "kind": "chirp", "c": 1.0 },
  "lattice": { "x_radius": 2.0, "xi_radius": 4.0, "x_step": 0.25, "xi_step": 0.25 }
}
"#;

fn gaborwf(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gaborwf"));
    cmd.args(args).env_remove(OUTPUT_DIR_ENV);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn passing_run_writes_manifest_and_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "stft.json", STFT);
    let out = tmp.path().join("out");
    let o = gaborwf(&["run", &cfg, "--output-dir", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS chirp-closed-form"), "{stdout}");
    let m = manifest(&out);
    assert_eq!(m["passed"], true);
    assert_eq!(m["experiment"], "stft");
    for f in m["outputs"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).is_file(), "missing {f}");
    }
}

#[test]
fn failed_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
  "experiment": "wavefront",
  "grid": { "n_points": 65536, "extent": 256.0 },
  "signal": { "kind": "delta", "x0": 0.0 },
  "expected_directions": [[1.0, 0.0]]
}
"#;
    let cfg = write_config(tmp.path(), "wf.json", body);
    let out = tmp.path().join("out");
    let o = gaborwf(&["run", &cfg, "--output-dir", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(EXIT_CHECK_FAILED));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed"));
    assert_eq!(manifest(&out)["passed"], false);
}

#[test]
fn unknown_key_is_a_config_error_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{\n  \"experiment\": \"stft\",\n  \"bogus\": 1\n}\n");
    let o = gaborwf(&["run", &cfg, "--output-dir", tmp.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("bogus"), "{err}");
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn invalid_value_points_at_its_key() {
    let tmp = tempfile::tempdir().unwrap();
    let body = STFT.replace("512", "500");
    let cfg = write_config(tmp.path(), "bad.json", &body);
    let o = gaborwf(&["run", &cfg], &[]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("n_points"), "{err}");
}

#[test]
fn invalid_combinations_are_rejected() {
    let cases = [
        r#"{"experiment": "propagate", "signal": {"kind": "constant"}, "times": [1.0],
            "hamiltonian": "harmonic", "potential": {"kind": "translation", "x0": 1.0}}"#,
        r#"{"experiment": "dyson", "signal": {"kind": "constant"}, "times": [1.0]}"#,
        r#"{"experiment": "propagate", "signal": {"kind": "constant"}, "times": [1.0], "hamiltonian": "quartic_root"}"#,
        r#"{"experiment": "stft"}"#,
        r#"{"experiment": "flow", "times": []}"#,
    ];
    for c in cases {
        assert!(parse_config(c).is_err(), "accepted {c}");
    }
}

#[test]
fn missing_config_and_bad_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    assert_eq!(gaborwf(&["run", missing.to_str().unwrap()], &[]).status.code(), Some(EXIT_CONFIG));
    let cfg = write_config(tmp.path(), "stft.json", STFT);
    assert_eq!(gaborwf(&["run", &cfg, "--jobs", "0"], &[]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(gaborwf(&["frobnicate"], &[]).status.code(), Some(EXIT_CONFIG));
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{"experiment": "flow", "hamiltonian": "harmonic", "times": [0.5, 1.5],
                   "flow": {"n_points": 8, "n_trace_times": 4}}"#;
    let cfg = write_config(tmp.path(), "flow.json", body);
    let mut dirs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let o = gaborwf(&["run", &cfg, "--output-dir", out.to_str().unwrap(), "--seed", "11", "--jobs", "1"], &[]);
        assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
        dirs.push(out);
    }
    let m = manifest(&dirs[0]);
    assert_eq!(m["seed"], 11);
    for f in m["outputs"].as_array().unwrap() {
        let f = f.as_str().unwrap();
        assert_eq!(fs::read(dirs[0].join(f)).unwrap(), fs::read(dirs[1].join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn normalized_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "stft.json", STFT);
    let out = tmp.path().join("out");
    gaborwf(&["run", &cfg, "--output-dir", out.to_str().unwrap()], &[]);
    let normalized = fs::read_to_string(out.join("config.normalized.json")).unwrap();
    assert_eq!(parse_config(&normalized).unwrap(), parse_config(STFT).unwrap());
}

#[test]
fn output_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "stft.json", STFT);
    let env_dir = tmp.path().join("from-env");
    let o = gaborwf(&["run", &cfg], &[(OUTPUT_DIR_ENV, &env_dir)]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(env_dir.join("manifest.json").is_file());

    // The flag wins over the environment.
    let flag_dir = tmp.path().join("from-flag");
    let o = gaborwf(&["run", &cfg, "--output-dir", flag_dir.to_str().unwrap()], &[(OUTPUT_DIR_ENV, &env_dir.join("x"))]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(flag_dir.join("manifest.json").is_file());
    assert!(!env_dir.join("x").exists());
}

#[test]
fn sample_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 5);
}
