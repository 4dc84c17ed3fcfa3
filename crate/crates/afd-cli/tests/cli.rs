//! Command-line behavior: exit codes, validation messages, output files and
//! manifest integrity.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn afd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("afd-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(dir: &Path, radius: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(
        &path,
        format!(
            r#"
[scenario]
bank = "three-tank"
table = "nominal"
seed = 11
mc_count = 150

[horizon]
t_final = 200.0
dt = 1.0
measurement_interval = 100.0

[robustness]
radius = {radius}

[solver]
grid_points = 3
nm_max_evals = 8
"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn utility_subcommands_print_known_values() {
    let out = afd(&["tv", "0.4", "0.1", "0.4", "0.1"]);
    assert!(out.status.success());
    let tv: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert_eq!(tv, 0.0);

    let out = afd(&["bound", "0.4", "0.1", "0.4", "0.2"]);
    assert!(out.status.success());
    let b: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert_eq!(b, 1.0);

    let out = afd(&["roi", "0.5", "0.1", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("mu [0.5"), "degenerate roi: {text}");
}

#[test]
fn domain_violations_exit_with_validation_status() {
    // TV radius outside [0, 1].
    let out = afd(&["roi", "0.5", "0.1", "1.5"]);
    assert_eq!(out.status.code(), Some(1));

    // All-zero moments make the bound undefined; runtime class.
    let out = afd(&["bound", "0", "0", "0", "0"]);
    assert_eq!(out.status.code(), Some(2));

    // Odd argument count.
    let out = afd(&["bound", "1", "2", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_config_is_rejected_with_field_message() {
    let dir = temp_dir("badcfg");
    let path = small_config(&dir, "[1.5, 0.0, 0.0]");
    let out = afd(&["design", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("radius"),
        "message should name the field: {err}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = temp_dir("unknownkey");
    let path = dir.join("scenario.toml");
    std::fs::write(
        &path,
        r#"
[scenario]
bank = "three-tank"
table = "nominal"
seed = 1
typo_field = 3

[horizon]
t_final = 100.0
measurement_interval = 100.0

[robustness]
radius = [0, 0, 0]
"#,
    )
    .unwrap();
    let out = afd(&["design", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("typo_field"),
        "unknown key must be named: {err}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn wrong_radius_count_is_rejected() {
    let dir = temp_dir("radcount");
    let path = small_config(&dir, "[0.0, 0.0]");
    let out = afd(&["design", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn design_emits_complete_manifest_and_evaluate_consumes_schedule() {
    let dir = temp_dir("roundtrip");
    let config = small_config(&dir, "[0.0, 0.0, 0.0]");
    let design_out = dir.join("design");
    let out = afd(&[
        "design",
        "--config",
        config.to_str().unwrap(),
        "--out",
        design_out.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "design failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Manifest lists every artifact with a correct digest.
    let manifest_text = std::fs::read_to_string(design_out.join("manifest.toml")).unwrap();
    let manifest: toml::Value = manifest_text.parse().unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for entry in files {
        let name = entry["path"].as_str().unwrap();
        let digest = entry["sha256"].as_str().unwrap();
        let bytes = std::fs::read(design_out.join(name)).unwrap();
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let actual = format!("{:x}", hasher.finalize());
        assert_eq!(actual, digest, "digest mismatch for {name}");
    }

    // The emitted schedule drives an evaluation run.
    let eval_out = dir.join("eval");
    let out = afd(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--schedule",
        design_out.join("schedule.csv").to_str().unwrap(),
        "--out",
        eval_out.to_str().unwrap(),
        "--true-model",
        "2",
    ]);
    assert!(
        out.status.success(),
        "evaluate failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for file in [
        "evaluation.csv",
        "eval_pdfs.csv",
        "area_vs_time.svg",
        "pdfs_final.svg",
    ] {
        assert!(eval_out.join(file).exists(), "missing {file}");
    }
    let svg = std::fs::read_to_string(eval_out.join("area_vs_time.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "vector graphics output expected");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_of_box_schedule_is_rejected_before_simulation() {
    let dir = temp_dir("oob");
    let config = small_config(&dir, "[0.0, 0.0, 0.0]");
    let schedule = dir.join("schedule.csv");
    std::fs::write(&schedule, "t_start,u1,u2\n0,2e-4,0\n").unwrap();
    let out = afd(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--schedule",
        schedule.to_str().unwrap(),
        "--out",
        dir.join("eval").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("input box"), "{err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_root_env_var_sets_default_destination() {
    let dir = temp_dir("envroot");
    let config = small_config(&dir, "[0.0, 0.0, 0.0]");
    let out = Command::new(env!("CARGO_BIN_EXE_afd"))
        .args(["design", "--config", config.to_str().unwrap()])
        .env("AFD_OUT_ROOT", &dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "design failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.join("afd-run").join("schedule.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}
