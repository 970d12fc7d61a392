//! Exit-code and input-handling checks for the binary: 0 pass, 2
//! verification failure, 1 usage or input error.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_maskdisk")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("MASKDISK_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn corrupt_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json ");
    let out = run(&["verify", &bad, &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn non_isometry_machine_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    // column scaled by 2: not an isometry
    let machine = write(
        dir.path(),
        "machine.json",
        r#"{"dims": [2, 2], "columns": [[[2.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]]}"#,
    );
    let claimed = write(dir.path(), "claimed.json", r#"{"states": [], "disks": []}"#);
    let out = run(&["verify", &machine, &claimed]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("isometry"), "stderr: {err}");
}

#[test]
fn empty_claim_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    assert_eq!(
        run(&["example", "nd_n3_d4", "--out", out_dir])
            .status
            .code(),
        Some(0)
    );
    let machine = format!("{out_dir}/nd_n3_d4.machine.json");
    let empty = write(dir.path(), "empty.json", r#"{"states": [], "disks": []}"#);
    let out = run(&["verify", &machine, &empty]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn truncated_claim_fails_verification_with_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    assert_eq!(
        run(&["example", "nd_n3_d4", "--out", out_dir])
            .status
            .code(),
        Some(0)
    );
    let machine = format!("{out_dir}/nd_n3_d4.machine.json");
    let claimed_path = format!("{out_dir}/nd_n3_d4.claimed.json");
    let full: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&claimed_path).unwrap()).unwrap();
    let mut truncated = full.clone();
    let disks = truncated["disks"].as_array_mut().unwrap();
    disks.pop();
    let truncated_path = write(dir.path(), "truncated.json", &truncated.to_string());

    let out = run(&["verify", &machine, &truncated_path, "--seed", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "fail");
    assert!(!report["witnesses"].as_array().unwrap().is_empty());
    assert_eq!(report["diagnostics"]["seed"], 3);
}

#[test]
fn qubit_classify_reports_disk() {
    let dir = tempfile::tempdir().unwrap();
    let inv = 1.0 / 2.0_f64.sqrt();
    let machine = write(
        dir.path(),
        "bell.json",
        &format!(
            r#"{{"dims": [2, 2], "columns": [
                [[{inv}, 0.0], [0.0, 0.0], [0.0, 0.0], [{inv}, 0.0]],
                [[0.0, 0.0], [{inv}, 0.0], [{inv}, 0.0], [0.0, 0.0]]
            ]}}"#
        ),
    );
    let out = run(&["classify", &machine, "--mode", "qubit", "--seed", "5"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "Disk(2)");
    assert_eq!(report["diagnostics"]["disks_found"], 1);
}

#[test]
fn qutrit_classify_requires_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    run(&["example", "type_i", "--out", out_dir]);
    let target = format!("{out_dir}/type_i.target.json");
    let out = run(&["classify", &target, "--mode", "qutrit"]);
    assert_eq!(out.status.code(), Some(1));

    let spec = format!("{out_dir}/type_i.spec.json");
    let out = run(&[
        "classify", &target, &spec, "--mode", "qutrit", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "TypeI");
}

#[test]
fn unknown_example_is_an_input_error() {
    let out = run(&["example", "not_a_real_example"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["example", "cd_n3_d2", "--params", "{broken"]);
    assert_eq!(out.status.code(), Some(1));
    // unknown parameter keys are rejected
    let out = run(&["example", "cd_n3_d2", "--params", r#"{"bogus": 1.0}"#]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn family_state_emission() {
    let out = run(&[
        "example",
        "cd_n3_d2",
        "--params",
        r#"{"xi": 0.0, "eta": 0.0, "theta": 0.0}"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let amps = doc["state"]["amplitudes"].as_array().unwrap();
    // the origin of the family is the Bell state (|00> + |11>)/sqrt2
    let inv = 1.0 / 2.0_f64.sqrt();
    assert!((amps[0][0].as_f64().unwrap() - inv).abs() < 1e-12);
    assert!((amps[3][0].as_f64().unwrap().abs() - inv).abs() < 1e-12);
}

#[test]
fn seed_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    run(&["example", "nd_n3_d4", "--out", out_dir]);
    let machine = format!("{out_dir}/nd_n3_d4.machine.json");
    let claimed = format!("{out_dir}/nd_n3_d4.claimed.json");
    let out = Command::new(bin())
        .args(["verify", &machine, &claimed])
        .env("MASKDISK_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["diagnostics"]["seed"], 4242);

    let out = Command::new(bin())
        .args(["verify", &machine, &claimed])
        .env("MASKDISK_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn list_examples_is_stable() {
    let out = run(&["list-examples"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let ids: Vec<&str> = text.lines().collect();
    assert_eq!(ids.len(), 9);
    assert!(ids.contains(&"nd_n3_d4"));
    assert!(ids.contains(&"appendix_b_family"));
}

#[test]
fn qubit_mode_cross_checks_an_optional_spec() {
    let dir = tempfile::tempdir().unwrap();
    let inv = 1.0 / 2.0_f64.sqrt();
    let machine = write(
        dir.path(),
        "bell.json",
        &format!(
            r#"{{"dims": [2, 2], "columns": [
                [[{inv}, 0.0], [0.0, 0.0], [0.0, 0.0], [{inv}, 0.0]],
                [[0.0, 0.0], [{inv}, 0.0], [{inv}, 0.0], [0.0, 0.0]]
            ]}}"#
        ),
    );
    let good = write(
        dir.path(),
        "good_spec.json",
        r#"{"blocks": [{"eigenvalue": 0.5, "degeneracy": 2}]}"#,
    );
    let bad = write(
        dir.path(),
        "bad_spec.json",
        r#"{"blocks": [{"eigenvalue": 0.7, "degeneracy": 1}, {"eigenvalue": 0.3, "degeneracy": 1}]}"#,
    );
    let ok = run(&[
        "classify", &machine, &good, "--mode", "qubit", "--seed", "5",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let err = run(&["classify", &machine, &bad, "--mode", "qubit", "--seed", "5"]);
    assert_eq!(err.status.code(), Some(1));
}

#[test]
fn tolerance_flags_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    run(&["example", "nd_n3_d4", "--out", out_dir]);
    let machine = format!("{out_dir}/nd_n3_d4.machine.json");
    let claimed = format!("{out_dir}/nd_n3_d4.claimed.json");
    let out = run(&[
        "verify",
        &machine,
        &claimed,
        "--seed",
        "7",
        "--tol-alg",
        "1e-8",
        "--tol-opt",
        "1e-5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["diagnostics"]["tolerances"]["algebraic"], 1e-8);
    assert_eq!(report["diagnostics"]["tolerances"]["optimization"], 1e-5);
    // inverted tolerances are rejected
    let out = run(&[
        "verify",
        &machine,
        &claimed,
        "--tol-alg",
        "1e-3",
        "--tol-opt",
        "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
