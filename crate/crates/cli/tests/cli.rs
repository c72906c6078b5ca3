//! End-to-end tests of the binary: schemas, determinism and exit codes.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tautres"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tautres"))
        .args(args)
        .output()
        .expect("binary runs")
}

const HILB2_P1: &str = r#"{
    "schema_version": 1,
    "mode": "manifold",
    "n": 1, "k": 2,
    "bundle": {"rank": 1, "chern": "formal"},
    "phi": "c1^2",
    "table": {"c1(X)": "2", "c1(V)": "3"}
}"#;

#[test]
fn integrate_known_value_and_determinism() {
    // Hilb^2(P^1), V = O(3): the integral is (d-1)^2 = 4
    let out = run_with_stdin(&["integrate", "--cross-check"], HILB2_P1);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["total"], "4");
    assert_eq!(doc["schema_version"], 1);
    // byte-stable: a second run produces identical bytes
    let again = run_with_stdin(&["integrate", "--cross-check"], HILB2_P1);
    assert_eq!(out.stdout, again.stdout);
    // and the pruning flag never changes a single output byte
    let pruned = run_with_stdin(&["integrate"], HILB2_P1);
    let unpruned = run_with_stdin(&["integrate", "--no-prune"], HILB2_P1);
    assert_eq!(pruned.stdout, unpruned.stdout);
}

#[test]
fn oracle_subcommand() {
    let out = run(&[
        "oracle",
        "--surface",
        "p2",
        "--k",
        "2",
        "--bundle",
        r#"{"rank":1,"line_degree":1}"#,
        "--phi",
        "c2^2",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["fixed_point_count"], 9);
    assert!(doc["value"].is_string());
}

#[test]
fn residue_debug_interface() {
    let term = r#"{
        "schema_version": 1,
        "numerator": [{"coeff": "1", "monomial": {"z[1,2]": 1}}],
        "factors": [
            {"form": {"coefficients": {"z[1,1]": "1"}}, "mult": 1},
            {"form": {"coefficients": {"z[1,2]": "1"}}, "mult": 1},
            {"form": {"coefficients": {"z[1,1]": "2", "z[1,2]": "-1"}}, "mult": 1}
        ],
        "z_order": ["z[1,1]", "z[1,2]"]
    }"#;
    let out = run_with_stdin(&["residue"], term);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Res Res z2 dz1 dz2 / (z1 z2 (2 z1 - z2)) = -1
    assert_eq!(doc["residue"][0]["coeff"], "-1");
    assert!(doc["truncation_orders"].is_object());
}

#[test]
fn exit_codes() {
    // malformed JSON: exit 2, no computation
    let out = run_with_stdin(&["integrate"], "{not json");
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    // degree mismatch: exit 2
    let bad = r#"{"schema_version":1,"n":2,"k":2,"bundle":{"rank":1,"chern":"formal"},"phi":"c1"}"#;
    let out = run_with_stdin(&["integrate"], bad);
    assert_eq!(out.status.code(), Some(2));
    // missing schema version: exit 2
    let out = run_with_stdin(&["integrate"], r#"{"n":1,"k":1}"#);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn q_override_is_rejected_when_malformed_and_recorded_when_used() {
    let spec = r#"{
        "schema_version": 1,
        "mode": "manifold",
        "n": 1, "k": 2,
        "bundle": {"rank": 1, "chern": "formal"},
        "phi": "c1^2"
    }"#;
    let out = run_with_stdin(&["integrate", "--q-poly", "6=z7"], spec);
    assert_eq!(out.status.code(), Some(2));
    let out = run_with_stdin(&["integrate", "--q-poly", "6=z1+z6"], spec);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["q_overrides"]["6"], "z1+z6");
}

#[test]
fn selftest_single_criterion() {
    let out = run(&["selftest", "--criterion", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("criterion 10 [PASS]"), "got: {text}");
}

#[test]
fn equivariant_integrate() {
    let spec = r#"{
        "schema_version": 1,
        "mode": "equivariant",
        "n": 2, "k": 1,
        "bundle": {"rank": 2, "weights": ["lambda1", "lambda2"]},
        "phi": "c2"
    }"#;
    let out = run_with_stdin(&["integrate"], spec);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // c_2 of TC^2 over Hilb^1(C^2): lambda1 lambda2 / lambda1 lambda2 = 1
    assert_eq!(doc["value"]["numerator"][0]["coeff"], "1");
    assert!(doc["value"]["denominator_factors"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("tautres-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("result.json");
    let out = run_with_stdin(
        &["--out", out_path.to_str().unwrap(), "integrate"],
        HILB2_P1,
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["total"], "4");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn custom_series_class() {
    let dir = std::env::temp_dir().join(format!("tautres-class-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let class_path = dir.join("class.json");
    // f(x) = 1 + x reproduces the Chern class
    std::fs::write(&class_path, r#"{"coefficients": ["1", "1"]}"#).unwrap();
    let out = run(&[
        "series",
        "--class",
        class_path.to_str().unwrap(),
        "--kmax",
        "2",
        "--n",
        "1",
        "--rank",
        "1",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_agree"], true);
    assert_eq!(doc["class"], "custom");
    std::fs::remove_dir_all(&dir).ok();
}
