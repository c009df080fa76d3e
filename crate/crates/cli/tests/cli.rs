use std::process::Command;

use harmnorm::{run, to_json, Report};
use serde_json::Value;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("harmnorm").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn report(args: &[&str]) -> Report {
    let (code, out, err) = invoke(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn analyze_identity() {
    let r = report(&["analyze", "--h", "z", "--rmax", "0.99"]);
    assert_eq!(r.command, "analyze");
    let est = &r.results["normality"]["estimate"];
    assert!((est["value"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert_eq!(r.results["normality"]["trend"]["verdict"], "flat");
    assert_eq!(r.inputs["seed"], 0);
    assert!(r.results["lipschitz"]["value"].as_f64().unwrap() <= 1.0 + 1e-9);
}

#[test]
fn analyze_with_phi_and_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"h": "exp(i/(1-z))", "label": "cusp"}"#).unwrap();
    let r = report(&[
        "analyze",
        "--map",
        path.to_str().unwrap(),
        "--phi",
        "pow:2",
        "--rmax",
        "0.999",
        "--pairs",
        "256",
    ]);
    assert_eq!(r.inputs["map"]["label"], "cusp");
    assert_eq!(r.results["normality"]["trend"]["verdict"], "growing");
    assert_ne!(r.results["phi"]["trend"]["verdict"], "growing");
}

#[test]
fn catalog_map_reference() {
    let r = report(&[
        "analyze",
        "--map",
        "catalog:reversing",
        "--rmax",
        "0.9",
        "--pairs",
        "64",
    ]);
    assert_eq!(r.results["sense_check"]["preserving"], false);
    assert!(!r.warnings.is_empty());
    let (code, _, _) = invoke(&["analyze", "--map", "catalog:nope"]);
    assert_eq!(code, 2);
}

#[test]
fn zalcman_cusp() {
    let r = report(&[
        "zalcman",
        "--h",
        "exp(i/(1-z))",
        "--alpha",
        "0",
        "--steps",
        "5",
    ]);
    let steps = r.results["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 5);
    for s in steps {
        assert!((s["sd_at_zero"].as_f64().unwrap() - 1.0).abs() <= 1e-3);
    }
    assert_eq!(r.results["converged_flag"], true);
}

#[test]
fn zalcman_identity_is_a_warning() {
    let r = report(&["zalcman", "--h", "z", "--steps", "2"]);
    assert!(r.results["steps"].as_array().unwrap().is_empty());
    assert!(r.warnings.iter().any(|w| w.contains("not a usable")));
}

#[test]
fn phi_check_rejects_square_root() {
    let r = report(&["phi-check", "--phi", "pow:0.5"]);
    assert_eq!(r.results["growth"], false);
    let r = report(&["phi-check", "--phi", "pow:2"]);
    assert_eq!(r.results["growth"], true);
    assert_eq!(r.results["locally_uniform"], true);
    assert_eq!(r.results["convex"], true);
    assert!(r.warnings.is_empty());
}

#[test]
fn phi_from_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.csv");
    let mut text = String::from("r,phi\n");
    for i in 0..=2000 {
        let r = 0.999999 * i as f64 / 2000.0;
        text.push_str(&format!("{r},{}\n", (1.0 - r).powi(-2)));
    }
    std::fs::write(&path, text).unwrap();
    let spec = format!("table:{}", path.display());
    let r = report(&["phi-check", "--phi", &spec]);
    assert_eq!(r.results["spec"], spec.as_str());
}

#[test]
fn fibers_of_square() {
    let r = report(&[
        "fibers",
        "--h",
        "z^2",
        "--targets",
        "0.25,-0.3i",
        "--rmax",
        "0.9",
    ]);
    let fibers = r.results.as_array().unwrap();
    assert_eq!(fibers[0]["roots"].as_array().unwrap().len(), 2);
    assert_eq!(fibers[1]["roots"].as_array().unwrap().len(), 2);
}

#[test]
fn criteria_single_theorems() {
    let r = report(&[
        "criteria",
        "--theorem",
        "1.2",
        "--h",
        "z",
        "--g",
        "2*z",
        "--rmax",
        "0.99",
    ]);
    assert_eq!(r.results["hypothesis_met"], true);
    assert_eq!(r.results["prediction"], "normal");
    let r = report(&["criteria", "--theorem", "1.3", "--h", "z", "--P", "1,0,2"]);
    assert_eq!(r.results["theorem_id"], "1.3");
    let r = report(&[
        "criteria",
        "--theorem",
        "1.5",
        "--h",
        "z",
        "--k",
        "2",
        "--E",
        "0,0.1,0.2,0.3,0.4,0.5",
    ]);
    assert_eq!(r.results["E"].as_array().unwrap().len(), 6);
    let r = report(&["criteria", "--theorem", "1.6", "--h", "z^2", "--k", "1"]);
    assert_eq!(r.results["k"], 1);
}

#[test]
fn criteria_wrong_target_count() {
    let (code, _, err) = invoke(&[
        "criteria",
        "--theorem",
        "1.5",
        "--h",
        "z",
        "--k",
        "1",
        "--E",
        "0,0.1",
    ]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn harness_on_catalog() {
    let r = report(&["criteria", "--theorem", "harness"]);
    assert!(r.results["red_flags"].as_array().unwrap().is_empty());
    assert_eq!(r.results["maps"].as_array().unwrap().len(), 8);
}

#[test]
fn grid_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let r = report(&[
        "grid",
        "--h",
        "z",
        "--grid",
        "8",
        "--functional",
        "esd",
        "--k",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(r.results["rows"], 9 * 32);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# functional=esd k=2"), "{comment}");
    assert_eq!(lines.next().unwrap(), "r,theta,z_re,z_im,value");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9 * 32);
    let first_r: Vec<f64> = rows
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(first_r.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn grid_to_stdout() {
    let (code, out, _) = invoke(&[
        "grid",
        "--h",
        "z",
        "--grid",
        "4",
        "--functional",
        "phi",
        "--phi",
        "pow:2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2 + 5 * 16);
}

#[test]
fn catalog_export() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&["catalog", "--out", dir.path().to_str().unwrap()]);
    let names: Vec<&str> = r
        .results
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"exp-i-cusp"));
    let rec: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("exp-i-cusp.json")).unwrap())
            .unwrap();
    assert_eq!(rec["h"], "exp((i / (1.0 - z)))");
    let exported = dir.path().join("identity.json");
    let r = report(&[
        "analyze",
        "--map",
        exported.to_str().unwrap(),
        "--rmax",
        "0.9",
        "--pairs",
        "64",
    ]);
    assert_eq!(r.inputs["map"]["label"], "identity");
}

#[test]
fn exit_codes() {
    assert_eq!(invoke(&["analyze", "--h", "2z"]).0, 3);
    assert_eq!(invoke(&["analyze", "--h", "z^-1"]).0, 3);
    assert_eq!(invoke(&["analyze", "--h", "w"]).0, 3);
    assert_eq!(invoke(&["analyze"]).0, 2);
    assert_eq!(invoke(&["analyze", "--h", "z", "--rmax", "1.2"]).0, 2);
    assert_eq!(invoke(&["analyze", "--h", "z", "--grid", "x"]).0, 2);
    assert_eq!(invoke(&["frobnicate"]).0, 2);
    assert_eq!(invoke(&["fibers", "--h", "z", "--targets", "1+"]).0, 2);
    // A pole inside the disk surfaces as a numerical failure.
    assert_eq!(
        invoke(&["analyze", "--h", "1/z", "--grid", "16", "--rmax", "0.5"]).0,
        4
    );
    assert_eq!(
        invoke(&["analyze", "--h", "1/(2-z)", "--grid", "16", "--rmax", "0.5"]).0,
        0
    );
    assert_eq!(invoke(&["--help"]).0, 0);
}

#[test]
fn numerical_failure_exit_code() {
    // The weight table stops short of r_max, so evaluating phi leaves its domain.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.csv");
    std::fs::write(&path, "0,1\n0.5,4\n").unwrap();
    let spec = format!("table:{}", path.display());
    let (code, _, err) = invoke(&[
        "analyze", "--h", "z", "--phi", &spec, "--rmax", "0.9", "--pairs", "16",
    ]);
    assert_eq!(code, 4, "{err}");
}

#[test]
fn report_serialization_round_trips() {
    let r = report(&["fibers", "--h", "z^2", "--targets", "0.25", "--rmax", "0.9"]);
    let again = to_json(&r) + "\n";
    let (_, out, _) = invoke(&["fibers", "--h", "z^2", "--targets", "0.25", "--rmax", "0.9"]);
    assert_eq!(again, out);
}

#[test]
fn binary_matches_library() {
    let bin = env!("CARGO_BIN_EXE_harmnorm");
    let args = ["phi-check", "--phi", "pow:2"];
    let proc = Command::new(bin).args(args).output().unwrap();
    assert!(proc.status.success());
    let (_, out, _) = invoke(&args);
    assert_eq!(String::from_utf8(proc.stdout).unwrap(), out);
    let bad = Command::new(bin)
        .args(["analyze", "--h", "z("])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
}
