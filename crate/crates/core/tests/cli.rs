use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["orbitfin".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = orbitfin::cli::run_with(&argv, &mut out, &mut err);
    let text = String::from_utf8(out).unwrap();
    let json = serde_json::from_str(text.trim()).unwrap_or(Value::Null);
    (code, json)
}

fn scratch(name: &str, text: &str) -> String {
    let mut p = std::env::temp_dir();
    p.push(format!("orbitfin-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn solve_reports_a_half() {
    let (code, out) = run(&["solve", &fixture("pairs_sum.sys"), "--witness"]);
    assert_eq!(code, 0);
    assert_eq!(out["mode"], "solve");
    assert_eq!(out["solvable"], true);
    let w = out["witness"].as_array().unwrap();
    assert_eq!(w.len(), 1);
    assert_eq!(w[0]["coef"], "1/2");
    assert_eq!(w[0]["tight_orbit"]["set"], "C");
    assert!(out.get("trace").is_none());
}

#[test]
fn ring_flag_overrides_the_file() {
    let f = fixture("pairs_sum.sys");
    assert_eq!(run(&["solve", &f, "--ring", "Z"]).1["solvable"], false);
    // 2 is a unit mod 5 but not mod 4
    let (_, five) = run(&["solve", &f, "--ring", "Zmod5", "--witness"]);
    assert_eq!(five["solvable"], true);
    assert_eq!(five["witness"][0]["coef"], "3");
    assert_eq!(run(&["solve", &f, "--ring", "Zmod:4"]).1["solvable"], false);
    assert_eq!(run(&["solve", &f, "--ring", "R"]).0, 1);
}

#[test]
fn finsolve_and_trace() {
    let (code, out) = run(&["finsolve", &fixture("row_sums.sys"), "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(out["solvable"], false);
    let trace = out["trace"].as_array().unwrap();
    assert!(!trace.is_empty());
    // the instance lives over the row families
    assert_eq!(trace[0]["atom_dimension"], 1);
}

#[test]
fn finitary_witness_round_trips_through_verify() {
    let sys = scratch(
        "points.sys",
        "ring Z\nset B = orbit(k=1)\nset C = orbit(k=2)\nrows B\ncols C\nentry row (a) col (a,b) = 1\ntarget row (1) = 1\ntarget row (2) = 1\n",
    );
    let (_, out) = run(&["finsolve", &sys, "--witness"]);
    assert_eq!(out["solvable"], true);
    let w = scratch("points.json", &out.to_string());
    assert_eq!(run(&["verify", &sys, &w]).1["verified"], true);
}

#[test]
fn verify_accepts_the_hand_witness_only() {
    let sys = fixture("row_sums.sys");
    let (code, out) = run(&["verify", &sys, &fixture("row_sums_witness.json")]);
    assert_eq!((code, out["verified"].clone()), (0, Value::Bool(true)));

    let half = scratch("half.json", r#"[{"tight_orbit": {"set": "C", "entries": [1, 2]}, "coef": "1"}]"#);
    let (code, out) = run(&["verify", &sys, &half]);
    assert_eq!((code, out["verified"].clone()), (0, Value::Bool(false)));

    let junk = scratch("junk.json", r#"{"nothing": []}"#);
    assert_eq!(run(&["verify", &sys, &junk]).0, 1);
}

#[test]
fn basis_lists_families() {
    let (code, out) = run(&["basis", &fixture("set_sums.sys"), "C"]);
    assert_eq!(code, 0);
    let fams = out["families"].as_array().unwrap();
    let ids: Vec<&str> = fams.iter().map(|f| f["family"].as_str().unwrap()).collect();
    assert_eq!(ids, ["C{}", "C{1}", "C{1,2}"]);
    assert_eq!(fams[2]["group_order"], 2);
    assert_eq!(run(&["basis", &fixture("set_sums.sys"), "Nope"]).0, 1);
}

#[test]
fn check_is_consistent() {
    for mode in ["solve", "finsolve"] {
        let (code, out) = run(&["check", &fixture("cyclic.sys"), "--mode", mode]);
        assert_eq!(code, 0);
        assert_eq!(out["consistent"], true);
        assert_eq!(out["checked"], mode);
    }
    let (_, out) = run(&["check", &fixture("row_sums.sys"), "--oracle-pool", "4"]);
    assert_eq!(out["pool"], 4);
    assert_eq!(out["sandwich"]["forced"], true);
}

#[test]
fn input_errors_exit_with_one() {
    let bad = scratch("bad.sys", "ring Q\nset B = orbit(k=2\n");
    let (code, out) = run(&["solve", &bad]);
    assert_eq!(code, 1);
    assert!(out["error"].as_str().unwrap().starts_with("line 2"));
    assert_eq!(run(&["solve", "/no/such/file.sys"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn binary_prints_json() {
    let out = Command::new(env!("CARGO_BIN_EXE_orbitfin"))
        .args(["solve", &fixture("row_sums.sys")])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["solvable"], true);
}
