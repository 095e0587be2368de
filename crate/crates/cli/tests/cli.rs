use std::process::{Command, Output};

use serde_json::Value;

fn telecert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_telecert"))
        .args(args)
        .output()
        .expect("spawn telecert")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = telecert(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn thresholds_table_lists_every_measure() {
    let o = telecert(&["thresholds"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("measure"));
    for m in [
        "trace",
        "fidelity",
        "wootters",
        "bures",
        "affinity",
        "hellinger",
        "qjsd",
        "transmission",
    ] {
        assert!(lines.iter().any(|l| l.starts_with(m)), "missing {m}");
    }
}

#[test]
fn fidelity_threshold_json() {
    let v = json(&["thresholds", "--measures", "fidelity"]);
    let row = &v["rows"][0];
    assert_eq!(row["measure"], "fidelity");
    assert_eq!(num(&row["r_opt"]), 1.0);
    assert_eq!(num(&row["threshold"]), 0.666666666667);
}

#[test]
fn unknown_measure_is_argument_error() {
    let o = telecert(&["thresholds", "--measures", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn bad_resource_and_bell_index_are_argument_errors() {
    let o = telecert(&["certify", "--p", "0.5", "--resource", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = telecert(&[
        "certify",
        "--p",
        "0.5",
        "--resource",
        "two-ad",
        "--bell-index",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = telecert(&["certify", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = telecert(&[
        "certify",
        "--p",
        "0.5",
        "--resource",
        "ad-mad",
        "--strategy",
        "werner-optimal",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn werner_sweep_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("werner.csv");
    let o = telecert(&[
        "sweep",
        "--resource",
        "werner",
        "--measures",
        "all",
        "--steps",
        "101",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("808 rows"));
    let body = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 809);
    assert_eq!(
        lines[0],
        "resource,measure,p,average,threshold,verdict,negativity_normalized"
    );
    let fid_ideal = lines
        .iter()
        .find(|l| l.starts_with("werner,fidelity,1,"))
        .unwrap();
    assert!(
        fid_ideal.contains(",1,0.666666666667,quantum,1"),
        "{fid_ideal}"
    );
}

#[test]
fn sweep_is_deterministic() {
    let args = [
        "sweep",
        "--resource",
        "ad-mad",
        "--measures",
        "trace,qjsd",
        "--steps",
        "21",
        "--format",
        "csv",
    ];
    let a = telecert(&args);
    let b = telecert(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn two_ad_fidelity_is_quantum_for_positive_p() {
    let v = json(&[
        "sweep",
        "--resource",
        "two-ad",
        "--measures",
        "fidelity",
        "--steps",
        "21",
    ]);
    for row in v["rows"].as_array().unwrap() {
        let p = num(&row["p"]);
        let expected = if p > 0.0 { "quantum" } else { "classical" };
        assert_eq!(row["verdict"], expected, "p = {p}");
    }
}

#[test]
fn ad_mad_hellinger_sweep_changes_verdict() {
    let v = json(&[
        "sweep",
        "--resource",
        "ad-mad",
        "--measures",
        "hellinger",
        "--steps",
        "101",
    ]);
    let verdicts: Vec<&str> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["verdict"].as_str().unwrap())
        .collect();
    let flips = verdicts.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(flips >= 1);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let o = telecert(&[
        "thresholds",
        "--measures",
        "trace",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn werner_fidelity_transition() {
    let v = json(&[
        "transitions",
        "--resource",
        "werner",
        "--measures",
        "fidelity",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0]["p"]) - 1.0 / 3.0).abs() < 1e-5);
    assert_eq!(rows[0]["to"], "quantum");
    assert!(v.get("discrepancy").is_none());
}

#[test]
fn werner_discrepancy_between_two_measures() {
    let v = json(&["transitions", "--measures", "qjsd,bures"]);
    let d = num(&v["discrepancy"]);
    assert!((d - 0.3189).abs() < 2e-3, "{d}");
    assert_eq!(
        v["discrepancy_measures"],
        serde_json::json!(["qjsd", "bures"])
    );
}

#[test]
fn negativity_matches_closed_form() {
    let v = json(&["negativity", "--resource", "werner", "--steps", "5"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let at = |i: usize, k: &str| num(&rows[i][k]);
    assert_eq!(at(1, "negativity"), 0.0);
    assert!((at(2, "negativity") - 0.125).abs() < 1e-10);
    assert!((at(4, "negativity") - 0.5).abs() < 1e-10);
    assert!((at(4, "normalized") - 1.0).abs() < 1e-10);
    let v = json(&["negativity", "--resource", "two-ad", "--steps", "3"]);
    assert!((num(&v["rows"][1]["closed_form"]) - 0.125).abs() < 1e-12);
}

#[test]
fn mc_check_passes() {
    for args in [
        ["--resource", "werner", "--p", "0.5", "--measures", "trace"],
        ["--resource", "werner", "--p", "1", "--measures", "all"],
        [
            "--resource",
            "ad-mad",
            "--p",
            "0.5",
            "--measures",
            "fidelity",
        ],
    ] {
        let mut all = vec!["mc-check", "--seed", "42", "--samples", "1000000"];
        all.extend(args);
        let o = telecert(&all);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!stdout(&o).contains("false"));
    }
}

#[test]
fn mc_check_rejects_few_samples() {
    let o = telecert(&["mc-check", "--p", "0.5", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certify_rows_agree_with_sweep() {
    let c = json(&["certify", "--resource", "ad-mad", "--p", "0.5"]);
    let s = json(&["sweep", "--resource", "ad-mad", "--steps", "3"]);
    let mid: Vec<&Value> = s["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| num(&r["p"]) == 0.5)
        .collect();
    let rows: Vec<&Value> = c["rows"].as_array().unwrap().iter().collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows, mid);
}
