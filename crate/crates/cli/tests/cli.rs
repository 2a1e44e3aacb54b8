use std::process::{Command, Output};

use serde_json::Value;

fn ruelle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruelle")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn dobrushin_reports_bar_c_and_threshold() {
    let v = json(&ruelle(&["dobrushin", "--alpha", "2", "--beta", "0.1"]));
    let r = &v["result"];
    assert!((r["bar_c"].as_f64().unwrap() - 0.328_986_813_369_645_3).abs() < 1e-8);
    assert!((r["beta_du"].as_f64().unwrap() - 0.303_963_550_927_013_3).abs() < 1e-8);
    assert_eq!(v["meta"]["alpha"], 2.0);
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn region_labels() {
    let v = json(&ruelle(&["region", "--alpha", "1.4", "--beta", "0.05"]));
    let label = v["result"]["label"].as_str().unwrap();
    assert!(label.starts_with("(d): integrable eigenfunction"));
    assert!(label.contains("conjectur"));
    let v = json(&ruelle(&["region", "--alpha", "3", "--beta", "5"]));
    assert!(v["result"]["label"].as_str().unwrap().starts_with("(a)"));
    let v = json(&ruelle(&["region", "--alpha", "1.2", "--beta", "10"]));
    assert!(v["result"]["label"].as_str().unwrap().contains("outside proven regime"));
}

#[test]
fn exit_codes() {
    let out = ruelle(&["eigen", "--alpha", "2", "--beta", "999"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beta exceeds Dobrushin threshold"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
    assert_eq!(ruelle(&["eigen", "--alpha", "2", "--beta", "0.1", "--depth", "25"]).status.code(), Some(3));
    assert_eq!(ruelle(&["eigen", "--alpha", "2", "--beta", "0.1", "--bogus", "1"]).status.code(), Some(64));
    assert_eq!(ruelle(&["dobrushin", "--beta", "0.1"]).status.code(), Some(64));
    assert_eq!(ruelle(&["region", "--alpha", "0.5", "--beta", "0.1"]).status.code(), Some(2));
    assert_eq!(ruelle(&["--help"]).status.code(), Some(0));
}

#[test]
fn csv_floats_carry_17_digits() {
    let out = ruelle(&["density", "--alpha", "2", "--beta", "0.1", "--depth", "2", "--N", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# alpha="));
    assert_eq!(lines.next().unwrap(), "word,value,std_err");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let value = r.split(',').nth(1).unwrap();
        let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17, "{value}");
    }
}

#[test]
fn artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let mut args = extra.to_vec();
        args.extend(["--out", p]);
        assert!(ruelle(&args).status.success());
        std::fs::read(&path).unwrap()
    };
    let shift = ["shift", "--alpha", "2", "--beta", "0.1", "--window", "16", "--samples", "200", "--N", "0,4"];
    assert_eq!(run("a.csv", &shift), run("b.csv", &shift));
    let mut one = vec!["density", "--alpha", "2", "--beta", "0.1", "--depth", "3", "--N", "6", "--threads", "1"];
    let a = run("c.csv", &one);
    one[10] = "2";
    assert_eq!(a, run("d.csv", &one));
    let sample = ["sample", "--alpha", "2", "--beta", "0.1", "--window", "6", "--samples", "200", "--seed", "3"];
    assert_eq!(run("e.json", &sample), run("f.json", &sample));
}

#[test]
fn kernel_mixed_tails_is_one_half() {
    let v = json(&ruelle(&["kernel", "--alpha", "2", "--beta", "0.1", "--tail", "plus", "--left-tail", "minus"]));
    assert_eq!(v["result"]["p_plus"], 0.5);
    assert_eq!(v["result"]["p_plus_closed_form"], 0.5);
}

#[test]
fn concentration_passes_in_regime() {
    let v = json(&ruelle(&["concentration", "--alpha", "2", "--beta", "0.1", "--window", "8", "--format", "json"]));
    assert_eq!(v["result"]["all_pass"], true);
}
