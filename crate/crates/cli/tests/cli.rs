use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wline")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn put(&self, name: &str, body: &str) -> String {
        let path: PathBuf = self.dir.path().join(name);
        fs::write(&path, body).unwrap();
        path.to_str().unwrap().to_string()
    }
}

fn discrete(domain: &str, atoms: &str) -> String {
    format!(r#"{{"domain":"{domain}","type":"discrete","atoms":{atoms}}}"#)
}

#[test]
fn dist_prints_fifteen_digits() {
    let f = Files::new();
    let a = f.put("a.json", &discrete("real", "[[0,1]]"));
    let b = f.put("b.json", &discrete("real", "[[1,1]]"));
    let o = wline(&["dist", &a, &b, "--p", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.00000000000000");
}

#[test]
fn dist_closed_form_value() {
    // half the mass travels 1/2 each way: (1/2 * 1/4 + 1/2 * 1/4)^(1/2) = 1/2
    let f = Files::new();
    let a = f.put("a.json", &discrete("real", "[[0,0.5],[1,0.5]]"));
    let b = f.put("b.json", &discrete("real", "[[0.5,1]]"));
    let o = wline(&["dist", &a, &b, "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let d: f64 = stdout(&o).trim().parse().unwrap();
    assert!((d - 0.5).abs() < 1e-14);
}

#[test]
fn dist_quantile_form() {
    let f = Files::new();
    let a = f.put("a.json", r#"{"domain":"real","type":"pl_quantile","breaks":[0,1],"segments":[[0,1]]}"#);
    let b = f.put("b.json", &discrete("real", "[[0,1]]"));
    let o = wline(&["dist", &a, &b]);
    assert_eq!(stdout(&o).trim(), "0.500000000000000");
}

#[test]
fn parse_and_domain_errors() {
    let f = Files::new();
    let bad = f.put("bad.json", "{");
    let a = f.put("a.json", &discrete("real", "[[0,1]]"));
    let u = f.put("u.json", &discrete("unit", "[[0.5,1]]"));
    let neg = f.put("neg.json", &discrete("real", "[[0,-1]]"));
    assert_eq!(wline(&["dist", &bad, &a]).status.code(), Some(2));
    assert_eq!(wline(&["dist", &neg, &a]).status.code(), Some(2));
    assert_eq!(wline(&["dist", &a, "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(wline(&["dist", &a, &u]).status.code(), Some(3));
    assert_eq!(wline(&["dist", &a]).status.code(), Some(2));
}

#[test]
fn apply_flip_on_dirac() {
    let f = Files::new();
    let iso = f.put("flip.json", r#"{"kind":"flip"}"#);
    let m = f.put("m.json", &discrete("unit", "[[0.3,1]]"));
    let o = wline(&["apply", &iso, &m]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"domain":"unit","type":"discrete","atoms":[[0.0,0.3],[1.0,0.7]]}"#);
}

#[test]
fn apply_exotic_identity_and_scope() {
    let f = Files::new();
    let iso = f.put("ex.json", r#"{"kind":"exotic","q":0.0}"#);
    let m = f.put("m.json", &discrete("real", "[[-1.5,0.25],[2,0.75]]"));
    let canonical = wline(&["apply", &iso, &m]);
    assert_eq!(canonical.status.code(), Some(0));
    let again = f.put("again.json", stdout(&canonical).trim());
    let twice = wline(&["apply", &iso, &again]);
    assert_eq!(stdout(&twice), stdout(&canonical));

    let u = f.put("u.json", &discrete("unit", "[[0.5,1]]"));
    assert_eq!(wline(&["apply", &iso, &u]).status.code(), Some(3));
    assert_eq!(wline(&["apply", "--q", "0.5", &u]).status.code(), Some(3));
}

#[test]
fn apply_output_round_trips() {
    let f = Files::new();
    let m = f.put("m.json", &discrete("real", "[[-1,0.5],[1,0.5]]"));
    let o = wline(&["apply", "--q", "-0.5", &m]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["type"], "discrete");
    let back = f.put("back.json", stdout(&o).trim());
    let undo = wline(&["apply", "--q", "0.5", &back]);
    let w: serde_json::Value = serde_json::from_str(stdout(&undo).trim()).unwrap();
    let atoms = w["atoms"].as_array().unwrap();
    assert!((atoms[0][0].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!((atoms[1][1].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn translation_descriptor() {
    let f = Files::new();
    let iso = f.put(
        "t.json",
        &format!(r#"{{"kind":"compose","items":[{{"kind":"translation","nu":{}}}]}}"#, discrete("real", "[[2,1]]")),
    );
    let m = f.put("m.json", &discrete("real", "[[0,0.5],[1,0.5]]"));
    let o = wline(&["apply", &iso, &m]);
    assert_eq!(stdout(&o).trim(), r#"{"domain":"real","type":"discrete","atoms":[[2.0,0.5],[3.0,0.5]]}"#);
}

#[test]
fn verify_suites_and_exit_codes() {
    let f = Files::new();
    let out = f.dir.path().join("report.csv");
    let o = wline(&["verify", "slice-diameter", "--trials", "2000", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("claim_id,trial,quantity,expected,measured,abs_err,passed\n"));
    assert!(csv.lines().any(|l| l.starts_with("summary,slice-diameter:t=0.25,2000,")));
    assert!(stdout(&o).contains("PASS"));

    assert_eq!(wline(&["verify", "exotic-two-point", "--trials", "500", "--seed", "7"]).status.code(), Some(0));
    assert_eq!(wline(&["verify", "unknown-suite"]).status.code(), Some(4));
}

#[test]
fn verify_is_deterministic() {
    let a = wline(&["verify", "midpoint-geometry", "--trials", "40", "--seed", "3"]);
    let b = wline(&["verify", "midpoint-geometry", "--trials", "40", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = wline(&["verify", "midpoint-geometry", "--trials", "40", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generate_examples() {
    let o = wline(&["generate", "qn", "--n", "1"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 2);
    let w0: Vec<f64> = list.iter().map(|m| m["atoms"][0][1].as_f64().unwrap()).collect();
    assert_eq!(w0, vec![0.25, 0.75]);

    let o = wline(&["generate", "two-point", "--x", "0", "--sigma", "1", "--p", "0"]);
    assert_eq!(stdout(&o).trim(), r#"[{"domain":"real","type":"discrete","atoms":[[-1.0,0.5],[1.0,0.5]]}]"#);

    let f = Files::new();
    let o = wline(&["generate", "slice-extremal", "--t", "0.25"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let a = f.put("a.json", &v[0].to_string());
    let b = f.put("b.json", &v[1].to_string());
    assert_eq!(stdout(&wline(&["dist", &a, &b])).trim(), "0.375000000000000");

    let o = wline(&["generate", "mn-random", "--n", "2", "--seed", "5"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v[0]["atoms"].as_array().unwrap().len(), 4);
}

#[test]
fn generate_bad_params() {
    assert_eq!(wline(&["generate", "slice-extremal", "--t", "1.5"]).status.code(), Some(2));
    assert_eq!(wline(&["generate", "two-point", "--x", "0", "--sigma", "-1", "--p", "0"]).status.code(), Some(2));
    assert_eq!(wline(&["generate", "qn", "--n", "x"]).status.code(), Some(2));
    assert_eq!(wline(&["generate", "mn-random", "--n", "40"]).status.code(), Some(2));
}
