//! Command-line behaviour: files written and the 0/1/2 exit-code contract.

mod common;

use std::path::Path;

use common::*;
use tempfile::TempDir;

const SIN_SMALL: &str =
    r#"{"model": {"kind": "sin_scalar"}, "grid": {"times": {"min": 0, "max": 8, "count": 33}}}"#;
const CONTRACTION: &str = r#"{"model": {"kind": "pure_exponential", "rate": -1}, "grid": {"times": {"min": 0, "max": 4, "count": 17}}}"#;

struct Dir {
    tmp: TempDir,
}

impl Dir {
    fn new() -> Self {
        Self { tmp: TempDir::new().unwrap() }
    }

    fn path(&self) -> &Path {
        self.tmp.path()
    }

    fn out(&self) -> String {
        self.path().join("out").to_str().unwrap().to_string()
    }

    fn scenario(&self, text: &str) -> String {
        write_file(self.path(), "scenario.json", text)
    }

    fn file(&self, name: &str) -> std::path::PathBuf {
        self.path().join("out").join(name)
    }

    fn run(&self, scenario: &str, args: &[&str]) -> i32 {
        let out = self.out();
        let mut all = vec![args[0], "--scenario", scenario, "--out-dir", &out];
        all.extend_from_slice(&args[1..]);
        cli(&all)
    }
}

#[test]
fn laws_report_shape() {
    let d = Dir::new();
    let sc = d.scenario(SIN_SMALL);
    assert_eq!(d.run(&sc, &["laws"]), 0);
    let doc = read_json(&d.file("laws_report.json"));
    assert_eq!(doc["verdict"], "pass");
    assert_eq!(doc["reports"].as_array().unwrap().len(), 2);
    assert!(!doc["reports"][1]["check"].as_str().unwrap().is_empty());

    let broken = d.scenario(r#"{"model": {"kind": "broken_cocycle"}, "grid": {"times": [0, 1, 2, 3]}}"#);
    assert_eq!(d.run(&broken, &["laws"]), 1);
    let doc = read_json(&d.file("laws_report.json"));
    assert_eq!(doc["verdict"], "fail");
    assert!(!doc["reports"][1]["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn estimate_then_check_every_property() {
    let d = Dir::new();
    let sc = d.scenario(SIN_SMALL);
    for p in ["decay", "instability", "exp-instability", "integral-instability"] {
        assert_eq!(d.run(&sc, &["estimate", "--property", p]), 0, "estimate {p}");
        let cert = d.file(&format!("cert_{p}.json"));
        let doc = read_json(&cert);
        assert_eq!(doc["kind"], p.replace('-', "_"));
        assert!(doc["grid_hash"].is_string());
        let cert = cert.to_str().unwrap().to_string();
        assert_eq!(d.run(&sc, &["check", "--property", p, "--cert", &cert]), 0, "check {p}");
        let report = read_json(&d.file(&format!("check_{p}.json")));
        assert_eq!(report["report"]["verdict"], "pass");
    }
    let fits = read_json(&d.file("fits_exp-instability.json"));
    assert_eq!(fits["result"], "certified");
}

#[test]
fn e4t_certificate_from_a_hand_written_file() {
    let d = Dir::new();
    let sc = d.scenario(SIN_SMALL);
    let cert = write_file(
        d.path(),
        "e4t.json",
        r#"{"kind": "exp_instability", "form": "parametric", "N": {"scale": 1, "rate": 4}, "nu": 3}"#,
    );
    assert_eq!(d.run(&sc, &["check", "--property", "exp-instability", "--cert", &cert]), 0);
    let too_fast = write_file(
        d.path(),
        "fast.json",
        r#"{"kind": "exp_instability", "form": "parametric", "N": {"scale": 1, "rate": 4}, "nu": 5}"#,
    );
    assert_eq!(d.run(&sc, &["check", "--property", "exp-instability", "--cert", &too_fast]), 1);
    let report = read_json(&d.file("check_exp-instability.json"));
    assert!(!report["report"]["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn negative_controls_exit_one() {
    let d = Dir::new();
    let sc = d.scenario(CONTRACTION);
    assert_eq!(d.run(&sc, &["estimate", "--property", "exp-instability"]), 1);
    assert_eq!(read_json(&d.file("fits_exp-instability.json"))["result"], "no-certificate");
    assert!(!d.file("cert_exp-instability.json").exists());

    let m = write_file(
        d.path(),
        "m.json",
        r#"{"kind": "integral_instability", "form": "parametric", "M": {"scale": 1, "rate": 0}}"#,
    );
    assert_eq!(d.run(&sc, &["check", "--property", "integral-instability", "--cert", &m]), 1);
    assert_eq!(d.run(&sc, &["theorem", "--theorem", "corollary"]), 1);
    let run = read_json(&d.file("theorem_corollary.json"));
    assert_eq!(run["verdict"], "fail");
}

#[test]
fn theorem_with_certificates() {
    let d = Dir::new();
    let sc = d.scenario(r#"{"model": {"kind": "pure_exponential", "rate": 3}, "grid": {"times": {"min": 0, "max": 4, "count": 17}}}"#);
    let f = write_file(
        d.path(),
        "f.json",
        r#"{"kind": "decay", "form": "parametric", "n_tilde": 1, "omega": 1}"#,
    );
    let m = write_file(
        d.path(),
        "m.json",
        r#"{"kind": "integral_instability", "form": "parametric", "M": {"scale": 1, "rate": 0}}"#,
    );
    assert_eq!(d.run(&sc, &["theorem", "--theorem", "thm2", "--cert", &f, "--cert", &m]), 0);
    let run = read_json(&d.file("theorem_thm2.json"));
    assert_eq!(run["verdict"], "pass");
    assert_eq!(run["quantities"]["lambda"].as_f64(), Some(2.0));

    // missing, duplicated and mismatched certificates are usage errors
    assert_eq!(d.run(&sc, &["theorem", "--theorem", "thm2", "--cert", &f]), 2);
    assert_eq!(d.run(&sc, &["theorem", "--theorem", "thm2", "--cert", &f, "--cert", &f, "--cert", &m]), 2);
    assert_eq!(d.run(&sc, &["check", "--property", "decay", "--cert", &m]), 2);
    assert_eq!(d.run(&sc, &["theorem", "--theorem", "thm9"]), 2);
}

#[test]
fn report_writes_crlf_csv() {
    let d = Dir::new();
    let sc = d.scenario(SIN_SMALL);
    assert_eq!(d.run(&sc, &["estimate", "--property", "decay"]), 0);
    let cert = d.file("cert_decay.json").to_str().unwrap().to_string();
    assert_eq!(d.run(&sc, &["report", "--cert", &cert]), 0);
    let table = std::fs::read_to_string(d.file("witness_tables.csv")).unwrap();
    assert!(table.starts_with("t,f_hat,N_hat,M_hat,N_exp_hat,nu\r\n"));
    assert_eq!(table.lines().count(), 34);
    let margins = std::fs::read_to_string(d.file("margins.csv")).unwrap();
    assert!(margins.starts_with("property,t,s,t0,x,v,margin\r\n"));
    assert_eq!(d.run(&sc, &["report"]), 2);
}

#[test]
fn malformed_scenarios_exit_two() {
    let fixtures = [
        ("not json", "{model"),
        ("missing model", r#"{"grid": {}}"#),
        ("unknown kind", r#"{"model": {"kind": "lorenz"}}"#),
        ("unknown field", r#"{"model": {"kind": "sin_scalar"}, "colour": 1}"#),
        ("decreasing times", r#"{"model": {"kind": "sin_scalar"}, "grid": {"times": [0, 2, 1]}}"#),
        ("negative time", r#"{"model": {"kind": "sin_scalar"}, "grid": {"times": [-1, 0, 1]}}"#),
        ("empty alphas", r#"{"model": {"kind": "diag_integral", "alphas": []}}"#),
        (
            "rel_tol too small",
            r#"{"model": {"kind": "sin_scalar"}, "tolerances": {"quad": {"rel_tol": 1e-14}}}"#,
        ),
        ("zero vector", r#"{"model": {"kind": "sin_scalar"}, "grid": {"vectors": [[0]]}}"#),
        ("wrong dimension", r#"{"model": {"kind": "sin_scalar"}, "grid": {"vectors": [[1, 2]]}}"#),
        ("times of wrong type", r#"{"model": {"kind": "sin_scalar"}, "grid": {"times": "all"}}"#),
        (
            "trivial base for generators",
            r#"{"model": {"kind": "diag_integral", "alphas": [1]}, "grid": {"base_points": [{"kind": "trivial", "value": 0}]}}"#,
        ),
    ];
    for (name, text) in fixtures {
        let d = Dir::new();
        let sc = d.scenario(text);
        assert_eq!(d.run(&sc, &["laws"]), 2, "{name}");
    }
    let d = Dir::new();
    let missing = d.path().join("absent.json");
    assert_eq!(d.run(missing.to_str().unwrap(), &["laws"]), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&[]), 2);
    assert_eq!(cli(&["frobnicate"]), 2);
    assert_eq!(cli(&["--help"]), 0);
    let d = Dir::new();
    let sc = d.scenario(SIN_SMALL);
    assert_eq!(d.run(&sc, &["estimate", "--property", "stability"]), 2);
    assert_eq!(d.run(&sc, &["estimate"]), 2);
    let bad = write_file(
        d.path(),
        "bad.json",
        r#"{"kind": "decay", "form": "parametric", "n_tilde": 0.5, "omega": 1}"#,
    );
    assert_eq!(d.run(&sc, &["check", "--property", "decay", "--cert", &bad]), 2);
    let extra = write_file(
        d.path(),
        "extra.json",
        r#"{"kind": "decay", "form": "parametric", "n_tilde": 2, "omega": 1, "nu": 3}"#,
    );
    assert_eq!(d.run(&sc, &["check", "--property", "decay", "--cert", &extra]), 2);
}
