use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sphkern"));
    c.env("RUST_LOG", "warn");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

/// `(b_md, psi_hat_m, provenance)` per row of a coefficient table.
fn table(text: &str) -> Vec<(f64, f64, String)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,b_md,psi_hat_m,provenance,tail_bound"));
    lines
        .enumerate()
        .map(|(m, l)| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[0].parse::<usize>().unwrap(), m);
            (
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].to_string(),
            )
        })
        .collect()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn ffamily_routes_agree_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("coeffs_ffamily.json");
    let cfg = cfg.to_str().unwrap();
    let closed = dir.path().join("closed.csv");
    let quad = dir.path().join("quad.csv");
    for (route, out) in [("closed", &closed), ("quadrature", &quad)] {
        let o = run(&[
            "coeffs",
            "--config",
            cfg,
            "--route",
            route,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = table(&fs::read_to_string(&closed).unwrap());
    let b = table(&fs::read_to_string(&quad).unwrap());
    assert_eq!(a.len(), 21);
    assert_eq!(b.len(), 21);
    for ((ba, pa, sa), (bb, pb, sb)) in a.iter().zip(&b) {
        assert!((ba - bb).abs() < 1e-7);
        assert!((pa - pb).abs() < 1e-7 * pb.abs().max(1.0));
        assert_eq!(sa, "ClosedForm");
        assert_eq!(sb, "Quadrature");
    }
}

#[test]
fn constant_kernel_has_one_row() {
    let o = run(&["coeffs", "--kernel", "custom:cos_power=1", "--dim", "2"]);
    assert_eq!(code(&o), 0);
    let rows = table(std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0, 1.0);
}

#[test]
fn integer_matern_falls_back_to_quadrature() {
    let o = run(&[
        "coeffs",
        "--kernel",
        "matern:nu=2,alpha=0.7",
        "--dim",
        "2",
        "--truncation",
        "8",
    ]);
    assert_eq!(code(&o), 0);
    let rows = table(std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.2 == "Quadrature"));
}

#[test]
fn json_table_round_trips() {
    let o = run(&[
        "coeffs",
        "--kernel",
        "matern:nu=1.5,alpha=0.7",
        "--dim",
        "3",
        "--truncation",
        "12",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["dim"], 3);
    assert_eq!(v["coeffs"].as_array().unwrap().len(), 13);
    assert_eq!(v["provenance"], "ClosedForm");
}

fn beta_of(args: &[&str]) -> f64 {
    let o = run(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    json(&o)["beta"].as_f64().unwrap()
}

#[test]
fn identify_matern_and_wendland() {
    let m = configs().join("identify_matern.json");
    let beta = beta_of(&["identify", "--config", m.to_str().unwrap()]);
    assert!((beta / 2.5 - 1.0).abs() < 0.02, "{beta}");
    let w = configs().join("identify_wendland.json");
    let beta = beta_of(&["identify", "--config", w.to_str().unwrap()]);
    assert!((beta / 2.5 - 1.0).abs() < 0.05, "{beta}");
}

#[test]
fn identify_ffamily_on_s3() {
    // a shorter fit range than the checked-in config keeps this quick
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "f.json",
        r#"{"kernel":{"family":"ffamily","tau":2,"alpha":1.5,"nu":1},"dim":3,
            "fit_range":{"lo":100,"hi":400}}"#,
    );
    let beta = beta_of(&["identify", "--config", cfg.to_str().unwrap()]);
    assert!((beta / 2.5 - 1.0).abs() < 0.02, "{beta}");
}

#[test]
fn eval_grid_reconstructs() {
    let o = run(&[
        "eval",
        "--kernel",
        "matern:nu=1.5,alpha=0.7",
        "--dim",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let rows = json(&o);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 50);
    for r in rows {
        let err = r["abs_error"].as_f64().unwrap();
        assert!(err <= r["tail_bound"].as_f64().unwrap() + 1e-8);
    }
    assert_eq!(rows[0]["psi"], 1.0);
}

#[test]
fn validate_matern_passes() {
    let cfg = configs().join("validate_matern.json");
    let o = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn corrupted_coefficients_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    let o = run(&[
        "coeffs",
        "--kernel",
        "matern:nu=1.5,alpha=0.7",
        "--dim",
        "2",
        "--truncation",
        "40",
        "--out",
        good.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&good).unwrap();
    // scale b_2 by 1.01
    let bad: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i != 3 {
                return l.to_string();
            }
            let mut f: Vec<String> = l.split(',').map(String::from).collect();
            f[1] = (f[1].parse::<f64>().unwrap() * 1.01).to_string();
            f.join(",")
        })
        .collect();
    write(dir.path(), "bad.csv", &(bad.join("\n") + "\n"));
    let cfg = |file: &str| {
        write(
            dir.path(),
            &format!("{file}.json"),
            &format!(
                r#"{{"kernel":{{"family":"matern","nu":1.5,"alpha":0.7}},"dim":2,"coefficients":"{file}"}}"#
            ),
        )
    };
    let ok = run(&["validate", "--config", cfg("good.csv").to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let o = run(&["validate", "--config", cfg("bad.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    let mass = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "mass_conservation")
        .unwrap();
    assert_eq!(mass["passed"], false);
}

#[test]
fn identical_rules_have_zero_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let rule = dir.path().join("rule.csv");
    let o = run(&[
        "cubature",
        "--config",
        configs().join("random_rule.json").to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        rule.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let cfg = write(
        dir.path(),
        "cmp.json",
        r#"{"kernel":{"family":"matern","nu":1.5,"alpha":0.7},"dim":3,
            "rules":["rule.csv","rule.csv"]}"#,
    );
    let o = run(&["cubature", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&o)["discrepancy"].as_f64().unwrap().abs() < 1e-8);
}

fn wce(extra: &[&str]) -> f64 {
    let mut args = vec![
        "cubature",
        "--kernel",
        "matern:nu=1.5,alpha=0.7",
        "--dim",
        "2",
    ];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    json(&o)["wce"].as_f64().unwrap()
}

#[test]
fn seeds_move_random_rules_only() {
    let dir = tempfile::tempdir().unwrap();
    let rand = write(
        dir.path(),
        "r.json",
        r#"{"generator":{"kind":"uniform_random","seed":1},"n_grid":[64]}"#,
    );
    let fib = write(
        dir.path(),
        "f.json",
        r#"{"generator":{"kind":"fibonacci"},"n_grid":[64]}"#,
    );
    let (r, f) = (rand.to_str().unwrap(), fib.to_str().unwrap());
    assert_ne!(
        wce(&["--config", r, "--seed", "1"]),
        wce(&["--config", r, "--seed", "2"])
    );
    assert_eq!(
        wce(&["--config", f, "--seed", "1"]),
        wce(&["--config", f, "--seed", "2"])
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cfg = configs().join("random_rule.json");
    let args = [
        "cubature",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "coeffs",
        "--kernel",
        "wendland:nu=4,alpha=1,eps=0.75",
        "--dim",
        "3",
    ]);
    let d = run(&[
        "coeffs",
        "--kernel",
        "wendland:nu=4,alpha=1,eps=0.75",
        "--dim",
        "3",
    ]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn rate_study_reproduces_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rate.csv");
    let o = run(&[
        "cubature",
        "--config",
        configs().join("rate_study_matern.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(&out).unwrap();
    assert!(table.starts_with("n,wce\n100,"));
    assert_eq!(table.lines().count(), 7);
    let side: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rate.json")).unwrap()).unwrap();
    let slope = side["slope"].as_f64().unwrap();
    assert!((-1.44..=-1.06).contains(&slope), "{slope}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.json", r#"{"dim":2,"colour":"red"}"#);
    assert_eq!(
        code(&run(&["coeffs", "--config", unknown.to_str().unwrap()])),
        2
    );
    assert_eq!(code(&run(&["coeffs", "--dim", "2"])), 2);
    assert_eq!(
        code(&run(&[
            "coeffs",
            "--kernel",
            "matern:nu=1,alpha=1",
            "--dim",
            "2",
            "--route",
            "x"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "coeffs",
            "--kernel",
            "matern:nu=1.5,alpha=1",
            "--dim",
            "2",
            "--route",
            "projection"
        ])),
        2
    );
    let strict = write(
        dir.path(),
        "q.json",
        r#"{"kernel":{"family":"matern","nu":1.5,"alpha":0.7},"dim":2,"truncation":4,
            "route":"quadrature","tolerances":{"quad_tol":1e-300}}"#,
    );
    let o = run(&["coeffs", "--config", strict.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("schoenberg_coeffs"));
}

#[test]
fn ffamily_projection_matches_closed_form() {
    let cfg = configs().join("validate_ffamily.json");
    let o = run(&[
        "validate",
        "--config",
        cfg.to_str().unwrap(),
        "--truncation",
        "400",
    ]);
    let v = json(&o);
    let checks = v["checks"].as_array().unwrap();
    for name in ["projection_vs_closed", "closed_vs_quadrature"] {
        let c = checks.iter().find(|c| c["name"] == name).unwrap();
        assert_eq!(c["passed"], true, "{c}");
    }
}
