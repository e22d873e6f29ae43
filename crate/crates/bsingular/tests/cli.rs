use std::path::Path;
use std::process::{Command, Output};

use bsingular::config::FunctionSpec;
use bsingular::harness::refit;
use bsingular::{Check, Status, SweepConfig, SweepReport};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsingular"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_config(functions: &[&str], checks: &[Check]) -> SweepConfig {
    SweepConfig {
        functions: functions.iter().map(|f| FunctionSpec::corpus(f)).collect(),
        checks: checks.to_vec(),
        n_list: vec![32, 64, 128],
        ..SweepConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &SweepConfig) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn eval_basis_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &[
            "eval", "--op", "basis", "--n", "2", "--k", "1", "--x", "0.5",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.5");
}

#[test]
fn eval_bernstein_of_square() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &[
            "eval", "--op", "Bn", "--f", "t^2", "--n", "10", "--x", "0.3,0.7",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let v: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    for (got, x) in v.iter().zip([0.3, 0.7]) {
        let want = x * x + x * (1.0 - x) / 10.0;
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }
}

#[test]
fn eval_modified_function_at_singular_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &[
            "eval", "--op", "Fn", "--f", "t^-0.25", "--n", "100", "--r", "2", "--x", "0,1",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    for line in stdout(&o).lines() {
        assert!(line.parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn unknown_inputs_fail() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!bin(
        &["eval", "--op", "nope", "--n", "4", "--x", "0.5"],
        dir.path()
    )
    .status
    .success());
    let o = bin(
        &[
            "eval", "--op", "Bn", "--f", "sqrt(", "--n", "4", "--x", "0.5",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown function"));
}

fn modulus_rows(text: &str) -> Vec<[f64; 4]> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn modulus_of_constant_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["modulus", "--f", "one"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("t,omega,Omega,K"));
    let rows = modulus_rows(&text);
    assert_eq!(rows.len(), 9);
    assert!(rows.windows(2).all(|p| p[0][0] < p[1][0]));
    assert!(rows
        .iter()
        .all(|r| r[1] == 0.0 && r[2] == 0.0 && r[3] == 0.0));
}

#[test]
fn modulus_of_square_root_is_first_order_in_t() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = bin(
        &[
            "modulus",
            "--f",
            "t^1/2",
            "--alpha",
            "0",
            "--beta",
            "0.5",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let fit = text
        .lines()
        .find(|l| l.starts_with("# fit omega:"))
        .unwrap();
    let exponent: f64 = fit
        .split("exponent=")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((exponent - 1.0).abs() < 0.05, "{fit}");
}

#[test]
fn verify_rejects_narrow_step_weight() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(&["t^1/2"], &[Check::Theorem1]);
    cfg.step_weight = serde_json::from_str(r#"{"beta0": 0.3, "beta1": 0.5}"#).unwrap();
    let path = write_config(dir.path(), &cfg);
    let o = bin(&["verify", "--config", &path], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("min{β(0),β(1)} ≥ 1/2"));
}

#[test]
fn polynomials_saturate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(
        &["one", "t"],
        &[Check::Theorem1, Check::Theorem2, Check::Lemma5],
    );
    let path = write_config(dir.path(), &cfg);
    let o = bin(
        &["verify", "--config", &path, "--json", "r.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stdout(&o));
    let report = SweepReport::read_json(&dir.path().join("r.json")).unwrap();
    assert!(report.all_passed);
    assert!(!report.sections.is_empty());
    for s in &report.sections {
        let want = if s.criterion == "lemma5" {
            Status::Pass
        } else {
            Status::Saturated
        };
        assert_eq!(s.status, want, "{} {}", s.criterion, s.function);
    }
}

#[test]
fn plotdata_files_match_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(
        &["t^1/2", "|t-1/2|^3/2"],
        &[Check::Modulus, Check::KFunctional],
    );
    let path = write_config(dir.path(), &cfg);
    assert!(bin(
        &["verify", "--config", &path, "--json", "r.json"],
        dir.path()
    )
    .status
    .success());
    let o = bin(
        &["plotdata", "--report", "r.json", "--out-dir", "plots"],
        dir.path(),
    );
    assert!(o.status.success());
    let files: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(files.len(), 4, "{files:?}");

    let report = SweepReport::read_json(&dir.path().join("r.json")).unwrap();
    for s in &report.sections {
        for series in &s.series {
            if let (Some(fit), Some(again)) = (&series.fit, refit(series)) {
                assert!((fit.exponent - again).abs() < 1e-9);
            }
        }
    }
    for file in files {
        let text = std::fs::read_to_string(dir.path().join(&file)).unwrap();
        let mut rows = 0;
        for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
            let cols: Vec<&str> = line.split('\t').collect();
            assert_eq!(cols.len(), 5);
            assert!(cols[3..]
                .iter()
                .all(|c| c.parse::<f64>().unwrap().is_finite()));
            rows += 1;
        }
        assert!(rows > 0, "{file}");
    }
}

#[test]
fn report_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(
        &["t^1/2", "t^3/4"],
        &[Check::Lemma1, Check::Theorem1, Check::FitCalibration],
    );
    let path = write_config(dir.path(), &cfg);
    let mut reports = Vec::new();
    for t in ["1", "2"] {
        let sub = dir.path().join(t);
        std::fs::create_dir(&sub).unwrap();
        assert!(bin(
            &[
                "verify",
                "--config",
                &path,
                "--threads",
                t,
                "--json",
                "r.json"
            ],
            &sub
        )
        .status
        .success());
        reports.push(std::fs::read(sub.join("r.json")).unwrap());
    }
    assert!(reports[0] == reports[1]);
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&["t^3/4"], &[Check::Direct]);
    let path = write_config(dir.path(), &cfg);
    let o = bin(&["verify", "--config", &path, "--print-config"], dir.path());
    assert!(o.status.success());
    let back = SweepConfig::from_json(&stdout(&o)).unwrap();
    assert_eq!(back.to_json().unwrap(), cfg.to_json().unwrap());
}
