use bsingular::config::FunctionSpec;
use bsingular::corpus::corpus_member;
use bsingular::harness::{boundedness, Harness};
use bsingular::{run_sweep, Check, Section, Status, SweepConfig};
use bsingular_core::{absolute_index_moment, basis, bernstein_apply, fit_rate};

fn config(functions: &[&str], checks: &[Check]) -> SweepConfig {
    SweepConfig {
        functions: functions.iter().map(|f| FunctionSpec::corpus(f)).collect(),
        checks: checks.to_vec(),
        n_list: vec![32, 64, 128, 256],
        ..SweepConfig::default()
    }
}

fn find<'a>(sections: &'a [Section], criterion: &str, function: &str, scheme: &str) -> &'a Section {
    sections
        .iter()
        .find(|s| s.criterion == criterion && s.function == function && s.scheme == scheme)
        .unwrap_or_else(|| panic!("no {criterion} section for {function} {scheme}"))
}

#[test]
fn kink_error_at_the_kink_decays_like_inverse_square_root() {
    let f = corpus_member("|t-1/2|").unwrap();
    let pairs: Vec<(f64, f64)> = (6..=12)
        .map(|j| 1u64 << j)
        .map(|n| (n as f64, bernstein_apply(&f, n, 0.5).unwrap().abs()))
        .collect();
    let fit = fit_rate(&pairs).unwrap();
    assert!((fit.exponent + 0.5).abs() < 0.1, "{fit:?}");
}

#[test]
fn index_moment_of_order_two_is_the_variance() {
    let (n, x) = (10, 0.3);
    let got = absolute_index_moment(n, 2.0, x).unwrap();
    let want = n as f64 * x * (1.0 - x);
    assert!((got / want - 1.0).abs() < 1e-14);

    let by_hand: f64 = (0..=n)
        .map(|k| (k as f64 - n as f64 * x).powi(2) * basis(n, k, x).unwrap())
        .sum();
    assert!((by_hand / want - 1.0).abs() < 1e-14);
}

#[test]
fn lemma2_ratio_at_gamma_two_is_one() {
    let cfg = SweepConfig {
        gammas: vec![2.0],
        ..SweepConfig::default()
    };
    let h = Harness::new(&cfg).unwrap();
    let s = h.lemma2(2.0).unwrap();
    assert_eq!(s.status, Status::Pass);
    for v in &s.series[0].y {
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn constant_gives_vanishing_theorem1_ratio() {
    let report = run_sweep(&config(&["one"], &[Check::Theorem1])).unwrap();
    for s in report.sections.iter().filter(|s| s.criterion == "theorem1") {
        assert_eq!(s.status, Status::Saturated);
        assert!(s.series[0].y.iter().all(|v| v.abs() < 1e-8));
    }
}

#[test]
fn corollary_at_lambda_one_reduces_to_the_theorems() {
    let mut cfg = config(
        &["t^1/2"],
        &[Check::Theorem1, Check::Theorem2, Check::Corollary],
    );
    cfg.lambda = 1.0;
    let report = run_sweep(&cfg).unwrap();
    for scheme in ["m=1,geometric", "m=2,geometric"] {
        let cor = find(&report.sections, "corollary", "t^1/2", scheme);
        let pairs = [("theorem1", 0), ("theorem2", 1)];
        for (criterion, branch) in pairs {
            let base = &find(&report.sections, criterion, "t^1/2", scheme).series[0].y;
            let other = &cor.series[branch].y;
            assert_eq!(base.len(), other.len());
            for (a, b) in base.iter().zip(other) {
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1e-300),
                    "{criterion}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn fit_recovers_exact_power_laws() {
    for a in [-2.0, -0.5, 0.75, 1.5] {
        let pairs: Vec<(f64, f64)> = (1..=8)
            .map(|j| (j as f64 * 0.1, 3.0 * (j as f64 * 0.1f64).powf(a)))
            .collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.exponent - a).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!((fit.predict(0.25) - 3.0 * 0.25f64.powf(a)).abs() < 1e-10);
    }
    assert!(fit_rate(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
    assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0), (4.0, 4.0)]).is_err());
}

#[test]
fn proxy_on_decreasing_and_growing_sequences() {
    assert_eq!(boundedness(&[1.0, 0.9, 0.8, 0.7]).status, Status::Pass);
    assert_eq!(boundedness(&[1.0, 1.2, 2.0, 4.0]).status, Status::Fail);
    assert_eq!(boundedness(&[0.0, 0.0, 0.0, 0.0]).status, Status::Saturated);
    assert_eq!(boundedness(&[1.0, f64::NAN, 1.0, 1.0]).status, Status::Fail);
}
