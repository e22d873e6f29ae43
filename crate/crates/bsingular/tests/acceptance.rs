//! Acceptance run: one pass/fail line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bsingular::config::{Check, FunctionSpec, SweepConfig};
use bsingular::corpus::default_corpus;
use bsingular::harness::Harness;
use bsingular::report::{Status, SweepReport};
use bsingular::run_sweep;
use bsingular_core::endpoint::Zone;
use bsingular_core::sum::compensated_sum;
use bsingular_core::{
    basis_row, moment_annihilation, CombinationScheme, JacobiWeight, ModifiedFunction,
    SampledFunction,
};
use num_rational::BigRational;
use num_traits::ToPrimitive;

type Outcome = Result<String, String>;

fn powers(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(took)
    } else {
        Err(format!("{what} took {took:.1?}, limit {limit:?}"))
    }
}

/// `(Σ p_k, Σ (k/n) p_k)` in plain arithmetic over four lanes; rounding in
/// the sums only adds to the measured deviation.
fn moment_sums(row: &[f64], nf: f64) -> (f64, f64) {
    let mut s0 = [0.0f64; 4];
    let mut s1 = [0.0f64; 4];
    let chunks = row.chunks_exact(4);
    let tail = chunks.remainder();
    for (c, chunk) in chunks.enumerate() {
        for (l, &p) in chunk.iter().enumerate() {
            s0[l] += p;
            s1[l] += (4 * c + l) as f64 * p;
        }
    }
    let base = row.len() - tail.len();
    for (l, &p) in tail.iter().enumerate() {
        s0[l] += p;
        s1[l] += (base + l) as f64 * p;
    }
    (
        (s0[0] + s0[1]) + (s0[2] + s0[3]),
        ((s1[0] + s1[1]) + (s1[2] + s1[3])) / nf,
    )
}

fn basis_correctness() -> Outcome {
    let start = Instant::now();
    let xs: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    let (mut worst_unity, mut worst_linear) = (0.0f64, 0.0f64);
    let mut row = Vec::new();
    for n in 1..=2048u64 {
        let nf = n as f64;
        for &x in &xs {
            bsingular_core::bernstein::basis_row_into(n, x, &mut row).map_err(|e| e.to_string())?;
            let (unity, linear) = moment_sums(&row, nf);
            worst_unity = worst_unity.max((unity - 1.0).abs());
            worst_linear = worst_linear.max((linear - x).abs());
        }
    }
    let took = within(start, Duration::from_secs(30), "basis sweep")?;
    let msg = format!(
        "max |Σp − 1| = {worst_unity:.2e}, max |B_n(t) − x| = {worst_linear:.2e}, {took:.1?}"
    );
    if worst_unity <= 1e-12 && worst_linear <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn combination_exactness() -> Outcome {
    let exact = |m: usize| -> Result<Vec<f64>, String> {
        let s = CombinationScheme::geometric(64, m).map_err(|e| e.to_string())?;
        Ok(s.exact_coefficients()
            .iter()
            .map(|c: &BigRational| c.to_f64().unwrap())
            .collect())
    };
    let c2 = exact(2)?;
    let c3 = exact(3)?;
    let expect2 = [-1.0, 2.0];
    let expect3 = [1.0 / 3.0, -2.0, 8.0 / 3.0];
    let coef_err = c2
        .iter()
        .zip(&expect2)
        .chain(c3.iter().zip(&expect3))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if coef_err > 1e-14 {
        return Err(format!("coefficient error {coef_err:.2e}"));
    }
    let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut worst = 0.0f64;
    for n in powers(4, 10) {
        for m in 1..=4usize {
            let s = CombinationScheme::geometric(n, m).map_err(|e| e.to_string())?;
            for &x in &xs {
                let lib = moment_annihilation(&s, m as u32, x).map_err(|e| e.to_string())?;
                for k in 1..=m as u32 {
                    // Brute force over the basis rows of every term.
                    let brute =
                        compensated_sum(s.coefficients().iter().zip(s.degrees()).map(|(c, &d)| {
                            let row = basis_row(d, x).unwrap();
                            let df = d as f64;
                            c * compensated_sum(
                                row.iter()
                                    .enumerate()
                                    .map(|(j, p)| (j as f64 / df - x).powi(k as i32) * p),
                            )
                        }));
                    worst = worst
                        .max(lib[k as usize - 1].abs() * n as f64)
                        .max(brute.abs() * n as f64);
                }
            }
        }
    }
    let msg =
        format!("coefficient error {coef_err:.1e}, max n·|B_(n,m)((·−x)^k, x)| = {worst:.2e}");
    if worst <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn endpoint_modification() -> Outcome {
    let w = JacobiWeight {
        alpha: 0.5,
        beta: 0.5,
    };
    let corpus = default_corpus(&w);
    let xs: Vec<f64> = (0..=2000).map(|i| i as f64 / 2000.0).collect();
    let mut checked = 0;
    for f in &corpus {
        for n in [64u64, 256] {
            let fm = ModifiedFunction::new(f, n, 2).map_err(|e| e.to_string())?;
            let nf = n as f64;
            for &x in &xs {
                let v = fm.value(x);
                let ok = match fm.zone(x) {
                    Zone::Identity => v == f.eval(x),
                    Zone::LeftExtrapolant => v == fm.left_extrapolant().eval(x),
                    Zone::RightExtrapolant => v == fm.right_extrapolant().eval(x),
                    _ => v.is_finite(),
                };
                if !ok {
                    return Err(format!(
                        "{}: zone identity fails at n = {n}, x = {x}",
                        f.name()
                    ));
                }
                checked += 1;
            }
            for s in [1.0 / nf, 2.0 / nf, 1.0 - 2.0 / nf, 1.0 - 1.0 / nf] {
                let jump = |e: f64| (fm.value(s + e) - fm.value(s - e)).abs();
                let (wide, narrow) = (jump(1e-6), jump(1e-8));
                if narrow > 0.05 * wide + 1e-13 * (1.0 + fm.value(s).abs()) {
                    return Err(format!(
                        "{}: seam at {s} (n = {n}) jumps {narrow:.2e} at ε = 1e-8",
                        f.name()
                    ));
                }
            }
        }
    }
    let singular = corpus
        .iter()
        .find(|f| f.name() == "t^-1/4")
        .ok_or("t^-1/4 missing from corpus")?;
    for n in [64u64, 256] {
        let fm = ModifiedFunction::new(singular, n, 2).map_err(|e| e.to_string())?;
        let (a, b) = (fm.value(0.0), fm.value(1.0));
        if !(a.is_finite() && b.is_finite()) {
            return Err(format!("F_n(t^-1/4) not finite at the endpoints: {a}, {b}"));
        }
    }
    Ok(format!("{} functions × n ∈ {{64, 256}}, {checked} zone points, 4 seams each; F_n(t^-1/4) finite at 0 and 1", corpus.len()))
}

fn lemma_suite() -> Outcome {
    let start = Instant::now();
    let cfg = SweepConfig {
        lemma_n_list: powers(4, 10),
        ..Default::default()
    };
    let h = Harness::new(&cfg).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut failed = Vec::new();
    for &(u, v) in &[(0.5, 0.0), (0.5, 0.5), (1.0, 1.0)] {
        let s = h.lemma1(u, v).map_err(|e| e.to_string())?;
        parts.push(format!(
            "L1(u={u},v={v}) C={:.3}",
            s.empirical_constant.unwrap()
        ));
        if s.status != Status::Pass {
            failed.push(s.function.clone());
        }
    }
    for g in [1.0, 2.0, 3.0] {
        let s = h.lemma2(g).map_err(|e| e.to_string())?;
        parts.push(format!("L2(γ={g}) C={:.3e}", s.empirical_constant.unwrap()));
        if s.status != Status::Pass {
            failed.push(s.function.clone());
        }
    }
    let took = within(start, Duration::from_secs(120), "lemma suite")?;
    let msg = format!("{}; {took:.1?}", parts.join(", "));
    if failed.is_empty() {
        Ok(msg)
    } else {
        Err(format!("failed {failed:?}: {msg}"))
    }
}

fn summarize(report: &SweepReport, criteria: &[&str]) -> Result<String, String> {
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for c in criteria {
        let sections: Vec<_> = report
            .sections
            .iter()
            .filter(|s| s.criterion == *c)
            .collect();
        if sections.is_empty() {
            failures.push(format!("{c}: no sections"));
            continue;
        }
        let constant = sections
            .iter()
            .filter_map(|s| s.empirical_constant)
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        let count = |st: Status| sections.iter().filter(|s| s.status == st).count();
        parts.push(format!(
            "{c}: {} pass/{} sat/{} skip, C ≤ {constant:.3}",
            count(Status::Pass),
            count(Status::Saturated),
            count(Status::Skipped)
        ));
        for s in sections.iter().filter(|s| s.status == Status::Fail) {
            failures.push(format!("{c} {} {}: {}", s.function, s.scheme, s.note));
        }
    }
    if failures.is_empty() {
        Ok(parts.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn sweep(cfg: SweepConfig) -> Result<SweepReport, String> {
    run_sweep(&cfg).map_err(|e| format!("{e:#}"))
}

fn theorem_bounds() -> Outcome {
    let start = Instant::now();
    let cfg = SweepConfig {
        checks: vec![Check::Theorem1, Check::Theorem2, Check::Lemma5],
        threads: Some(1),
        ..Default::default()
    };
    let report = sweep(cfg)?;
    let took = within(start, Duration::from_secs(600), "theorem sweep")?;
    summarize(
        &report,
        &["theorem1", "theorem2", "lemma3", "lemma5", "lemma7"],
    )
    .map(|s| format!("{s}; {took:.1?}"))
}

fn subjects(names: &[&str]) -> Vec<FunctionSpec> {
    names.iter().map(|n| FunctionSpec::corpus(n)).collect()
}

fn direct_estimate() -> Outcome {
    let cfg = SweepConfig {
        checks: vec![Check::Direct],
        functions: subjects(&["t^1/2", "t^3/4", "|t-1/2|^3/2"]),
        ..Default::default()
    };
    let report = sweep(cfg)?;
    if let Some(s) = report.sections.iter().find(|s| s.status != Status::Pass) {
        return Err(format!(
            "{} is {}: {}",
            s.function,
            s.status.as_str(),
            s.note
        ));
    }
    summarize(&report, &["direct"])
}

fn inverse_equivalence() -> Outcome {
    let cfg = SweepConfig {
        checks: vec![Check::Inverse],
        weight: JacobiWeight {
            alpha: 0.125,
            beta: 0.125,
        },
        functions: subjects(&["t^3/4", "|t-1/2|^3/2", "|t-1/2|"]),
        ..Default::default()
    };
    let report = sweep(cfg)?;
    let mut parts = Vec::new();
    for s in &report.sections {
        if s.status != Status::Pass {
            return Err(format!(
                "{} is {}: {}",
                s.function,
                s.status.as_str(),
                s.note
            ));
        }
        parts.push(format!("{}: {}", s.function, s.note));
    }
    let kink = report
        .sections
        .iter()
        .find(|s| s.function == "|t-1/2|")
        .ok_or("|t-1/2| missing")?;
    let a_mod = kink.empirical_constant.unwrap();
    if (a_mod - 1.0).abs() > 0.15 {
        return Err(format!("|t-1/2|: a_mod = {a_mod}"));
    }
    Ok(parts.join("; "))
}

fn modulus_consistency() -> Outcome {
    let cfg = SweepConfig {
        checks: vec![Check::Modulus],
        ..Default::default()
    };
    summarize(&sweep(cfg)?, &["modulus"])
}

fn k_functional_window() -> Outcome {
    let cfg = SweepConfig {
        checks: vec![Check::KFunctional],
        functions: subjects(&["|t-1/2|^3/2", "t^1/2"]),
        ..Default::default()
    };
    let report = sweep(cfg)?;
    let mut parts = Vec::new();
    for s in &report.sections {
        if s.status != Status::Pass {
            return Err(format!(
                "{} is {}: {}",
                s.function,
                s.status.as_str(),
                s.note
            ));
        }
        parts.push(format!("{}: {}", s.function, s.note));
    }
    Ok(parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 basis correctness", basis_correctness),
        ("2 combination exactness", combination_exactness),
        ("3 endpoint modification", endpoint_modification),
        ("4 lemma ratio suite", lemma_suite),
        ("5 theorem/lemma boundedness", theorem_bounds),
        ("6 direct estimate", direct_estimate),
        ("7 inverse equivalence", inverse_equivalence),
        ("8 modulus self-consistency", modulus_consistency),
        ("9 K-functional window", k_functional_window),
    ];
    // Criterion numbers given on the command line restrict the run.
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let selected: Vec<_> = criteria
        .iter()
        .filter(|(name, _)| {
            only.is_empty() || only.iter().any(|o| name.split(' ').next() == Some(o))
        })
        .collect();
    let mut failed = 0;
    for &&(name, run) in &selected {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        selected.len() - failed,
        selected.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
