//! Verification sweeps: bounded-ratio and slope-match checks for every
//! inequality, run over functions, degrees and schemes.

use anyhow::{anyhow, Result};
use bsingular_core::difference::central_with_step;
use bsingular_core::endpoint::Zone;
use bsingular_core::quadrature::GaussLegendre;
use bsingular_core::sum::compensated_sum;
use bsingular_core::{
    absolute_index_moment, basis_row, delta_n, fit_rate, from_fn, main_part_modulus,
    steklov_k_functional, CombinationScheme, JacobiWeight, Ladder, ModifiedCombination,
    ModulusCurve, Resolution, SampledFunction, StepWeight, T_MAX,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Check, SchemeSpec, Subject, SweepConfig};
use crate::corpus::TestFunction;
use crate::report::{ErrorTable, Section, Series, Status, SweepReport};

/// Second-half maximum may exceed the first-half maximum by this factor.
pub const PROXY_FACTOR: f64 = 1.5;
/// Ratios at or below this level count as vanishing.
pub const SATURATION: f64 = 1e-8;
/// Slope tolerance for the inverse check.
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// Relative modulus change allowed under grid refinement.
pub const STABILITY_TOLERANCE: f64 = 0.02;
/// Errors below this multiple of `‖wf‖` are rounding noise.
pub const NOISE_FLOOR: f64 = 1e-13;
/// Fixed two-sided window for the K-functional / main-part ratio.
pub const K_WINDOW: (f64, f64) = (1.0 / 50.0, 50.0);

/// Outcome of the boundedness proxy on a sweep of ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proxy {
    pub status: Status,
    pub first_max: f64,
    pub second_max: f64,
    pub constant: f64,
}

/// Second-half max ≤ 1.5 × first-half max; the halves share the middle
/// element when the length is odd.
pub fn boundedness(values: &[f64]) -> Proxy {
    let constant = values.iter().copied().fold(0.0f64, f64::max);
    let bad = |status| Proxy {
        status,
        first_max: f64::NAN,
        second_max: f64::NAN,
        constant,
    };
    if values.is_empty() {
        return bad(Status::Skipped);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Proxy {
            constant: f64::INFINITY,
            ..bad(Status::Fail)
        };
    }
    let l = values.len();
    let first_max = values[..(l + 1) / 2].iter().copied().fold(0.0f64, f64::max);
    let second_max = values[l / 2..].iter().copied().fold(0.0f64, f64::max);
    let status = if constant <= SATURATION {
        Status::Saturated
    } else if second_max <= PROXY_FACTOR * first_max {
        Status::Pass
    } else {
        Status::Fail
    };
    Proxy {
        status,
        first_max,
        second_max,
        constant,
    }
}

/// Every value ≤ 1.5 × the first one.
pub fn bounded_by_first(values: &[f64]) -> Proxy {
    let mut p = boundedness(values);
    if p.status == Status::Pass || p.status == Status::Fail {
        let cap = PROXY_FACTOR * values[0];
        p.status = if values.iter().all(|&v| v <= cap) {
            Status::Pass
        } else {
            Status::Fail
        };
    }
    p
}

fn proxy_section(mut section: Section, proxy: Proxy, series: Vec<Series>) -> Section {
    section.status = proxy.status;
    section.empirical_constant = Some(proxy.constant);
    section.note = format!(
        "first-half max {:.6e}, second-half max {:.6e}, factor {PROXY_FACTOR}",
        proxy.first_max, proxy.second_max
    );
    section.series = series;
    section
}

fn ratio_section(
    criterion: &str,
    function: &str,
    scheme: &str,
    x_name: &str,
    xs: Vec<f64>,
    ys: Vec<f64>,
) -> Section {
    let proxy = boundedness(&ys);
    let series = Series::new(criterion, x_name, xs, ys);
    proxy_section(
        Section::new(criterion, function, scheme),
        proxy,
        vec![series],
    )
}

fn sup<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter()
        .fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn powi(x: f64, r: u32) -> f64 {
    x.powi(r as i32)
}

/// Ratio `a / b` that is `0` when both vanish.
fn quotient(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Shared sweep state.
pub struct Harness<'a> {
    cfg: &'a SweepConfig,
    w: JacobiWeight,
    phi: StepWeight,
    grid: Vec<f64>,
    /// `{i/500}`, the grid of the weighted boundedness check.
    coarse: Vec<f64>,
}

/// One unit of parallel work.
#[derive(Debug, Clone, Copy)]
enum Task {
    Lemma1(f64, f64),
    Lemma2(f64),
    Lemma6(u32),
    Function(usize),
    CrossCheck,
    FitCalibration,
}

type TaskOutput = (Vec<Section>, Vec<ErrorTable>);

impl<'a> Harness<'a> {
    pub fn new(cfg: &'a SweepConfig) -> Result<Self> {
        let phi = cfg.step_weight.resolve()?;
        Ok(Self {
            cfg,
            w: cfg.weight,
            phi,
            grid: cfg.grid.points(),
            coarse: (0..=500).map(|i| i as f64 / 500.0).collect(),
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.iter().copied().filter(|&x| x > 0.0 && x < 1.0)
    }

    fn weighted_sup(&self, f: &TestFunction) -> f64 {
        sup(self.grid.iter().map(|&x| f.weighted_abs(&self.w, x)))
    }

    /// `‖wφ^r f^{(r)}‖` on the interior grid.
    fn smooth_sup(&self, f: &TestFunction, phi: &StepWeight) -> f64 {
        let r = self.cfg.r;
        sup(self.interior().map(|x| {
            self.w
                .weighted(x, powi(phi.eval(x), r) * f.expr().derivative(r, x).abs())
        }))
    }

    fn tasks(&self, subjects: &[Subject]) -> Vec<Task> {
        let cfg = self.cfg;
        let mut tasks = Vec::new();
        if cfg.has(Check::FitCalibration) {
            tasks.push(Task::FitCalibration);
        }
        if cfg.has(Check::Lemma1) {
            tasks.extend(cfg.uv.iter().map(|&(u, v)| Task::Lemma1(u, v)));
        }
        if cfg.has(Check::Lemma2) {
            tasks.extend(cfg.gammas.iter().map(|&g| Task::Lemma2(g)));
        }
        if cfg.has(Check::Lemma6) {
            tasks.extend(cfg.lemma6_orders.iter().map(|&r| Task::Lemma6(r)));
        }
        if cfg.has(Check::CrossCheck) {
            tasks.push(Task::CrossCheck);
        }
        if cfg.checks.iter().any(|c| c.per_function()) {
            tasks.extend((0..subjects.len()).map(Task::Function));
        }
        tasks
    }

    fn run_task(&self, task: Task, subjects: &[Subject]) -> Result<TaskOutput> {
        Ok(match task {
            Task::Lemma1(u, v) => (vec![self.lemma1(u, v)?], Vec::new()),
            Task::Lemma2(g) => (vec![self.lemma2(g)?], Vec::new()),
            Task::Lemma6(r) => (vec![self.lemma6(r)], Vec::new()),
            Task::CrossCheck => (vec![self.cross_check()?], Vec::new()),
            Task::FitCalibration => (vec![self.fit_calibration()], Vec::new()),
            Task::Function(i) => self.function_checks(&subjects[i])?,
        })
    }

    /// Lemma 1: `Σ_{k=1}^{n−1} (k/n)^{−u}(1−k/n)^{−v} p_{n,k}(x) / (x^{−u}(1−x)^{−v})`.
    pub fn lemma1(&self, u: f64, v: f64) -> Result<Section> {
        let ns = &self.cfg.lemma_n_list;
        let mut ratios = Vec::with_capacity(ns.len());
        for &n in ns {
            let nf = n as f64;
            let weights: Vec<f64> = (0..=n)
                .map(|k| (k as f64 / nf).powf(-u) * (1.0 - k as f64 / nf).powf(-v))
                .collect();
            let mut best = 0.0f64;
            for x in self.interior() {
                let row = basis_row(n, x)?;
                let s = compensated_sum((1..n as usize).map(|k| weights[k] * row[k]));
                best = best.max(s * x.powf(u) * (1.0 - x).powf(v));
            }
            ratios.push(best);
        }
        let label = format!("u={u},v={v}");
        Ok(ratio_section(
            "lemma1",
            &label,
            "-",
            "n",
            ns.iter().map(|&n| n as f64).collect(),
            ratios,
        ))
    }

    /// Lemma 2: `Σ |k − nx|^γ p_{n,k}(x) / (n^{γ/2} varphi^γ(x))`.
    pub fn lemma2(&self, gamma: f64) -> Result<Section> {
        let ns = &self.cfg.lemma_n_list;
        let varphi = StepWeight::varphi();
        let mut ratios = Vec::with_capacity(ns.len());
        for &n in ns {
            let mut best = 0.0f64;
            for x in self.interior() {
                let m = absolute_index_moment(n, gamma, x)?;
                best = best.max(m / ((n as f64).powf(gamma / 2.0) * varphi.eval(x).powf(gamma)));
            }
            ratios.push(best);
        }
        let label = format!("gamma={gamma}");
        Ok(ratio_section(
            "lemma2",
            &label,
            "-",
            "n",
            ns.iter().map(|&n| n as f64).collect(),
            ratios,
        ))
    }

    /// Lemma 6: `∫_{[−t/2, t/2]^r} φ^{−r}(x + Σu) du / (t^r φ^{−r}(x))` over
    /// `rt/2 < x < 1 − rt/2`, for decreasing `t < 1/(8r)`.
    pub fn lemma6(&self, r: u32) -> Section {
        let phi = &self.phi;
        let gl = GaussLegendre::new(32);
        let rf = r as f64;
        let ts: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k) / (8.0 * rf)).collect();
        let mut ratios = Vec::with_capacity(ts.len());
        for &t in &ts {
            let lo = rf * t / 2.0;
            let mut xs: Vec<f64> = (1..=200)
                .map(|i| lo + (1.0 - 2.0 * lo) * i as f64 / 201.0)
                .collect();
            for j in 0..40 {
                let d = lo * 2f64.powi(-j) * 0.999;
                xs.push(lo + d);
                xs.push(1.0 - lo - d);
            }
            let mut best = 0.0f64;
            for &x in &xs {
                let integrand = |s: f64| powi(phi.eval(x + s), r).recip();
                let integral = match r {
                    1 => gl.integrate(-t / 2.0, t / 2.0, integrand),
                    _ => nested(&gl, r, t, 0.0, &integrand),
                };
                best = best.max(integral * powi(phi.eval(x), r) / powi(t, r));
            }
            ratios.push(best);
        }
        ratio_section("lemma6", &format!("r={r}"), "-", "t", ts, ratios)
    }

    /// `m = 1` errors dominate `m = 2` errors for `t³` at `n ≥ 256`.
    pub fn cross_check(&self) -> Result<Section> {
        let f = TestFunction::from_expr("t^3", "t^3").expect("parses");
        let mut ns: Vec<u64> = self
            .cfg
            .n_list
            .iter()
            .copied()
            .filter(|&n| n >= 256)
            .collect();
        if ns.is_empty() {
            ns = vec![256, 512];
        }
        let r = 2;
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for &n in &ns {
            for (m, out) in [(1, &mut e1), (2, &mut e2)] {
                let scheme = CombinationScheme::geometric(n, m)?;
                let op = ModifiedCombination::new(&scheme, &f, r)?;
                let mut best = 0.0f64;
                for &x in &self.grid {
                    best = best.max(self.w.weighted(x, (f.eval(x) - op.apply(x)?).abs()));
                }
                out.push(best);
            }
        }
        let ok = e1.iter().zip(&e2).all(|(a, b)| a >= b);
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let mut s = Section::new("cross_check", "t^3", "m=1 vs m=2");
        s.status = if ok { Status::Pass } else { Status::Fail };
        s.empirical_constant = Some(sup(e2.iter().zip(&e1).map(|(b, a)| quotient(*b, *a))));
        s.note = "grid-max weighted error, single operator vs two-term combination, r = 2".into();
        s.series = vec![
            Series::new("m=1", "n", xs.clone(), e1),
            Series::new("m=2", "n", xs, e2),
        ];
        Ok(s)
    }

    /// Fit of `t^{0.75}` under 1% seeded multiplicative noise.
    pub fn fit_calibration(&self) -> Section {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let ts: Vec<f64> = (0..24).map(|i| 1e-4 * 10f64.powf(i as f64 / 6.0)).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| t.powf(0.75) * (1.0 + 0.01 * rng.gen_range(-1.0..=1.0)))
            .collect();
        let series = Series::new("noisy t^0.75", "t", ts, ys);
        let exponent = series.fit.map(|f| f.exponent).unwrap_or(f64::NAN);
        let mut s = Section::new("fit_calibration", "t^0.75", "-");
        s.status = if (exponent - 0.75).abs() <= 0.02 {
            Status::Pass
        } else {
            Status::Fail
        };
        s.empirical_constant = Some(exponent);
        s.note = format!("seed {}, fitted exponent {exponent:.6}", self.cfg.seed);
        s.series = vec![series];
        s
    }

    fn function_checks(&self, subject: &Subject) -> Result<TaskOutput> {
        let cfg = self.cfg;
        let f = &subject.function;
        let name = f.name();
        let r = cfg.r;
        let mut sections = Vec::new();
        let mut tables = Vec::new();
        let norm = self.weighted_sup(f);
        let wants_operator = [
            Check::Theorem1,
            Check::Lemma5,
            Check::Theorem2,
            Check::Corollary,
        ]
        .iter()
        .any(|&c| cfg.has(c));
        if wants_operator {
            for spec in &cfg.schemes {
                let sweep = self.operator_sweep(f, spec)?;
                let label = spec.label();
                let ns: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
                if cfg.has(Check::Theorem1) {
                    sections.push(ratio_section(
                        "theorem1",
                        name,
                        &label,
                        "n",
                        ns.clone(),
                        sweep
                            .iter()
                            .map(|d| {
                                quotient(
                                    d.smooth_deriv_sup,
                                    (d.n as f64).powf(r as f64 / 2.0) * norm,
                                )
                            })
                            .collect(),
                    ));
                    sections.push(ratio_section(
                        "lemma7",
                        name,
                        &label,
                        "n",
                        ns.clone(),
                        sweep
                            .iter()
                            .map(|d| quotient(d.deriv_sup, powi(d.n as f64, r) * norm))
                            .collect(),
                    ));
                }
                if cfg.has(Check::Lemma5) {
                    let coarse_norm = sup(self.coarse.iter().map(|&x| f.weighted_abs(&self.w, x)));
                    let ratios: Vec<f64> = sweep
                        .iter()
                        .map(|d| quotient(d.coarse_sup, coarse_norm))
                        .collect();
                    let proxy = bounded_by_first(&ratios);
                    let mut s = proxy_section(
                        Section::new("lemma5", name, &label),
                        proxy,
                        vec![Series::new("lemma5", "n", ns.clone(), ratios.clone())],
                    );
                    s.note = format!(
                        "every ratio ≤ {PROXY_FACTOR} × ratio at n = {}",
                        cfg.n_list[0]
                    );
                    sections.push(s);
                }
                if cfg.has(Check::Theorem2) {
                    sections.extend(self.smooth_checks(f, spec, &sweep)?);
                }
                if cfg.has(Check::Corollary) {
                    sections.push(self.corollary(f, spec, &sweep, norm)?);
                }
                if cfg.error_tables {
                    for d in &sweep {
                        tables.push(ErrorTable {
                            function: name.to_string(),
                            scheme: label.clone(),
                            n: d.n,
                            x: self.grid.clone(),
                            error: d.error.clone(),
                        });
                    }
                }
            }
        }
        let wants_curve = [Check::Direct, Check::Inverse, Check::Modulus]
            .iter()
            .any(|&c| cfg.has(c));
        if wants_curve {
            let res = Resolution {
                kinks: f.kink_points(),
                ..cfg.resolution.clone()
            };
            let t_lo = self.direct_t_lo().min(cfg.t_list[0]);
            let curve =
                ModulusCurve::omega(f, &self.w, &self.phi, r, t_lo, T_MAX, &cfg.t_list, &res)?;
            if cfg.has(Check::Direct) {
                sections.push(self.direct(f, &curve, norm)?);
            }
            if cfg.has(Check::Inverse) {
                sections.push(self.inverse(subject, &curve, norm, &res)?);
            }
            if cfg.has(Check::Modulus) {
                sections.push(self.modulus_check(f, &curve, norm, &res)?);
            }
        }
        if cfg.has(Check::KFunctional) {
            sections.push(self.k_functional(f, norm)?);
        }
        Ok((sections, tables))
    }

    /// Per-`n` sups of `B*_{n,m} f` and its `r`-th derivative.
    fn operator_sweep(&self, f: &TestFunction, spec: &SchemeSpec) -> Result<Vec<DegreeData>> {
        let r = self.cfg.r;
        let mut out = Vec::with_capacity(self.cfg.n_list.len());
        for &n in &self.cfg.n_list {
            let scheme = CombinationScheme::new(n, spec.m, spec.ladder.clone())?;
            let op = ModifiedCombination::new(&scheme, f, r)?;
            let mut d = DegreeData {
                n,
                error: Vec::with_capacity(self.grid.len()),
                ..Default::default()
            };
            for &x in &self.grid {
                let value = op.apply(x)?;
                let deriv = op.derivative(r, x)?;
                let fx = f.eval(x);
                d.error.push(self.w.weighted(x, (fx - value).abs()));
                let wd = self.w.weighted(x, deriv.abs());
                d.deriv_sup = d.deriv_sup.max(wd);
                d.smooth_deriv_sup = d.smooth_deriv_sup.max(wd * powi(self.phi.eval(x), r));
                d.derivs.push(deriv);
            }
            for &x in &self.coarse {
                d.coarse_sup = d.coarse_sup.max(self.w.weighted(x, op.apply(x)?.abs()));
            }
            d.fn_deriv_sup = self.modified_deriv_sup(&op, &self.phi);
            d.endpoint_sup = self.extrapolant_error(f, &op, n);
            out.push(d);
        }
        Ok(out)
    }

    /// `sup wφ^r |F_n^{(r)}|`, finite-differenced in the blend zones.
    fn modified_deriv_sup(&self, op: &ModifiedCombination<&TestFunction>, phi: &StepWeight) -> f64 {
        let r = self.cfg.r;
        let fm = op.modified();
        let n = fm.degree() as f64;
        let mut xs: Vec<f64> = self.interior().collect();
        for j in 1..16 {
            let x = (1.0 + j as f64 / 16.0) / n;
            xs.push(x);
            xs.push(1.0 - x);
        }
        let s = 1e-2 / n;
        sup(xs.into_iter().map(|x| {
            let d = match fm.zone(x) {
                Zone::LeftBlend | Zone::RightBlend => central_with_step(fm, s, r, x)
                    .map(|v| v / powi(s, r))
                    .unwrap_or(f64::NAN),
                _ => fm.derivative(r, x).unwrap_or(f64::NAN),
            };
            self.w.weighted(x, powi(phi.eval(x), r) * d.abs())
        }))
    }

    /// Lemma 4 numerator over bound, on `(0, 2/n]` and `[1 − 2/n, 1)`,
    /// without the `‖wφ^r f^{(r)}‖` factor.
    fn extrapolant_error(
        &self,
        f: &TestFunction,
        op: &ModifiedCombination<&TestFunction>,
        n: u64,
    ) -> f64 {
        let r = self.cfg.r;
        let fm = op.modified();
        let nf = n as f64;
        let mut best = 0.0f64;
        for j in 1..=64 {
            let x = 2.0 * j as f64 / (64.0 * nf);
            for (x, l) in [
                (x, fm.left_extrapolant()),
                (1.0 - x, fm.right_extrapolant()),
            ] {
                let err = self.w.weighted(x, (f.eval(x) - l.eval(x)).abs());
                let bound = powi(delta_n(n, x) / (nf.sqrt() * self.phi.eval(x)), r);
                best = best.max(quotient(err, bound));
            }
        }
        best
    }

    /// Theorem 2, Lemma 3 and Lemma 4 for `f ∈ W_φ^r`.
    fn smooth_checks(
        &self,
        f: &TestFunction,
        spec: &SchemeSpec,
        sweep: &[DegreeData],
    ) -> Result<Vec<Section>> {
        let name = f.name();
        let label = spec.label();
        let r = self.cfg.r;
        let criteria = ["theorem2", "lemma3", "lemma4"];
        if f.is_polynomial_below(r) {
            return Ok(criteria
                .iter()
                .map(|c| {
                    Section::new(c, name, &label)
                        .with_status(Status::Saturated, "f^(r) vanishes; both sides are zero")
                })
                .collect());
        }
        if !f.in_sobolev(&self.w, &self.phi, r) {
            return Ok(criteria
                .iter()
                .map(|c| {
                    Section::new(c, name, &label).with_status(Status::Skipped, "f is not in W_φ^r")
                })
                .collect());
        }
        let denom = self.smooth_sup(f, &self.phi);
        let ns: Vec<f64> = sweep.iter().map(|d| d.n as f64).collect();
        Ok(vec![
            ratio_section(
                "theorem2",
                name,
                &label,
                "n",
                ns.clone(),
                sweep.iter().map(|d| d.smooth_deriv_sup / denom).collect(),
            ),
            ratio_section(
                "lemma3",
                name,
                &label,
                "n",
                ns.clone(),
                sweep.iter().map(|d| d.fn_deriv_sup / denom).collect(),
            ),
            ratio_section(
                "lemma4",
                name,
                &label,
                "n",
                ns,
                sweep.iter().map(|d| d.endpoint_sup / denom).collect(),
            ),
        ])
    }

    /// Both branches of the corollary with `φ = varphi^λ`.
    fn corollary(
        &self,
        f: &TestFunction,
        spec: &SchemeSpec,
        sweep: &[DegreeData],
        norm: f64,
    ) -> Result<Section> {
        let r = self.cfg.r;
        let lambda = self.cfg.lambda;
        let phi = StepWeight::varphi_power(lambda)?;
        let varphi = StepWeight::varphi();
        let label = spec.label();
        let ns: Vec<f64> = sweep.iter().map(|d| d.n as f64).collect();
        let interior: Vec<(usize, f64)> = self
            .grid
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, x)| x > 0.0 && x < 1.0)
            .collect();
        let first: Vec<f64> = sweep
            .iter()
            .map(|d| {
                let nf = d.n as f64;
                sup(interior.iter().map(|&(i, x)| {
                    let lhs = self.w.weighted(x, powi(phi.eval(x), r) * d.derivs[i].abs());
                    let growth = nf
                        .powf(r as f64 * (1.0 - lambda) / 2.0)
                        .max(varphi.eval(x).powf(r as f64 * (lambda - 1.0)));
                    quotient(lhs, nf.powf(r as f64 / 2.0) * growth * norm)
                }))
            })
            .collect();
        let p1 = boundedness(&first);
        let mut series = vec![Series::new("C_w branch", "n", ns.clone(), first)];
        let mut status = p1.status;
        let mut constant = p1.constant;
        let mut note = format!("λ = {lambda}; C_w branch {}", p1.status.as_str());
        let smooth = f.in_sobolev(&self.w, &phi, r) && !f.is_polynomial_below(r);
        if smooth {
            let denom = self.smooth_sup(f, &phi);
            let second: Vec<f64> = sweep
                .iter()
                .map(|d| {
                    sup(interior.iter().map(|&(i, x)| {
                        self.w.weighted(x, powi(phi.eval(x), r) * d.derivs[i].abs()) / denom
                    }))
                })
                .collect();
            let p2 = boundedness(&second);
            series.push(Series::new("W branch", "n", ns, second));
            status = status.max_with(p2.status);
            constant = constant.max(p2.constant);
            note.push_str(&format!(", W branch {}", p2.status.as_str()));
        } else {
            note.push_str(", W branch skipped");
        }
        let mut s = Section::new("corollary", f.name(), &label);
        s.status = status;
        s.empirical_constant = Some(constant);
        s.note = note;
        s.series = series;
        Ok(s)
    }

    fn direct_scheme(&self, n: u64) -> Result<CombinationScheme> {
        Ok(CombinationScheme::new(
            n,
            self.cfg.r.saturating_sub(1).max(1) as usize,
            Ladder::Geometric,
        )?)
    }

    fn direct_label(&self) -> String {
        SchemeSpec {
            m: self.cfg.r.saturating_sub(1).max(1) as usize,
            ladder: Ladder::Geometric,
        }
        .label()
    }

    /// `n^{−1/2} δ_n(x) / φ(x)`.
    fn direct_arg(&self, n: u64, x: f64) -> f64 {
        delta_n(n, x) / ((n as f64).sqrt() * self.phi.eval(x))
    }

    fn direct_t_lo(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for &n in &self.cfg.n_list {
            for x in self.interior() {
                lo = lo.min(self.direct_arg(n, x));
            }
        }
        lo.min(T_MAX)
    }

    /// Pointwise direct estimate `e(n, x) / ω(n^{−1/2}δ_n(x)/φ(x))`.
    fn direct(&self, f: &TestFunction, curve: &ModulusCurve, norm: f64) -> Result<Section> {
        let r = self.cfg.r;
        let mut ratios = Vec::new();
        let mut max_err = 0.0f64;
        let floor = NOISE_FLOOR * norm;
        for &n in &self.cfg.n_list {
            let op = ModifiedCombination::new(&self.direct_scheme(n)?, f, r)?;
            let mut best = 0.0f64;
            for x in self.interior() {
                let e = self.w.weighted(x, (f.eval(x) - op.apply(x)?).abs());
                max_err = max_err.max(e);
                let m = curve.eval(self.direct_arg(n, x))?;
                if e <= floor {
                    continue;
                }
                best = best.max(if m > floor { e / m } else { f64::INFINITY });
            }
            ratios.push(best);
        }
        let ns: Vec<f64> = self.cfg.n_list.iter().map(|&n| n as f64).collect();
        let section = Section::new("direct", f.name(), &self.direct_label());
        if max_err <= floor {
            let mut s = section.with_status(Status::Saturated, "errors at rounding level");
            s.series = vec![Series::new("direct", "n", ns, ratios)];
            return Ok(s);
        }
        let proxy = boundedness(&ratios);
        Ok(proxy_section(
            section,
            proxy,
            vec![Series::new("direct", "n", ns, ratios)],
        ))
    }

    /// Slope match between pointwise errors and the modulus.
    fn inverse(
        &self,
        subject: &Subject,
        curve: &ModulusCurve,
        norm: f64,
        res: &Resolution,
    ) -> Result<Section> {
        let f = &subject.function;
        let r = self.cfg.r;
        let rf = r as f64;
        let section = Section::new("inverse", f.name(), &self.direct_label());
        if let Some(a0) = subject.alpha0 {
            if !(a0 > 0.0 && a0 < rf) {
                return Ok(section.with_status(
                    Status::Saturated,
                    format!("declared α₀ = {a0} is not inside (0, r)"),
                ));
            }
        }
        let estimate = curve.estimate(&self.cfg.t_list, res)?;
        let modulus_series = Series::new(
            "modulus",
            "t",
            estimate.t_grid.clone(),
            estimate.values.clone(),
        );
        let floor = NOISE_FLOOR * norm;
        let pool: [(&str, fn(f64) -> f64); 8] = [
            ("x=0.5", |_| 0.5),
            ("x=0.25", |_| 0.25),
            ("x=0.1", |_| 0.1),
            ("x=1/64", |_| 1.0 / 64.0),
            ("x=1/n", |n| 1.0 / n),
            ("x=4/n", |n| 4.0 / n),
            ("x=1-1/n", |n| 1.0 - 1.0 / n),
            ("x=1-4/n", |n| 1.0 - 4.0 / n),
        ];
        let ns = &self.cfg.inverse_n_list;
        let ops = ns
            .iter()
            .map(|&n| Ok(ModifiedCombination::new(&self.direct_scheme(n)?, f, r)?))
            .collect::<Result<Vec<_>>>()?;
        let mut series = Vec::new();
        let mut slopes = Vec::new();
        for (label, at) in pool {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (op, &n) in ops.iter().zip(ns) {
                let x = at(n as f64);
                let e = self.w.weighted(x, (f.eval(x) - op.apply(x)?).abs());
                if e > floor {
                    xs.push(self.direct_arg(n, x));
                    ys.push(e);
                }
            }
            let s = Series::new(label, "arg", xs, ys);
            if let Some(fit) = s.fit {
                slopes.push((label, fit.exponent));
            }
            series.push(s);
        }
        series.push(modulus_series.clone());
        let mut s = section;
        s.series = series;
        if slopes.is_empty() {
            let all_small = ops.is_empty() || estimate.values.iter().all(|&v| v <= floor);
            s.status = if all_small {
                Status::Saturated
            } else {
                Status::Fail
            };
            s.note = if all_small {
                "errors and modulus at rounding level; fit skipped".into()
            } else {
                "insufficient sweep: no error series with 4 usable points".into()
            };
            return Ok(s);
        }
        let Some(mod_fit) = modulus_series.fit else {
            s.status = Status::Fail;
            s.note = "insufficient sweep: modulus fit is degenerate".into();
            return Ok(s);
        };
        let (worst, a_err) =
            slopes
                .iter()
                .copied()
                .fold(("", f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let a_mod = mod_fit.exponent;
        let mut ok = (a_err - a_mod).abs() <= SLOPE_TOLERANCE;
        let mut note = format!("a_err = {a_err:.4} ({worst}), a_mod = {a_mod:.4}");
        if let Some(a0) = subject.alpha0 {
            ok &= (a_mod - a0).abs() <= SLOPE_TOLERANCE;
            note.push_str(&format!(", α₀ = {a0}"));
        }
        note.push_str(&format!(", tolerance {SLOPE_TOLERANCE}"));
        s.status = if ok { Status::Pass } else { Status::Fail };
        s.empirical_constant = Some(a_mod);
        s.note = note;
        Ok(s)
    }

    /// Refinement stability, monotonicity and homogeneity of `ω`.
    fn modulus_check(
        &self,
        f: &TestFunction,
        curve: &ModulusCurve,
        norm: f64,
        res: &Resolution,
    ) -> Result<Section> {
        let cfg = self.cfg;
        let r = cfg.r;
        let ts = &cfg.t_list;
        let (t_lo, t_hi) = (ts[0], ts[ts.len() - 1]);
        let base = curve.estimate(ts, res)?.values;
        let refined_res = res.refined();
        let refined = ModulusCurve::omega(f, &self.w, &self.phi, r, t_lo, t_hi, ts, &refined_res)?;
        let fine = refined.estimate(ts, &refined_res)?.values;
        let floor = NOISE_FLOOR * norm;
        let drift: Vec<f64> = base
            .iter()
            .zip(&fine)
            .map(|(&a, &b)| {
                if a.max(b) <= floor {
                    0.0
                } else {
                    (a - b).abs() / a.max(b)
                }
            })
            .collect();
        let stable = drift.iter().all(|&d| d <= STABILITY_TOLERANCE);
        let monotone =
            base.windows(2).all(|p| p[0] <= p[1]) && fine.windows(2).all(|p| p[0] <= p[1]);
        let scaled = from_fn(|x| -4.0 * f.eval(x));
        let scaled_curve =
            ModulusCurve::omega(&scaled, &self.w, &self.phi, r, t_lo, t_hi, ts, res)?;
        let scaled_values = scaled_curve.estimate(ts, res)?.values;
        let restricted = ModulusCurve::omega(f, &self.w, &self.phi, r, t_lo, t_hi, ts, res)?
            .estimate(ts, res)?
            .values;
        let homogeneous = scaled_values
            .iter()
            .zip(&restricted)
            .all(|(&a, &b)| a == 4.0 * b);
        let mut s = Section::new("modulus", f.name(), "-");
        let max_drift = sup(drift.iter().copied());
        s.status = if !(stable && monotone && homogeneous) {
            Status::Fail
        } else if base.iter().all(|&v| v <= floor) {
            Status::Saturated
        } else {
            Status::Pass
        };
        s.empirical_constant = Some(max_drift);
        s.note = format!(
            "max relative change under 2x refinement {max_drift:.3e} (tolerance {STABILITY_TOLERANCE}); monotone {monotone}; homogeneous {homogeneous}"
        );
        s.series = vec![
            Series::new("omega", "t", ts.clone(), base),
            Series::new("omega refined", "t", ts.clone(), fine),
        ];
        Ok(s)
    }

    /// Steklov K-functional over the main-part modulus across coarse and
    /// refined `t`-sweeps.
    fn k_functional(&self, f: &TestFunction, norm: f64) -> Result<Section> {
        let r = self.cfg.r;
        let res = Resolution {
            kinks: f.kink_points(),
            ..self.cfg.resolution.clone()
        };
        let floor = NOISE_FLOOR * norm;
        let sweep = |ts: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut ratios = Vec::new();
            let mut omegas = Vec::new();
            for &t in ts {
                let k = steklov_k_functional(f, &self.w, &self.phi, r, t, &res)?.total();
                let o = main_part_modulus(f, &self.w, &self.phi, r, t, 1.0, &res)?;
                omegas.push(o);
                ratios.push(if k.max(o) <= floor { f64::NAN } else { k / o });
            }
            Ok((ratios, omegas))
        };
        let coarse_t: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
        let fine_t: Vec<f64> = (6..=20).map(|k| 2f64.powf(-(k as f64) / 2.0)).collect();
        let (coarse, co) = sweep(&coarse_t)?;
        let (fine, fo) = sweep(&fine_t)?;
        let mut s = Section::new("k_functional", f.name(), "-");
        if co.iter().chain(&fo).all(|&o| o <= floor)
            && coarse.iter().chain(&fine).all(|v| v.is_nan())
        {
            return Ok(s.with_status(Status::Saturated, "K and Ω at rounding level"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x > 0.0);
        let (clo, chi) = min_max(&coarse);
        let (flo, fhi) = min_max(&fine);
        let ok = finite(&coarse)
            && finite(&fine)
            && fhi <= PROXY_FACTOR * chi
            && flo >= clo / PROXY_FACTOR
            && clo.min(flo) >= K_WINDOW.0
            && chi.max(fhi) <= K_WINDOW.1;
        s.status = if ok { Status::Pass } else { Status::Fail };
        s.empirical_constant = Some(chi.max(fhi));
        s.note = format!(
            "K/Ω window coarse [{clo:.4}, {chi:.4}], refined [{flo:.4}, {fhi:.4}], fixed window [{}, {}]",
            K_WINDOW.0, K_WINDOW.1
        );
        s.series = vec![
            Series::new("K/Omega coarse", "t", coarse_t, coarse),
            Series::new("K/Omega refined", "t", fine_t, fine),
        ];
        Ok(s)
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// `∫_{[−t/2, t/2]^depth} g(acc + Σu) du` by tensor Gauss–Legendre.
fn nested(gl: &GaussLegendre, depth: u32, t: f64, acc: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    if depth == 1 {
        return gl.integrate(-t / 2.0, t / 2.0, |u| g(acc + u));
    }
    gl.integrate(-t / 2.0, t / 2.0, |u| nested(gl, depth - 1, t, acc + u, g))
}

trait Worse {
    fn max_with(self, other: Status) -> Status;
}

impl Worse for Status {
    /// The less favourable of two outcomes for a combined check.
    fn max_with(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Fail => 3,
            Status::Pass => 2,
            Status::Saturated => 1,
            Status::Skipped => 0,
        };
        if rank(self) >= rank(other) {
            self
        } else {
            other
        }
    }
}

#[derive(Debug, Clone, Default)]
struct DegreeData {
    n: u64,
    /// `w|f − B*f|` on the harness grid.
    error: Vec<f64>,
    /// `B*^{(r)} f` on the harness grid.
    derivs: Vec<f64>,
    /// `sup w|B*^{(r)} f|`.
    deriv_sup: f64,
    /// `sup wφ^r|B*^{(r)} f|`.
    smooth_deriv_sup: f64,
    /// `sup w|B* f|` on `{i/500}`.
    coarse_sup: f64,
    /// `sup wφ^r|F_n^{(r)}|`.
    fn_deriv_sup: f64,
    /// Lemma 4 ratio without the smoothness norm.
    endpoint_sup: f64,
}

/// Runs every selected check and assembles the report in canonical order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let subjects = cfg.validate()?;
    let harness = Harness::new(cfg)?;
    let tasks = harness.tasks(&subjects);
    let threads = cfg.threads.unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    let outputs: Vec<Result<TaskOutput>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&t| harness.run_task(t, &subjects))
            .collect()
    });
    let mut sections = Vec::new();
    let mut tables = Vec::new();
    for out in outputs {
        let (s, t) = out.map_err(|e| anyhow!("sweep task failed: {e:#}"))?;
        sections.extend(s);
        tables.extend(t);
    }
    Ok(SweepReport::new(cfg.echo(), sections, tables))
}

/// Refits a series from its stored pairs (what the plot files carry).
pub fn refit(series: &Series) -> Option<f64> {
    fit_rate(&crate::report::positive_pairs(&series.x, &series.y))
        .ok()
        .map(|f| f.exponent)
}
