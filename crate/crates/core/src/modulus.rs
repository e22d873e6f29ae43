//! Weighted Ditzian–Totik moduli, the main-part modulus and a Steklov
//! K-functional estimate.
//!
//! For a step `h` the modulus combines three windowed sup-norms:
//!
//! ```text
//! ‖w Δ^r_{hφ} f‖_{[16h², 1−16h²]} + ‖w Δ→^r_{h*} f‖_{[0, 16h²]} + ‖w Δ←^r_{h*} f‖_{[1−16h², 1]}
//! ```
//!
//! The one-sided step `h*` is `h²` by default (the boundary layer has width
//! `O(h²)`, and with step `h` the one-sided terms reach far outside it); the
//! literal step `h` is available through [`OneSidedStep::Literal`].
//!
//! All sups are taken over finite grids, so every value here is a lower
//! estimate of the true quantity. Steps are capped at [`T_MAX`], beyond which
//! the two endpoint windows would overlap.

use alloc::vec::Vec;

use crate::bernstein::binomial;
use crate::difference::{central_with_step, diff_backward, diff_forward};
use crate::error::{domain, Error, Result};
use crate::fit::{fit_rate, RateFit};
use crate::function::SampledFunction;
use crate::quadrature::GaussLegendre;
use crate::weight::{JacobiWeight, StepWeight};

/// Largest step with `16h² ≤ 1/2`.
pub const T_MAX: f64 = 0.176_776_695_296_636_9;

/// Step used by the one-sided differences in the endpoint windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OneSidedStep {
    #[default]
    Squared,
    Literal,
}

impl OneSidedStep {
    fn step(self, h: f64) -> f64 {
        match self {
            OneSidedStep::Squared => h * h,
            OneSidedStep::Literal => h,
        }
    }
}

/// Grid densities for the sup-norm and sup-over-`h` estimates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Resolution {
    /// Geometric `h` samples per factor `h_span`.
    pub h_samples: usize,
    pub h_span: f64,
    /// Uniform points across the central window.
    pub uniform: usize,
    /// Geometric points clustered at each edge of the central window.
    pub geometric: usize,
    /// Geometric points inside each endpoint window.
    pub window_geometric: usize,
    /// Uniform points inside each endpoint window.
    pub window_uniform: usize,
    /// The endpoint-window geometric grid reaches `16h²·e^{−window_depth}`.
    pub window_depth: f64,
    pub one_sided_step: OneSidedStep,
    /// Interior points always included (kinks of `f`).
    pub kinks: Vec<f64>,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            h_samples: 64,
            h_span: 64.0,
            uniform: 2000,
            geometric: 200,
            window_geometric: 300,
            window_uniform: 100,
            window_depth: 30.0,
            one_sided_step: OneSidedStep::Squared,
            kinks: Vec::new(),
        }
    }
}

impl Resolution {
    pub fn with_kinks(mut self, kinks: &[f64]) -> Self {
        self.kinks = kinks.to_vec();
        self
    }

    /// Doubles every density.
    pub fn refined(&self) -> Self {
        Self {
            h_samples: 2 * self.h_samples,
            uniform: 2 * self.uniform,
            geometric: 2 * self.geometric,
            window_geometric: 2 * self.window_geometric,
            window_uniform: 2 * self.window_uniform,
            ..self.clone()
        }
    }

    /// Scales every density by `factor`.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            h_samples: factor * self.h_samples,
            uniform: factor * self.uniform,
            geometric: factor * self.geometric,
            window_geometric: factor * self.window_geometric,
            window_uniform: factor * self.window_uniform,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h_samples == 0 || self.uniform < 2 || !(self.h_span > 1.0) {
            return Err(domain(
                "resolution needs h_samples ≥ 1, uniform ≥ 2 and h_span > 1",
            ));
        }
        Ok(())
    }

    /// `h_samples` geometric steps in `(t/h_span, t]`.
    pub fn h_grid(&self, t: f64) -> Vec<f64> {
        let t = t.min(T_MAX);
        let n = self.h_samples;
        (0..n)
            .map(|j| t * libm::pow(self.h_span, -(j as f64) / n as f64))
            .collect()
    }

    /// Points of `[lo, hi]`: uniform, geometric toward both edges, and kinks.
    pub fn central_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut xs = Vec::with_capacity(self.uniform + 2 * self.geometric + self.kinks.len() + 1);
        if !(lo <= hi) {
            return xs;
        }
        let n = self.uniform;
        for i in 0..=n {
            xs.push(lo + (hi - lo) * i as f64 / n as f64);
        }
        let mid = 0.5 * (lo + hi);
        if lo > 0.0 && self.geometric > 1 && mid > lo {
            let ratio = libm::log(mid / lo);
            let g = self.geometric;
            for i in 0..g {
                let d = lo * libm::exp(ratio * i as f64 / (g - 1) as f64);
                xs.push(d);
                xs.push(1.0 - d);
            }
        }
        xs.extend(self.kinks.iter().copied());
        finish(xs, lo, hi)
    }

    /// Points of `(0, width]`: geometric toward `0` and uniform.
    pub fn window_grid(&self, width: f64) -> Vec<f64> {
        let mut xs =
            Vec::with_capacity(self.window_geometric + self.window_uniform + self.kinks.len());
        let g = self.window_geometric;
        for i in 0..g {
            let depth = if g > 1 {
                self.window_depth * i as f64 / (g - 1) as f64
            } else {
                0.0
            };
            xs.push(width * libm::exp(-depth));
        }
        let u = self.window_uniform;
        for i in 1..=u {
            xs.push(width * i as f64 / u as f64);
        }
        xs.extend(self.kinks.iter().copied());
        let mut xs = finish(xs, 0.0, width);
        xs.retain(|&x| x > 0.0);
        xs
    }
}

fn finish(mut xs: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    xs.retain(|&x| x >= lo && x <= hi && x > 0.0 && x < 1.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// The three windowed sup-norms for one step `h`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModulusTerms {
    pub central: f64,
    pub forward: f64,
    pub backward: f64,
    /// Grid points of the central window.
    pub central_points: usize,
    /// Central points dropped because a sample left `(0, 1)`.
    pub skipped: usize,
}

impl ModulusTerms {
    pub fn total(&self) -> f64 {
        self.central + self.forward + self.backward
    }
}

fn check_order(r: u32) -> Result<()> {
    if r == 0 {
        Err(domain("difference order r must be at least 1"))
    } else {
        Ok(())
    }
}

/// Weighted central sup over the points of `xs` in `[lo, hi]`.
fn central_sup<F: SampledFunction + ?Sized>(
    f: &F,
    w: &JacobiWeight,
    phi: &StepWeight,
    r: u32,
    h: f64,
    xs: &[f64],
    lo: f64,
    hi: f64,
) -> (f64, usize) {
    let mut best = 0.0f64;
    let mut skipped = 0;
    for &x in xs.iter().filter(|&&x| x >= lo && x <= hi) {
        match central_with_step(f, h * phi.eval(x), r, x) {
            Ok(d) => best = best.max(w.weighted(x, d.abs())),
            Err(_) => skipped += 1,
        }
    }
    (best, skipped)
}

/// The windowed terms of the modulus at step `h ≤ T_MAX`.
pub fn omega_terms<F: SampledFunction + ?Sized>(
    f: &F,
    w: &JacobiWeight,
    phi: &StepWeight,
    r: u32,
    h: f64,
    res: &Resolution,
) -> Result<ModulusTerms> {
    check_order(r)?;
    if !(h > 0.0 && h <= T_MAX) {
        return Err(Error::Range {
            point: h,
            interval: "(0, T_MAX]",
        });
    }
    let width = 16.0 * h * h;
    let xs = res.central_grid(width, 1.0 - width);
    let (central, skipped) = central_sup(f, w, phi, r, h, &xs, width, 1.0 - width);
    let step = res.one_sided_step.step(h);
    let mut forward = 0.0f64;
    let mut backward = 0.0f64;
    for x in res.window_grid(width) {
        // Samples reach x + r·step; with the literal step and large h this can
        // leave [0, 1], in which case the point does not count.
        if let Ok(d) = diff_forward(f, step, r, x) {
            forward = forward.max(w.weighted(x, d.abs()));
        }
        let y = 1.0 - x;
        if y < 1.0 {
            if let Ok(d) = diff_backward(f, step, r, y) {
                backward = backward.max(w.weighted(y, d.abs()));
            }
        }
    }
    Ok(ModulusTerms {
        central,
        forward,
        backward,
        central_points: xs.len(),
        skipped,
    })
}

/// `ω_φ^r(f, t)_w`: maximum of [`omega_terms`] over the `h`-grid in `(t/h_span, t]`.
pub fn omega_modulus<F: SampledFunction + ?Sized>(
    f: &F,
    w: &JacobiWeight,
    phi: &StepWeight,
    r: u32,
    t: f64,
    res: &Resolution,
) -> Result<f64> {
    res.validate()?;
    if !(t > 0.0) {
        return Err(domain("modulus argument t must be positive"));
    }
    let mut best = 0.0f64;
    for h in res.h_grid(t) {
        best = best.max(omega_terms(f, w, phi, r, h, res)?.total());
    }
    Ok(best)
}

/// Central-difference term restricted to `[C·16h², 1 − C·16h²]`, on the same
/// grid as the central window of [`omega_terms`].
pub fn main_part_terms<F: SampledFunction + ?Sized>(
    f: &F,
    w: &JacobiWeight,
    phi: &StepWeight,
    r: u32,
    h: f64,
    c: f64,
    res: &Resolution,
) -> Result<f64> {
    check_order(r)?;
    if !(c >= 1.0) {
        return Err(domain("main-part window constant C must be at least 1"));
    }
    if !(h > 0.0 && h <= T_MAX) {
        return Err(Error::Range {
            point: h,
            interval: "(0, T_MAX]",
        });
    }
    let width = 16.0 * h * h;
    let xs = res.central_grid(width, 1.0 - width);
    Ok(central_sup(f, w, phi, r, h, &xs, c * width, 1.0 - c * width).0)
}

/// `Ω_φ^r(C, f, t)_w`.
pub fn main_part_modulus<F: SampledFunction + ?Sized>(
    f: &F,
    w: &JacobiWeight,
    phi: &StepWeight,
    r: u32,
    t: f64,
    c: f64,
    res: &Resolution,
) -> Result<f64> {
    res.validate()?;
    if !(t > 0.0) {
        return Err(domain("modulus argument t must be positive"));
    }
    let mut best = 0.0f64;
    for h in res.h_grid(t) {
        best = best.max(main_part_terms(f, w, phi, r, h, c, res)?);
    }
    Ok(best)
}

/// The two parts of the Steklov estimate of `K_{r,φ}(f, t^r)_w`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KFunctionalParts {
    /// `‖w (f − G)‖`.
    pub distance: f64,
    /// `t^r ‖w φ^r G^{(r)}‖`.
    pub smoothness: f64,
}

impl KFunctionalParts {
    pub fn total(&self) -> f64 {
        self.distance + self.smoothness
    }
}

/// Density of the mean of `r` independent uniforms on `[−1/2, 1/2]`.
fn mean_uniform_density(r: u32, v: f64) -> f64 {
    let rf = r as f64;
    let y = rf * v + rf / 2.0;
    if !(0.0..=rf).contains(&y) {
        return 0.0;
    }
    let mut acc = 0.0;
    let fact: f64 = (1..r).map(|i| i as f64).product();
    for k in 0..=r {
        let d = y - k as f64;
        if d <= 0.0 {
            break;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(r, k) * libm::pow(d, (r - 1) as f64);
    }
    rf * acc / fact
}

/// Upper estimate of the K-functional using the `r`-fold Steklov mean
///
/// ```text
/// G(x) = s^{−r} ∫_{[−s/2, s/2]^r} Σ_{k=1}^{r} (−1)^{k+1} C(r,k) f(x + k(u₁+…+u_r)/r) du,   s = tφ(x)
/// ```
///
/// as the candidate `g`, with both norms over `[16t², 1 − 16t²]`.
/// `f − G` is the average of `(−1)^r Δ→^r_v f(x)` over the law of `v`, and
/// `G^{(r)} = s^{−r} Σ_k (−1)^{k+1} C(r,k) (r/k)^r δ^r_{ks/r} f(x)`.
pub fn steklov_k_functional<F: SampledFunction + ?Sized>(
    f: &F,
    w: &JacobiWeight,
    phi: &StepWeight,
    r: u32,
    t: f64,
    res: &Resolution,
) -> Result<KFunctionalParts> {
    check_order(r)?;
    res.validate()?;
    if !(t > 0.0 && t <= T_MAX) {
        return Err(Error::Range {
            point: t,
            interval: "(0, T_MAX]",
        });
    }
    let gl = GaussLegendre::new(32);
    let width = 16.0 * t * t;
    let xs = res.central_grid(width, 1.0 - width);
    // Breakpoints of the density of v, in units of s.
    let breaks: Vec<f64> = (1..r).map(|k| k as f64 / r as f64 - 0.5).collect();
    let mut parts = KFunctionalParts::default();
    for &x in &xs {
        let s = t * phi.eval(x);
        if s == 0.0 {
            continue;
        }
        // Integrate over v = s·u with u ∈ [−1/2, 1/2].
        let mut failed = false;
        let diff = gl.integrate_pieces(-0.5, 0.5, &breaks, |u| {
            let v = s * u;
            let mut acc = 0.0;
            for k in 0..=r {
                let y = x + k as f64 * v;
                if !(y > 0.0 && y < 1.0) {
                    failed = true;
                    return 0.0;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binomial(r, k) * f.eval(y);
            }
            mean_uniform_density(r, u) * acc
        });
        let mut deriv = 0.0;
        for k in 1..=r {
            let Ok(d) = central_with_step(f, k as f64 * s / r as f64, r, x) else {
                failed = true;
                break;
            };
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            deriv += sign * binomial(r, k) * libm::pow(r as f64 / k as f64, r as f64) * d;
        }
        if failed {
            continue;
        }
        parts.distance = parts.distance.max(w.weighted(x, diff.abs()));
        // t^r φ^r s^{−r} = 1.
        parts.smoothness = parts.smoothness.max(w.weighted(x, deriv.abs()));
    }
    Ok(parts)
}

/// A monotone modulus curve: running maxima of a step function over a dense
/// geometric `h`-grid, interpolated linearly in `log t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModulusCurve {
    h: Vec<f64>,
    values: Vec<f64>,
}

impl ModulusCurve {
    /// Samples `g` on a geometric grid covering `[t_lo / h_span, min(t_hi, T_MAX)]`
    /// (plus the given extra nodes) and takes running maxima.
    pub fn sample<G>(
        t_lo: f64,
        t_hi: f64,
        extra: &[f64],
        res: &Resolution,
        mut g: G,
    ) -> Result<Self>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        res.validate()?;
        if !(t_lo > 0.0 && t_lo <= t_hi) {
            return Err(domain("curve range needs 0 < t_lo ≤ t_hi"));
        }
        let hi = t_hi.min(T_MAX);
        let lo = (t_lo / res.h_span).min(hi);
        let ratio = libm::pow(res.h_span, 1.0 / res.h_samples as f64);
        let mut h = Vec::new();
        let mut cur = hi;
        while cur >= lo {
            h.push(cur);
            cur /= ratio;
        }
        h.push(lo);
        h.extend(extra.iter().copied().filter(|&e| e >= lo && e <= hi));
        h.sort_by(f64::total_cmp);
        h.dedup();
        let mut values = Vec::with_capacity(h.len());
        let mut best = 0.0f64;
        for &hj in &h {
            best = best.max(g(hj)?);
            values.push(best);
        }
        Ok(Self { h, values })
    }

    /// `ω_φ^r(f, ·)_w` on `[t_lo, t_hi]`; values beyond `T_MAX` clamp there.
    pub fn omega<F: SampledFunction + ?Sized>(
        f: &F,
        w: &JacobiWeight,
        phi: &StepWeight,
        r: u32,
        t_lo: f64,
        t_hi: f64,
        extra: &[f64],
        res: &Resolution,
    ) -> Result<Self> {
        Self::sample(t_lo, t_hi, extra, res, |h| {
            Ok(omega_terms(f, w, phi, r, h, res)?.total())
        })
    }

    /// `Ω_φ^r(C, f, ·)_w` on `[t_lo, t_hi]`.
    pub fn main_part<F: SampledFunction + ?Sized>(
        f: &F,
        w: &JacobiWeight,
        phi: &StepWeight,
        r: u32,
        c: f64,
        t_lo: f64,
        t_hi: f64,
        extra: &[f64],
        res: &Resolution,
    ) -> Result<Self> {
        Self::sample(t_lo, t_hi, extra, res, |h| {
            main_part_terms(f, w, phi, r, h, c, res)
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_min(&self) -> f64 {
        self.h[0]
    }

    pub fn t_max(&self) -> f64 {
        self.h[self.h.len() - 1]
    }

    /// Value at `t`, monotone in `t`; arguments above the sampled range clamp
    /// to the last value, arguments below it are a range error.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.t_min()) {
            return Err(Error::Range {
                point: t,
                interval: "modulus curve range",
            });
        }
        if t >= self.t_max() {
            return Ok(self.values[self.values.len() - 1]);
        }
        let j = self.h.partition_point(|&h| h <= t) - 1;
        let (h0, h1) = (self.h[j], self.h[j + 1]);
        let (v0, v1) = (self.values[j], self.values[j + 1]);
        let theta = libm::log(t / h0) / libm::log(h1 / h0);
        Ok(v0 + theta * (v1 - v0))
    }

    /// Samples the curve at `t_grid` and fits its log-log slope when possible.
    pub fn estimate(&self, t_grid: &[f64], res: &Resolution) -> Result<ModulusEstimate> {
        let values = t_grid
            .iter()
            .map(|&t| self.eval(t))
            .collect::<Result<Vec<f64>>>()?;
        let pairs: Vec<(f64, f64)> = t_grid.iter().copied().zip(values.iter().copied()).collect();
        let fit = fit_rate(&pairs).ok();
        let t0 = t_grid.first().copied().unwrap_or(T_MAX).min(T_MAX);
        let width = 16.0 * t0 * t0;
        Ok(ModulusEstimate {
            t_grid: t_grid.to_vec(),
            values,
            h_samples_per_t: res.h_samples,
            x_grid_size: res.central_grid(width, 1.0 - width).len(),
            fit,
        })
    }
}

/// Modulus values on a `t`-grid with their log-log fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModulusEstimate {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub h_samples_per_t: usize,
    pub x_grid_size: usize,
    pub fit: Option<RateFit>,
}
