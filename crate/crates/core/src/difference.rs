//! Central and one-sided finite differences of order `r`.

use crate::bernstein::binomial;
use crate::error::{Error, Result};
use crate::function::SampledFunction;
use crate::sum::CompensatedSum;
use crate::weight::StepWeight;

fn alternating_sum<F, P>(
    f: &F,
    r: u32,
    point: P,
    interval: &'static str,
    closed: bool,
) -> Result<f64>
where
    F: SampledFunction + ?Sized,
    P: Fn(u32) -> f64,
{
    let mut acc = CompensatedSum::new();
    for k in 0..=r {
        let y = point(k);
        let inside = if closed {
            (0.0..=1.0).contains(&y)
        } else {
            y > 0.0 && y < 1.0
        };
        if !inside {
            return Err(Error::Range { point: y, interval });
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binomial(r, k) * f.eval(y));
    }
    Ok(acc.total())
}

/// `Δ^r_{hφ} f(x) = Σ_k (−1)^k C(r,k) f(x + (r/2 − k) h φ(x))`.
///
/// Every sample point has to lie in `(0, 1)`.
pub fn diff_central<F: SampledFunction + ?Sized>(
    f: &F,
    h: f64,
    phi: &StepWeight,
    r: u32,
    x: f64,
) -> Result<f64> {
    central_with_step(f, h * phi.eval(x), r, x)
}

/// Central difference with an explicit step `s`.
pub fn central_with_step<F: SampledFunction + ?Sized>(
    f: &F,
    s: f64,
    r: u32,
    x: f64,
) -> Result<f64> {
    let half = r as f64 / 2.0;
    alternating_sum(f, r, |k| x + (half - k as f64) * s, "(0, 1)", false)
}

/// `Δ→^r_h f(x) = Σ_k (−1)^k C(r,k) f(x + (r − k) h)`, sample points in `[0, 1]`.
pub fn diff_forward<F: SampledFunction + ?Sized>(f: &F, h: f64, r: u32, x: f64) -> Result<f64> {
    alternating_sum(f, r, |k| x + (r - k) as f64 * h, "[0, 1]", true)
}

/// `Δ←^r_h f(x) = Σ_k (−1)^k C(r,k) f(x − k h)`, sample points in `[0, 1]`.
pub fn diff_backward<F: SampledFunction + ?Sized>(f: &F, h: f64, r: u32, x: f64) -> Result<f64> {
    alternating_sum(f, r, |k| x - k as f64 * h, "[0, 1]", true)
}
