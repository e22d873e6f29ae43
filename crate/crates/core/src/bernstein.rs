//! Bernstein basis, the operator `B_n`, its derivatives and central moments.
//!
//! Single basis values are evaluated in log space with Loader's saddle-point
//! decomposition of the binomial probability: the binomial coefficient comes
//! from the Stirling remainder of the log-gamma function and the powers from
//! the deviance term `bd0`, so no large logarithms cancel. Rows used inside
//! operator sums start from the mode in log space and walk outwards with the
//! exact term ratio, re-anchoring in log space every [`REANCHOR`] steps to keep
//! the relative error uniform in `k`. Degrees up to [`SMALL_DEGREE`] use the
//! product form with an exact binomial coefficient.

use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::function::SampledFunction;
use crate::sum::CompensatedSum;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const TWO_PI: f64 = core::f64::consts::TAU;

/// Steps of the ratio recurrence between two log-space anchors.
const REANCHOR: usize = 64;

/// Up to this degree `C(n, k) < 2^53`, so the product form is exact up to a
/// few roundings and is used directly.
const SMALL_DEGREE: u64 = 50;

fn exact_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c as f64
}

/// Stirling remainder `ln Γ(n+1) − (n + ½) ln n + n − ln √(2π)` for integer `n`.
fn stirling_remainder(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    if n <= 15 {
        // n! is exact in f64 up to 15!.
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        return libm::log(fact) - (nf + 0.5) * libm::log(nf) + nf - LN_SQRT_2PI;
    }
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x/np) + np − x`, accurate when `x ≈ np`.
fn deviance(x: f64, np: f64) -> f64 {
    if libm::fabs(x - np) < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        let mut j = 1.0;
        loop {
            ej *= v;
            let next = s + ej / (2.0 * j + 1.0);
            if next == s {
                return next;
            }
            s = next;
            j += 1.0;
        }
    }
    x * libm::log(x / np) + np - x
}

fn check_index(n: u64, k: u64, x: f64) -> Result<()> {
    if k > n {
        return Err(domain(alloc::format!(
            "basis index k = {k} exceeds degree n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(alloc::format!("abscissa x = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Basis value for a validated `(n, k, x)`.
fn basis_unchecked(n: u64, k: u64, x: f64) -> f64 {
    let q = 1.0 - x;
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= SMALL_DEGREE {
        let v = exact_binomial(n, k) * libm::pow(x, k as f64) * libm::pow(q, (n - k) as f64);
        if v > 1e-280 {
            return v;
        }
    }
    let nf = n as f64;
    if k == 0 {
        return libm::exp(nf * libm::log1p(-x));
    }
    if k == n {
        return libm::exp(nf * libm::log(x));
    }
    let kf = k as f64;
    let rest = (n - k) as f64;
    let lc = stirling_remainder(n)
        - stirling_remainder(k)
        - stirling_remainder(n - k)
        - deviance(kf, nf * x)
        - deviance(rest, nf * q);
    libm::exp(lc) * libm::sqrt(nf / (TWO_PI * kf * rest))
}

/// Bernstein basis polynomial `p_{n,k}(x) = C(n,k) x^k (1-x)^{n-k}`.
pub fn basis(n: u64, k: u64, x: f64) -> Result<f64> {
    check_index(n, k, x)?;
    Ok(basis_unchecked(n, k, x))
}

/// All basis values `p_{n,0}(x), …, p_{n,n}(x)` written into `out`.
pub fn basis_row_into(n: u64, x: f64, out: &mut Vec<f64>) -> Result<()> {
    check_index(n, 0, x)?;
    let len = n as usize + 1;
    out.clear();
    out.resize(len, 0.0);
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(());
    }
    if x == 1.0 {
        out[len - 1] = 1.0;
        return Ok(());
    }
    if n <= SMALL_DEGREE {
        for (k, v) in out.iter_mut().enumerate() {
            *v = basis_unchecked(n, k as u64, x);
        }
        return Ok(());
    }
    let q = 1.0 - x;
    let up = x / q;
    let down = q / x;
    let nf = n as f64;
    let mode = (libm::floor((nf + 1.0) * x) as usize).min(len - 1);
    out[mode] = basis_unchecked(n, mode as u64, x);

    // Upward from the mode: p_{k+1} = p_k (n − k)/(k + 1) · x/q.
    let mut start = mode;
    'up: while start < len - 1 {
        let end = (start + REANCHOR).min(len - 1);
        let mut p = out[start];
        for k in start..end {
            let next = k + 1;
            p = if next == start + REANCHOR {
                basis_unchecked(n, next as u64, x)
            } else {
                p * ((nf - k as f64) / next as f64 * up)
            };
            if p == 0.0 {
                break 'up;
            }
            out[next] = p;
        }
        start = end;
    }
    // Downward: p_{k−1} = p_k k/(n − k + 1) · q/x.
    let mut start = mode;
    'down: while start > 0 {
        let end = start.saturating_sub(REANCHOR);
        let mut p = out[start];
        for k in (end + 1..=start).rev() {
            let next = k - 1;
            p = if next + REANCHOR == start {
                basis_unchecked(n, next as u64, x)
            } else {
                p * (k as f64 / (nf - next as f64) * down)
            };
            if p == 0.0 {
                break 'down;
            }
            out[next] = p;
        }
        start = end;
    }
    Ok(())
}

/// Row of basis values as a fresh vector.
pub fn basis_row(n: u64, x: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    basis_row_into(n, x, &mut out)?;
    Ok(out)
}

/// `Σ_k values[k] p_{n,k}(x)` with `n = values.len() − 1`.
pub fn bernstein_sum(values: &[f64], x: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(domain("empty node table"));
    }
    let n = (values.len() - 1) as u64;
    let row = basis_row(n, x)?;
    let mut acc = CompensatedSum::new();
    for (v, p) in values.iter().zip(&row) {
        if *p != 0.0 {
            acc.add(v * p);
        }
    }
    Ok(acc.total())
}

/// Node values `f(k/n)`, `k = 0..=n`, with endpoint limits at `k ∈ {0, n}`.
pub fn node_values<F: SampledFunction + ?Sized>(f: &F, n: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(domain("Bernstein degree must be positive"));
    }
    let nf = n as f64;
    (0..=n).map(|k| f.node_value(k as f64 / nf)).collect()
}

/// `r`-th forward differences of a node table with unit index step.
pub fn forward_differences(values: &[f64], r: usize) -> Vec<f64> {
    let mut d = values.to_vec();
    for _ in 0..r {
        for i in 0..d.len().saturating_sub(1) {
            d[i] = d[i + 1] - d[i];
        }
        d.pop();
    }
    d
}

/// `n (n−1) ⋯ (n−r+1)` in floating point.
pub fn falling_factorial(n: u64, r: u32) -> f64 {
    (0..r as u64).map(|i| (n - i) as f64).product()
}

/// The Bernstein operator of degree `n` with its node table precomputed.
#[derive(Debug, Clone)]
pub struct Bernstein {
    nodes: Vec<f64>,
}

impl Bernstein {
    pub fn new<F: SampledFunction + ?Sized>(f: &F, n: u64) -> Result<Self> {
        Ok(Self {
            nodes: node_values(f, n)?,
        })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(domain("Bernstein degree must be positive"));
        }
        Ok(Self { nodes })
    }

    pub fn degree(&self) -> u64 {
        (self.nodes.len() - 1) as u64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        bernstein_sum(&self.nodes, x)
    }

    /// `B_n^{(r)}(f, x) = n!/(n−r)! Σ_{k=0}^{n−r} Δ^r f(k/n) p_{n−r,k}(x)`.
    pub fn derivative(&self, r: u32, x: f64) -> Result<f64> {
        let n = self.degree();
        if r as u64 > n {
            return Err(domain(alloc::format!(
                "derivative order {r} exceeds degree {n}"
            )));
        }
        if r == 0 {
            return self.apply(x);
        }
        let diffs = forward_differences(&self.nodes, r as usize);
        Ok(falling_factorial(n, r) * bernstein_sum(&diffs, x)?)
    }
}

/// `B_n(f, x)`.
pub fn bernstein_apply<F: SampledFunction + ?Sized>(f: &F, n: u64, x: f64) -> Result<f64> {
    Bernstein::new(f, n)?.apply(x)
}

/// `r`-th derivative of `B_n(f)` at `x`.
pub fn bernstein_derivative<F: SampledFunction + ?Sized>(
    f: &F,
    n: u64,
    r: u32,
    x: f64,
) -> Result<f64> {
    if r as u64 > n {
        return Err(domain(alloc::format!(
            "derivative order {r} exceeds degree {n}"
        )));
    }
    Bernstein::new(f, n)?.derivative(r, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    /// `Σ (x − k/n)^j p_{n,k}(x)`
    Signed,
    /// `Σ |x − k/n|^j p_{n,k}(x)`
    Absolute,
}

/// Central moment of order `j` of the Bernstein distribution at `x`.
pub fn central_moment(n: u64, j: u32, x: f64, kind: MomentKind) -> Result<f64> {
    if n == 0 {
        return Err(domain("Bernstein degree must be positive"));
    }
    let row = basis_row(n, x)?;
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    for (k, p) in row.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        let d = x - k as f64 / nf;
        let term = match kind {
            MomentKind::Signed => libm::pow(d, j as f64),
            MomentKind::Absolute => libm::pow(libm::fabs(d), j as f64),
        };
        acc.add(term * p);
    }
    Ok(acc.total())
}

/// `Σ_{k=0}^{n} |k − nx|^γ p_{n,k}(x)` for real `γ`.
pub fn absolute_index_moment(n: u64, gamma: f64, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("Bernstein degree must be positive"));
    }
    let row = basis_row(n, x)?;
    let nx = n as f64 * x;
    let mut acc = CompensatedSum::new();
    for (k, p) in row.iter().enumerate() {
        if *p != 0.0 {
            acc.add(libm::pow(libm::fabs(k as f64 - nx), gamma) * p);
        }
    }
    Ok(acc.total())
}

/// Binomial coefficient as a float (exact for the small orders used by differences).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    libm::round(c)
}
