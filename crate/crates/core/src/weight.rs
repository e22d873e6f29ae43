//! Jacobi weights `w` and step-weights `φ`.

use alloc::format;

use crate::error::{domain, Error, Result};

/// `w(x) = x^α (1 − x)^β` with `α, β ≥ 0`, `α + β > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JacobiWeight {
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiWeight {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let w = Self { alpha, beta };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0)
            || !self.alpha.is_finite()
            || !self.beta.is_finite()
        {
            return Err(domain(format!(
                "Jacobi exponents must satisfy α, β ≥ 0 (got α = {}, β = {})",
                self.alpha, self.beta
            )));
        }
        if self.alpha + self.beta <= 0.0 {
            return Err(domain("Jacobi exponents must satisfy α + β > 0"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        power_pair(x, self.alpha, self.beta)
    }

    /// `w(x)·v`, taken as `0` wherever `w(x) = 0` so that singular values of
    /// `f` at a zero of `w` do not poison sup-norms.
    pub fn weighted(&self, x: f64, v: f64) -> f64 {
        let w = self.eval(x);
        if w == 0.0 {
            0.0
        } else {
            w * v
        }
    }
}

/// `x^a (1 − x)^b`, exact at the endpoints (`0^0 = 1`).
fn power_pair(x: f64, a: f64, b: f64) -> f64 {
    let left = if a == 0.0 { 1.0 } else { libm::pow(x, a) };
    let right = if b == 0.0 { 1.0 } else { libm::pow(1.0 - x, b) };
    left * right
}

/// Step-weight `φ(x) = x^{β(0)} (1 − x)^{β(1)}`.
///
/// `β(0) = β(1) = 1/2` is `varphi(x) = √(x(1 − x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepWeight {
    pub beta0: f64,
    pub beta1: f64,
}

impl StepWeight {
    pub fn new(beta0: f64, beta1: f64) -> Result<Self> {
        if !(beta0 >= 0.0 && beta1 >= 0.0) || !beta0.is_finite() || !beta1.is_finite() {
            return Err(domain(format!(
                "step-weight exponents must be non-negative (got β(0) = {beta0}, β(1) = {beta1})"
            )));
        }
        Ok(Self { beta0, beta1 })
    }

    pub const fn varphi() -> Self {
        Self {
            beta0: 0.5,
            beta1: 0.5,
        }
    }

    /// `varphi^λ`, the step-weight of the corollary.
    pub fn varphi_power(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(domain(format!("λ must lie in [0, 1] (got {lambda})")));
        }
        Self::new(lambda / 2.0, lambda / 2.0)
    }

    pub fn is_varphi(&self) -> bool {
        self.beta0 == 0.5 && self.beta1 == 0.5
    }

    pub fn eval(&self, x: f64) -> f64 {
        power_pair(x, self.beta0, self.beta1)
    }

    /// Whether the hypothesis `min{β(0), β(1)} ≥ 1/2` of the main theorems holds.
    pub fn theorem_mode(&self) -> bool {
        self.beta0.min(self.beta1) >= 0.5
    }

    pub fn require_theorem_mode(&self) -> Result<()> {
        if self.theorem_mode() {
            Ok(())
        } else {
            Err(Error::Configuration(format!(
                "theorem hypothesis min{{β(0),β(1)}} ≥ 1/2 violated (β(0) = {}, β(1) = {})",
                self.beta0, self.beta1
            )))
        }
    }

    /// Smallest `M₁ ≥ 1` with `M₁⁻¹ ≤ φ ≤ M₁` on `[a, b] ⊂ (0, 1)`.
    ///
    /// `φ` is unimodal with its maximum at `β(0)/(β(0)+β(1))`, so the extremes
    /// on `[a, b]` are at the ends or at that point.
    pub fn bound_on(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 < a && a <= b && b < 1.0) {
            return Err(domain(format!(
                "[{a}, {b}] is not a closed subinterval of (0, 1)"
            )));
        }
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        let s = self.beta0 + self.beta1;
        if s > 0.0 {
            let peak = self.beta0 / s;
            if a < peak && peak < b {
                hi = hi.max(self.eval(peak));
            }
        }
        lo = lo.min(hi);
        Ok(hi.max(1.0 / lo).max(1.0))
    }
}

/// `δ_n(x) = varphi(x) + n^{−1/2}`.
pub fn delta_n(n: u64, x: f64) -> f64 {
    StepWeight::varphi().eval(x) + 1.0 / libm::sqrt(n as f64)
}
