//! Test functions and the default corpus.

use bsingular_core::{Endpoint, JacobiWeight, SampledFunction, StepWeight};
use serde::{Deserialize, Serialize};

use crate::expr::{Expr, Kink, ParseError};

/// Leading non-smooth behaviour of a function: `f ≈ c·t^a` near `0`,
/// `c·(1 − t)^b` near `1`, and interior kinks `|t − c|^p`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Singularities {
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub kinks: Vec<(f64, f64)>,
}

/// Smallest log-log decay rate of `|wf|` accepted as vanishing at an endpoint.
pub const CW_MIN_DECAY: f64 = 0.005;

/// A sampleable function with its declared endpoint behaviour.
#[derive(Debug, Clone)]
pub struct TestFunction {
    name: String,
    expr: Expr,
    singularities: Singularities,
    /// Set when the descriptor is declared rather than inferred.
    declared: bool,
    left_limit: Option<f64>,
    right_limit: Option<f64>,
}

fn limit(value: f64) -> Option<f64> {
    value.is_finite().then_some(value)
}

impl TestFunction {
    /// A function from an expression; kinks are read off the expression,
    /// endpoint exponents are unknown.
    pub fn from_expr(name: &str, source: &str) -> Result<Self, ParseError> {
        let expr = Expr::parse(source)?;
        let kinks = expr
            .kinks()
            .into_iter()
            .map(|Kink { at, exponent }| (at, exponent))
            .collect();
        Ok(Self::build(
            name,
            expr,
            Singularities {
                left: None,
                right: None,
                kinks,
            },
            false,
        ))
    }

    /// A function with a declared singularity descriptor.
    pub fn declared(
        name: &str,
        source: &str,
        singularities: Singularities,
    ) -> Result<Self, ParseError> {
        let expr = Expr::parse(source)?;
        Ok(Self::build(name, expr, singularities, true))
    }

    fn build(name: &str, expr: Expr, singularities: Singularities, declared: bool) -> Self {
        let left_limit = limit(expr.eval(0.0));
        let right_limit = limit(expr.eval(1.0));
        Self {
            name: name.to_string(),
            expr,
            singularities,
            declared,
            left_limit,
            right_limit,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn singularities(&self) -> &Singularities {
        &self.singularities
    }

    pub fn kink_points(&self) -> Vec<f64> {
        self.singularities.kinks.iter().map(|&(c, _)| c).collect()
    }

    /// Whether the function is a polynomial of degree below `r` (both sides of
    /// every check vanish identically).
    pub fn is_polynomial_below(&self, r: u32) -> bool {
        // A polynomial of degree < r has a vanishing r-th derivative everywhere.
        self.singularities == Singularities::default()
            && [0.13, 0.37, 0.61, 0.89]
                .iter()
                .all(|&t| self.expr.derivative(r, t).abs() <= 1e-12)
            && self.expr.eval(0.5).is_finite()
    }

    /// Smoothness order `α₀` of `ω_φ^r(f, t)_w` for `φ = varphi`, when the
    /// descriptor is declared.
    ///
    /// An endpoint term `t^a` under the weight `t^α` contributes `2(a + α)`
    /// (unless `a` is a non-negative integer), a kink `|t − c|^p` contributes
    /// `p` (unless `p` is an even integer); the result is capped at `r`.
    pub fn expected_alpha0(&self, w: &JacobiWeight, r: u32) -> Option<f64> {
        if !self.declared {
            return None;
        }
        let mut a0 = r as f64;
        let smooth_power = |a: f64| a >= 0.0 && a.fract() == 0.0;
        if let Some(a) = self.singularities.left.filter(|&a| !smooth_power(a)) {
            a0 = a0.min(2.0 * (a + w.alpha));
        }
        if let Some(b) = self.singularities.right.filter(|&b| !smooth_power(b)) {
            a0 = a0.min(2.0 * (b + w.beta));
        }
        for &(_, p) in &self.singularities.kinks {
            if !(p >= 0.0 && p % 2.0 == 0.0) {
                a0 = a0.min(p);
            }
        }
        Some(a0)
    }

    /// `|w f|` at `x`, zero wherever `w` vanishes.
    pub fn weighted_abs(&self, w: &JacobiWeight, x: f64) -> f64 {
        w.weighted(x, self.expr.eval(x).abs())
    }

    /// Numerical `C_w` membership: `w·f` is bounded, and `|wf|` at distance
    /// `2^{−j}` from each endpoint (`j` from 20 to 60, or 52 at `1`) is
    /// non-increasing with log-log decay slope at least [`CW_MIN_DECAY`].
    pub fn check_cw(&self, w: &JacobiWeight) -> Result<(), String> {
        let sup = (1..1000)
            .map(|i| self.weighted_abs(w, i as f64 / 1000.0))
            .chain((1..=60).map(|j| self.weighted_abs(w, 2f64.powi(-j))))
            .chain((1..=52).map(|j| self.weighted_abs(w, 1.0 - 2f64.powi(-j))))
            .fold(0.0f64, f64::max);
        if !sup.is_finite() {
            return Err(format!("{}: w·f is unbounded", self.name));
        }
        // Samples at distance 2^{−j} from the endpoint must be non-increasing
        // and decay like a positive power of the distance.
        let side = |js: &[i32], vals: Vec<f64>, end: &str| -> Result<(), String> {
            if vals.iter().all(|&v| v == 0.0) {
                return Ok(());
            }
            let monotone = vals.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12));
            let (first, last) = (vals[0], vals[vals.len() - 1]);
            let span = (js[js.len() - 1] - js[0]) as f64 * std::f64::consts::LN_2;
            let slope = if last > 0.0 {
                (first / last).ln() / span
            } else {
                f64::INFINITY
            };
            if monotone && slope >= CW_MIN_DECAY {
                Ok(())
            } else {
                Err(format!(
                    "{}: w·f does not vanish at x = {end} (|wf| samples {vals:?})",
                    self.name
                ))
            }
        };
        let left = [20, 30, 40, 50, 60];
        side(
            &left,
            left.iter()
                .map(|&j| self.weighted_abs(w, 2f64.powi(-j)))
                .collect(),
            "0",
        )?;
        // 1 − 2^{−j} is representable only for j ≤ 52.
        let right = [20, 30, 40, 50, 52];
        side(
            &right,
            right
                .iter()
                .map(|&j| self.weighted_abs(w, 1.0 - 2f64.powi(-j)))
                .collect(),
            "1",
        )
    }

    /// `sup |w φ^r f^{(r)}|` over a grid of interior points reaching
    /// `2^{−depth}` from both ends and from every kink.
    pub fn smooth_norm(&self, w: &JacobiWeight, phi: &StepWeight, r: u32, depth: i32) -> f64 {
        let mut xs: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        for j in 1..=depth {
            let d = 2f64.powi(-j);
            xs.push(d);
            if j <= 52 {
                xs.push(1.0 - d);
            }
            for c in self.kink_points() {
                xs.push(c - d * c.min(1.0 - c));
                xs.push(c + d * c.min(1.0 - c));
            }
        }
        xs.retain(|&x| x > 0.0 && x < 1.0 && !self.kink_points().contains(&x));
        let wp = |x: f64| w.eval(x) * phi.eval(x).powi(r as i32);
        xs.iter()
            .map(|&x| {
                let d = self.expr.derivative(r, x).abs();
                let v = wp(x);
                if v == 0.0 {
                    0.0
                } else {
                    v * d
                }
            })
            .fold(
                0.0f64,
                |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) },
            )
    }

    /// Numerical `W_φ^r` membership: every kink exponent is at least `r` (or
    /// an even integer) and `‖wφ^r f^{(r)}‖` is finite and changes by less
    /// than 2% when the grid is pushed from `2^{−30}` to `2^{−60}`.
    pub fn in_sobolev(&self, w: &JacobiWeight, phi: &StepWeight, r: u32) -> bool {
        let kinks_ok = self
            .singularities
            .kinks
            .iter()
            .all(|&(_, p)| p >= r as f64 || (p >= 0.0 && p % 2.0 == 0.0));
        if !kinks_ok {
            return false;
        }
        let coarse = self.smooth_norm(w, phi, r, 30);
        let fine = self.smooth_norm(w, phi, r, 60);
        coarse.is_finite()
            && fine.is_finite()
            && (fine - coarse).abs() <= 0.02 * fine.max(f64::MIN_POSITIVE)
    }
}

impl SampledFunction for TestFunction {
    fn eval(&self, x: f64) -> f64 {
        self.expr.eval(x)
    }

    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        match end {
            Endpoint::Left => self.left_limit,
            Endpoint::Right => self.right_limit,
        }
    }

    fn derivative(&self, order: u32, x: f64) -> Option<f64> {
        let d = self.expr.derivative(order, x);
        d.is_finite().then_some(d)
    }
}

/// One corpus entry: name, expression and descriptor.
fn entry(
    name: &str,
    source: &str,
    left: Option<f64>,
    right: Option<f64>,
    kinks: &[(f64, f64)],
) -> TestFunction {
    TestFunction::declared(
        name,
        source,
        Singularities {
            left,
            right,
            kinks: kinks.to_vec(),
        },
    )
    .expect("corpus expressions parse")
}

/// The default corpus for the weight `w`; `t^{−1/4}` only joins when `α > 1/4`.
pub fn default_corpus(w: &JacobiWeight) -> Vec<TestFunction> {
    let mut out = vec![
        entry("one", "1", None, None, &[]),
        entry("t", "t", None, None, &[]),
        entry("t^2", "t^2", None, None, &[]),
        entry("t^3", "t^3", None, None, &[]),
        entry("t^1/2", "t^(1/2)", Some(0.5), None, &[]),
        entry("t^3/4", "t^(3/4)", Some(0.75), None, &[]),
        entry("t^5/2", "t^(5/2)", Some(2.5), None, &[]),
        entry("|t-1/2|", "|t-1/2|", None, None, &[(0.5, 1.0)]),
        entry("|t-1/2|^3/2", "|t-1/2|^(3/2)", None, None, &[(0.5, 1.5)]),
    ];
    if w.alpha > 0.25 {
        out.push(entry("t^-1/4", "t^(-1/4)", Some(-0.25), None, &[]));
    }
    out.push(entry(
        "t^1/2(1-t)^1/2",
        "t^(1/2)*(1-t)^(1/2)",
        Some(0.5),
        Some(0.5),
        &[],
    ));
    out
}

/// Looks a corpus member up by name, for any admissible weight.
pub fn corpus_member(name: &str) -> Option<TestFunction> {
    default_corpus(&JacobiWeight {
        alpha: 1.0,
        beta: 1.0,
    })
    .into_iter()
    .find(|f| f.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: f64, b: f64) -> JacobiWeight {
        JacobiWeight::new(a, b).unwrap()
    }

    #[test]
    fn corpus_is_in_cw() {
        let wt = w(0.5, 0.5);
        let corpus = default_corpus(&wt);
        assert_eq!(corpus.len(), 11);
        for f in &corpus {
            f.check_cw(&wt).unwrap();
        }
        assert_eq!(default_corpus(&w(0.125, 0.125)).len(), 10);
        let bad = corpus_member("t^-1/4").unwrap();
        assert!(bad.check_cw(&w(0.125, 0.125)).is_err());
        let one = corpus_member("one").unwrap();
        assert!(one.check_cw(&w(0.0, 1.0)).is_err());
    }

    #[test]
    fn alpha0_from_descriptor() {
        let wt = w(0.5, 0.5);
        let get = |n: &str| corpus_member(n).unwrap().expected_alpha0(&wt, 2).unwrap();
        assert_eq!(get("|t-1/2|"), 1.0);
        assert_eq!(get("|t-1/2|^3/2"), 1.5);
        assert_eq!(get("t^-1/4"), 0.5);
        assert_eq!(get("t^3/4"), 2.0);
        assert_eq!(get("t^2"), 2.0);
        let light = w(0.125, 0.125);
        assert_eq!(
            corpus_member("t^3/4").unwrap().expected_alpha0(&light, 2),
            Some(1.75)
        );
        assert!(TestFunction::from_expr("x", "t^0.75")
            .unwrap()
            .expected_alpha0(&wt, 2)
            .is_none());
    }

    #[test]
    fn sobolev_membership() {
        let wt = w(0.5, 0.5);
        let phi = StepWeight::varphi();
        assert!(corpus_member("t^1/2").unwrap().in_sobolev(&wt, &phi, 2));
        assert!(corpus_member("t^5/2").unwrap().in_sobolev(&wt, &phi, 2));
        assert!(corpus_member("t^3").unwrap().in_sobolev(&wt, &phi, 2));
        assert!(!corpus_member("|t-1/2|").unwrap().in_sobolev(&wt, &phi, 2));
        assert!(!corpus_member("|t-1/2|^3/2")
            .unwrap()
            .in_sobolev(&wt, &phi, 2));
        assert!(!corpus_member("t^-1/4").unwrap().in_sobolev(&wt, &phi, 2));
        assert!(corpus_member("t").unwrap().is_polynomial_below(2));
        assert!(!corpus_member("t^2").unwrap().is_polynomial_below(2));
    }
}
