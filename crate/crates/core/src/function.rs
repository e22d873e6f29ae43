//! Functions on the unit interval as the operators see them.

use alloc::format;

use crate::error::{Error, Result};

/// One of the two ends of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

impl Endpoint {
    pub const fn abscissa(self) -> f64 {
        match self {
            Endpoint::Left => 0.0,
            Endpoint::Right => 1.0,
        }
    }
}

/// A real function sampled on `(0, 1)`.
///
/// `eval` only has to be meaningful strictly inside the interval. Values at
/// `0` and `1` come from [`SampledFunction::endpoint_limit`], which defaults to
/// evaluating there and accepting the result when it is finite. Functions with
/// an endpoint singularity therefore report `None` and cannot be fed to a
/// Bernstein operator directly.
pub trait SampledFunction {
    fn eval(&self, x: f64) -> f64;

    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        let v = self.eval(end.abscissa());
        v.is_finite().then_some(v)
    }

    /// `order`-th derivative at an interior point, when available.
    fn derivative(&self, order: u32, x: f64) -> Option<f64> {
        (order == 0).then(|| self.eval(x))
    }

    /// Value used at a Bernstein node `x ∈ [0, 1]`.
    fn node_value(&self, x: f64) -> Result<f64> {
        let end = if x == 0.0 {
            Endpoint::Left
        } else if x == 1.0 {
            Endpoint::Right
        } else {
            return Ok(self.eval(x));
        };
        self.endpoint_limit(end).ok_or_else(|| {
            Error::Configuration(format!(
                "function has no finite limit at x = {}; apply the operator to the endpoint-modified function instead",
                end.abscissa()
            ))
        })
    }
}

impl<T: SampledFunction + ?Sized> SampledFunction for &T {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        (**self).endpoint_limit(end)
    }
    fn derivative(&self, order: u32, x: f64) -> Option<f64> {
        (**self).derivative(order, x)
    }
}

/// Adapter turning a closure into a [`SampledFunction`].
#[derive(Clone)]
pub struct FromFn<F> {
    f: F,
    left: Option<Option<f64>>,
    right: Option<Option<f64>>,
}

/// Wraps `f`; endpoint limits default to evaluating `f` at `0` and `1`.
pub fn from_fn<F: Fn(f64) -> f64>(f: F) -> FromFn<F> {
    FromFn {
        f,
        left: None,
        right: None,
    }
}

impl<F: Fn(f64) -> f64> FromFn<F> {
    /// Overrides the endpoint limits; `None` declares a singular endpoint.
    pub fn with_limits(mut self, left: Option<f64>, right: Option<f64>) -> Self {
        self.left = Some(left);
        self.right = Some(right);
        self
    }

    /// Attaches derivative evaluators, `d(order, x)` for `order ≥ 1`.
    pub fn with_derivatives<D: Fn(u32, f64) -> Option<f64>>(self, d: D) -> WithDerivatives<F, D> {
        WithDerivatives { inner: self, d }
    }
}

impl<F: Fn(f64) -> f64> SampledFunction for FromFn<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        let declared = match end {
            Endpoint::Left => self.left,
            Endpoint::Right => self.right,
        };
        match declared {
            Some(v) => v,
            None => {
                let v = (self.f)(end.abscissa());
                v.is_finite().then_some(v)
            }
        }
    }
}

pub struct WithDerivatives<F, D> {
    inner: FromFn<F>,
    d: D,
}

impl<F, D> SampledFunction for WithDerivatives<F, D>
where
    F: Fn(f64) -> f64,
    D: Fn(u32, f64) -> Option<f64>,
{
    fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }
    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        self.inner.endpoint_limit(end)
    }
    fn derivative(&self, order: u32, x: f64) -> Option<f64> {
        if order == 0 {
            Some(self.inner.eval(x))
        } else {
            (self.d)(order, x)
        }
    }
}

/// Pointwise sum of two functions.
pub struct Sum<A, B>(pub A, pub B);

impl<A: SampledFunction, B: SampledFunction> SampledFunction for Sum<A, B> {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval(x) + self.1.eval(x)
    }
    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        Some(self.0.endpoint_limit(end)? + self.1.endpoint_limit(end)?)
    }
    fn derivative(&self, order: u32, x: f64) -> Option<f64> {
        Some(self.0.derivative(order, x)? + self.1.derivative(order, x)?)
    }
}

/// `factor · f`.
pub struct Scaled<A> {
    pub factor: f64,
    pub inner: A,
}

impl<A: SampledFunction> SampledFunction for Scaled<A> {
    fn eval(&self, x: f64) -> f64 {
        self.factor * self.inner.eval(x)
    }
    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        self.inner.endpoint_limit(end).map(|v| self.factor * v)
    }
    fn derivative(&self, order: u32, x: f64) -> Option<f64> {
        self.inner.derivative(order, x).map(|v| self.factor * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_endpoint_is_a_configuration_error() {
        let f = from_fn(|t: f64| libm::pow(t, -0.25));
        assert!(matches!(f.node_value(0.0), Err(Error::Configuration(_))));
        assert_eq!(f.node_value(1.0).unwrap(), 1.0);
    }

    #[test]
    fn declared_limits_override_evaluation() {
        let f = from_fn(|t: f64| t).with_limits(Some(5.0), None);
        assert_eq!(f.node_value(0.0).unwrap(), 5.0);
        assert!(f.node_value(1.0).is_err());
        assert_eq!(f.node_value(0.5).unwrap(), 0.5);
    }
}
