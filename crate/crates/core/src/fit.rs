//! Log-log rate fits.

use alloc::format;

use crate::error::{Error, Result};

/// Least-squares line through `(log scale, log value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    /// RMS of the log-deviations from the fitted line.
    pub residual: f64,
    pub samples: usize,
}

impl RateFit {
    pub fn predict(&self, scale: f64) -> f64 {
        libm::exp(self.intercept + self.exponent * libm::log(scale))
    }
}

/// Fits `value ≈ c · scale^a` and returns `a` with its residual.
///
/// Needs at least four pairs with positive, finite entries and at least two
/// distinct scales.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 pairs, got {}",
            pairs.len()
        )));
    }
    if let Some(&(s, v)) = pairs
        .iter()
        .find(|&&(s, v)| !(s > 0.0 && v > 0.0 && s.is_finite() && v.is_finite()))
    {
        return Err(Error::DegenerateFit(format!(
            "non-positive or non-finite pair ({s}, {v})"
        )));
    }
    let n = pairs.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for &(s, v) in pairs {
        mx += libm::log(s);
        my += libm::log(v);
    }
    mx /= n;
    my /= n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(s, v) in pairs {
        let dx = libm::log(s) - mx;
        sxx += dx * dx;
        sxy += dx * (libm::log(v) - my);
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all scales coincide".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let mut ss = 0.0;
    for &(s, v) in pairs {
        let d = libm::log(v) - (intercept + exponent * libm::log(s));
        ss += d * d;
    }
    Ok(RateFit {
        exponent,
        intercept,
        residual: libm::sqrt(ss / n),
        samples: pairs.len(),
    })
}
