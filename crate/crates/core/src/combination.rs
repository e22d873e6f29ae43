//! Linear combinations `B_{n,m} = Σ_i C_i(n) B_{n_i}` of Bernstein operators.
//!
//! The coefficients solve the `m × m` Vandermonde system in the variables
//! `1/n_i`
//!
//! ```text
//! Σ_i C_i = 1,    Σ_i C_i n_i^{-k} = 0   (k = 1, …, m−1)
//! ```
//!
//! exactly over the rationals; the floats are rounded once from the exact
//! solution. With `m` terms the combination annihilates the moments
//! `B_{n,m}((· − x)^k, x)` for `k = 1, …, m`: each single-operator moment is a
//! polynomial in `1/n` of degree at most `k − 1` without constant term.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bernstein::{central_moment, Bernstein, MomentKind};
use crate::error::{domain, Error, Result};
use crate::function::SampledFunction;
use crate::sum::CompensatedSum;

/// Rule producing the degree ladder `n = n_0 < n_1 < … < n_{m−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Ladder {
    /// `n_i = 2^i n`
    Geometric,
    /// `n_i = (i + 1) n`
    Arithmetic,
    /// Degrees given verbatim; the first one is the base degree.
    Explicit(Vec<u64>),
}

impl Ladder {
    pub fn degrees(&self, n: u64, m: usize) -> Result<Vec<u64>> {
        let degrees: Vec<u64> = match self {
            Ladder::Geometric => (0..m)
                .map(|i| {
                    1u64.checked_shl(i as u32)
                        .and_then(|s| s.checked_mul(n))
                        .ok_or_else(|| domain("geometric ladder overflows u64"))
                })
                .collect::<Result<_>>()?,
            Ladder::Arithmetic => (0..m).map(|i| (i as u64 + 1) * n).collect(),
            Ladder::Explicit(d) => {
                if d.len() != m {
                    return Err(domain(format!(
                        "explicit ladder has {} degrees, expected {m}",
                        d.len()
                    )));
                }
                if d.first() != Some(&n) {
                    return Err(domain("explicit ladder must start at the base degree"));
                }
                d.clone()
            }
        };
        for w in degrees.windows(2) {
            if w[0] == w[1] {
                return Err(domain(format!(
                    "duplicate degree {} makes the system singular",
                    w[0]
                )));
            }
            if w[0] > w[1] {
                return Err(domain("ladder degrees must be strictly increasing"));
            }
        }
        Ok(degrees)
    }
}

/// Degrees and coefficients of a combination satisfying conditions (a)–(d).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(try_from = "SchemeRecord", into = "SchemeRecord")
)]
pub struct CombinationScheme {
    n: u64,
    ladder: Ladder,
    degrees: Vec<u64>,
    exact: Vec<BigRational>,
    coefficients: Vec<f64>,
}

/// Solves `Σ_i C_i y_i^k = δ_{k0}`, `k < m`, with `y_i = 1/n_i`, by exact
/// Gaussian elimination.
fn solve_exact(degrees: &[u64]) -> Result<Vec<BigRational>> {
    let m = degrees.len();
    let inv: Vec<BigRational> = degrees
        .iter()
        .map(|&d| BigRational::new(BigInt::one(), BigInt::from(d)))
        .collect();
    // Augmented rows: a[k] = [y_0^k, …, y_{m-1}^k | δ_{k0}].
    let mut a: Vec<Vec<BigRational>> = (0..m)
        .map(|k| {
            let mut row: Vec<BigRational> =
                inv.iter().map(|y| num_traits::pow(y.clone(), k)).collect();
            row.push(if k == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            });
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| domain("singular coefficient system"))?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut().skip(col) {
            *v = &*v / &p;
        }
        for r in 0..m {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..=m {
                let delta = &factor * &a[col][c];
                a[r][c] = &a[r][c] - delta;
            }
        }
    }
    Ok(a.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

fn rational_to_f64(q: &BigRational) -> Result<f64> {
    q.to_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| domain("coefficient not representable as f64"))
}

impl CombinationScheme {
    /// Builds the `m`-term scheme with base degree `n` on `ladder`.
    pub fn new(n: u64, m: usize, ladder: Ladder) -> Result<Self> {
        if n == 0 {
            return Err(domain("base degree must be positive"));
        }
        if m == 0 {
            return Err(domain("a combination needs at least one term"));
        }
        let degrees = ladder.degrees(n, m)?;
        let exact = solve_exact(&degrees)?;
        let coefficients = exact.iter().map(rational_to_f64).collect::<Result<_>>()?;
        Ok(Self {
            n,
            ladder,
            degrees,
            exact,
            coefficients,
        })
    }

    /// Default geometric ladder `n_i = 2^i n`.
    pub fn geometric(n: u64, m: usize) -> Result<Self> {
        Self::new(n, m, Ladder::Geometric)
    }

    pub fn base_degree(&self) -> u64 {
        self.n
    }

    pub fn terms(&self) -> usize {
        self.degrees.len()
    }

    pub fn ladder(&self) -> &Ladder {
        &self.ladder
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn exact_coefficients(&self) -> &[BigRational] {
        &self.exact
    }

    /// `Σ_i |C_i|`, the constant of condition (b).
    pub fn absolute_sum(&self) -> f64 {
        let s = self
            .exact
            .iter()
            .fold(BigRational::zero(), |acc, c| acc + c.abs());
        rational_to_f64(&s).unwrap_or(f64::INFINITY)
    }

    /// `n_{m−1} / n`, the constant of condition (a).
    pub fn growth(&self) -> f64 {
        *self.degrees.last().unwrap() as f64 / self.n as f64
    }

    /// Floating-point residuals of conditions (c) and (d).
    ///
    /// Entry `0` is `Σ C_i − 1`; entry `k ≥ 1` is `Σ C_i n_i^{-k}` divided by
    /// `Σ |C_i| n_i^{-k}`.
    pub fn condition_residuals(&self) -> Vec<f64> {
        (0..self.terms())
            .map(|k| {
                let mut acc = CompensatedSum::new();
                let mut scale = 0.0;
                for (c, &d) in self.coefficients.iter().zip(&self.degrees) {
                    let t = c * libm::pow(d as f64, -(k as f64));
                    acc.add(t);
                    scale += libm::fabs(t);
                }
                if k == 0 {
                    acc.total() - 1.0
                } else {
                    acc.total() / scale
                }
            })
            .collect()
    }

    /// Precomputes the node tables of every term for `f`.
    pub fn operator<F: SampledFunction + ?Sized>(&self, f: &F) -> Result<CombinedOperator> {
        let terms = self
            .degrees
            .iter()
            .map(|&d| Bernstein::new(f, d))
            .collect::<Result<_>>()?;
        Ok(CombinedOperator {
            coefficients: self.coefficients.clone(),
            terms,
        })
    }
}

/// `B_{n,m}` bound to a function, node tables cached.
#[derive(Debug, Clone)]
pub struct CombinedOperator {
    coefficients: Vec<f64>,
    terms: Vec<Bernstein>,
}

impl CombinedOperator {
    pub fn apply(&self, x: f64) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (c, b) in self.coefficients.iter().zip(&self.terms) {
            acc.add(c * b.apply(x)?);
        }
        Ok(acc.total())
    }

    pub fn derivative(&self, r: u32, x: f64) -> Result<f64> {
        let base = self.terms[0].degree();
        if r as u64 > base {
            return Err(domain(format!(
                "derivative order {r} exceeds base degree {base}"
            )));
        }
        let mut acc = CompensatedSum::new();
        for (c, b) in self.coefficients.iter().zip(&self.terms) {
            acc.add(c * b.derivative(r, x)?);
        }
        Ok(acc.total())
    }
}

/// `B_{n,m}(f, x)`.
pub fn combo_apply<F: SampledFunction + ?Sized>(
    scheme: &CombinationScheme,
    f: &F,
    x: f64,
) -> Result<f64> {
    scheme.operator(f)?.apply(x)
}

/// `B_{n,m}^{(r)}(f, x)`; `r` may not exceed the base degree.
pub fn combo_derivative<F: SampledFunction + ?Sized>(
    scheme: &CombinationScheme,
    f: &F,
    r: u32,
    x: f64,
) -> Result<f64> {
    if r as u64 > scheme.base_degree() {
        return Err(domain(format!(
            "derivative order {r} exceeds base degree {}",
            scheme.base_degree()
        )));
    }
    scheme.operator(f)?.derivative(r, x)
}

/// `B_{n,m}((· − x)^k, x)` for `k = 1, …, k_max`.
pub fn moment_annihilation(scheme: &CombinationScheme, k_max: u32, x: f64) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(domain("k_max must be at least 1"));
    }
    (1..=k_max)
        .map(|k| {
            // Σ (k/n − x)^k p = (−1)^k Σ (x − k/n)^k p
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut acc = CompensatedSum::new();
            for (c, &d) in scheme.coefficients.iter().zip(&scheme.degrees) {
                acc.add(c * sign * central_moment(d, k, x, MomentKind::Signed)?);
            }
            Ok(acc.total())
        })
        .collect()
}

/// Serialized form: exact coefficients travel as decimal numerator/denominator strings.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone)]
pub struct SchemeRecord {
    pub n: u64,
    pub m: usize,
    pub ladder: Ladder,
    pub degrees: Vec<u64>,
    pub coefficients: Vec<CoefficientRecord>,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone)]
pub struct CoefficientRecord {
    pub numerator: String,
    pub denominator: String,
    pub value: f64,
}

impl From<CombinationScheme> for SchemeRecord {
    fn from(s: CombinationScheme) -> Self {
        let coefficients = s
            .exact
            .iter()
            .zip(&s.coefficients)
            .map(|(q, &value)| CoefficientRecord {
                numerator: q.numer().to_string(),
                denominator: q.denom().to_string(),
                value,
            })
            .collect();
        SchemeRecord {
            n: s.n,
            m: s.degrees.len(),
            ladder: s.ladder,
            degrees: s.degrees,
            coefficients,
        }
    }
}

impl TryFrom<SchemeRecord> for CombinationScheme {
    type Error = Error;

    /// Rebuilds the scheme and rejects records whose degrees or exact
    /// coefficients disagree with the ladder.
    fn try_from(r: SchemeRecord) -> Result<Self> {
        let scheme = CombinationScheme::new(r.n, r.m, r.ladder)?;
        if scheme.degrees != r.degrees {
            return Err(domain("serialized degrees do not match the ladder"));
        }
        if r.coefficients.len() != scheme.exact.len() {
            return Err(domain("serialized coefficient count does not match m"));
        }
        for (rec, q) in r.coefficients.iter().zip(&scheme.exact) {
            let parse = |s: &str| {
                s.parse::<BigInt>()
                    .map_err(|_| domain(format!("invalid integer {s:?} in coefficient")))
            };
            let num = parse(&rec.numerator)?;
            let den = parse(&rec.denominator)?;
            if den.is_zero() || BigRational::new(num, den) != *q {
                return Err(domain("serialized coefficients violate conditions (c)-(d)"));
            }
        }
        Ok(scheme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::from_fn;
    use approx::assert_relative_eq;
    use num_traits::FromPrimitive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from_i64(n).unwrap(), BigInt::from_i64(d).unwrap())
    }

    #[test]
    fn small_schemes_are_exact() {
        let s1 = CombinationScheme::geometric(32, 1).unwrap();
        assert_eq!(s1.coefficients(), &[1.0]);
        let s2 = CombinationScheme::geometric(32, 2).unwrap();
        assert_eq!(s2.exact_coefficients(), &[q(-1, 1), q(2, 1)]);
        assert_eq!(s2.coefficients(), &[-1.0, 2.0]);
        let s3 = CombinationScheme::geometric(32, 3).unwrap();
        assert_eq!(s3.exact_coefficients(), &[q(1, 3), q(-2, 1), q(8, 3)]);
        assert_eq!(s3.coefficients()[0], 1.0 / 3.0);
        assert_eq!(s3.coefficients()[2], 8.0 / 3.0);
    }

    #[test]
    fn duplicate_degrees_rejected() {
        let err =
            CombinationScheme::new(10, 3, Ladder::Explicit(alloc::vec![10, 20, 20])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(CombinationScheme::new(10, 2, Ladder::Explicit(alloc::vec![11, 20])).is_err());
        assert!(CombinationScheme::new(10, 0, Ladder::Geometric).is_err());
    }

    #[test]
    fn apply_examples() {
        let one = from_fn(|_| 1.0);
        let s = CombinationScheme::geometric(16, 3).unwrap();
        assert_relative_eq!(combo_apply(&s, &one, 0.6).unwrap(), 1.0, epsilon = 1e-14);
        let id = from_fn(|t| t);
        let s2 = CombinationScheme::geometric(32, 2).unwrap();
        assert_relative_eq!(combo_apply(&s2, &id, 0.3).unwrap(), 0.3, epsilon = 1e-14);
        let sq = from_fn(|t| t * t);
        let s = CombinationScheme::geometric(10, 2).unwrap();
        assert_relative_eq!(combo_apply(&s, &sq, 0.3).unwrap(), 0.09, epsilon = 1e-14);
    }

    #[test]
    fn derivative_examples() {
        let s = CombinationScheme::geometric(16, 2).unwrap();
        let id = from_fn(|t| t);
        assert_relative_eq!(
            combo_derivative(&s, &id, 1, 0.4).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let one = from_fn(|_| 1.0);
        assert_eq!(combo_derivative(&s, &one, 2, 0.4).unwrap(), 0.0);
        assert!(combo_derivative(&s, &one, 17, 0.4).is_err());
    }

    #[test]
    fn annihilation_examples() {
        let s = CombinationScheme::geometric(10, 2).unwrap();
        let res = moment_annihilation(&s, 2, 0.3).unwrap();
        assert!(res[0].abs() <= 1e-14);
        assert!(res[1].abs() <= 1e-12);
        let single = CombinationScheme::geometric(10, 1).unwrap();
        let res = moment_annihilation(&single, 2, 0.3).unwrap();
        assert_relative_eq!(res[1], 0.021, epsilon = 1e-15);
    }

    #[test]
    fn growth_and_absolute_sum() {
        let s = CombinationScheme::geometric(32, 3).unwrap();
        assert_eq!(s.growth(), 4.0);
        assert_relative_eq!(s.absolute_sum(), 5.0, epsilon = 1e-15);
        let a = CombinationScheme::new(8, 3, Ladder::Arithmetic).unwrap();
        assert_eq!(a.degrees(), &[8, 16, 24]);
    }
}
