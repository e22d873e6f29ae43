//! Endpoint modification `F_n` and the modified combination `B*_{n,m}`.
//!
//! Near `0` the function is replaced by the degree `r − 1` Lagrange
//! extrapolant `L_r` through the nodes `1/n, …, r/n`, near `1` by its mirror
//! `R_r` through `1 − i/n`:
//!
//! ```text
//! F_n = L_r                              on [0, 1/n]
//! F_n = f + ψ(nx − 1) (L_r − f)          on (1/n, 2/n)
//! F_n = f                                on [2/n, 1 − 2/n]
//! F_n = f + ψ(n(1 − x) − 1) (R_r − f)    on (1 − 2/n, 1 − 1/n)
//! F_n = R_r                              on [1 − 1/n, 1]
//! ```
//!
//! `F_n` is finite on the closed interval even when `f` blows up at an end,
//! so `B*_{n,m}(f) := B_{n,m}(F_n)` is defined for every `f ∈ C_w`.

use alloc::format;
use alloc::vec::Vec;

use crate::bernstein::{basis, binomial};
use crate::combination::{CombinationScheme, CombinedOperator};
use crate::error::{domain, Result};
use crate::function::{Endpoint, SampledFunction};

/// Cutoff `ψ` with `ψ = 1` on `(−∞, 0]`, `ψ = 0` on `[1, ∞)`.
///
/// In between it is the polynomial smoothstep of degree `2r + 1`,
/// `ψ(t) = Σ_{j ≤ r} p_{2r+1, j}(t)`, whose derivatives of order `1..=r`
/// vanish at both ends. It is the lower tail of a binomial distribution, hence
/// non-increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cutoff {
    order: u32,
}

impl Cutoff {
    pub const fn new(order: u32) -> Self {
        Self { order }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        let deg = 2 * self.order as u64 + 1;
        (0..=self.order as u64)
            .map(|j| basis(deg, j, t).unwrap_or(0.0))
            .sum()
    }

    /// `ψ'(t) = −(2r+1) C(2r, r) t^r (1−t)^r` on `(0, 1)`.
    pub fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let r = self.order;
        let c = (2 * r + 1) as f64 * binomial(2 * r, r);
        -c * libm::pow(t * (1.0 - t), r as f64)
    }
}

/// Polynomial through `(nodes[i], values[i])` in the first barycentric
/// (modified Lagrange) form, which stays backward stable when extrapolating.
#[derive(Debug, Clone)]
pub struct LagrangeExtrapolant {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl LagrangeExtrapolant {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(domain(
                "Lagrange data needs matching, non-empty node and value lists",
            ));
        }
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, xj)| xi - xj)
                    .product();
                1.0 / prod
            })
            .collect::<Vec<f64>>();
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(domain("Lagrange nodes must be distinct"));
        }
        Ok(Self {
            nodes,
            values,
            weights,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut ell = 1.0;
        let mut acc = 0.0;
        for ((xi, yi), wi) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let d = x - xi;
            if d == 0.0 {
                return *yi;
            }
            ell *= d;
            acc += wi * yi / d;
        }
        ell * acc
    }

    /// Derivative of order `k` via the monomial-free product rule on the
    /// Lagrange basis; only used for small node counts.
    pub fn derivative(&self, k: u32, x: f64) -> f64 {
        if k == 0 {
            return self.eval(x);
        }
        let m = self.nodes.len();
        if k as usize >= m {
            return 0.0;
        }
        // Each basis polynomial is w_i Π_{j≠i} (x − x_j); differentiate the
        // product by summing over ordered choices of k removed factors.
        let mut total = 0.0;
        for i in 0..m {
            let others: Vec<f64> = (0..m)
                .filter(|&j| j != i)
                .map(|j| x - self.nodes[j])
                .collect();
            total += self.weights[i] * self.values[i] * product_derivative(&others, k);
        }
        total
    }
}

/// k-th derivative of `Π (x − a_j)` given the factors `d_j = x − a_j`.
fn product_derivative(factors: &[f64], k: u32) -> f64 {
    // Elementary symmetric polynomial of degree len−k in the factors, times k!.
    let len = factors.len();
    if k as usize > len {
        return 0.0;
    }
    let keep = len - k as usize;
    let mut e = alloc::vec![0.0; keep + 1];
    e[0] = 1.0;
    for &d in factors {
        for j in (1..=keep).rev() {
            e[j] += e[j - 1] * d;
        }
    }
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    e[keep] * fact
}

/// Which piece of `F_n` a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    LeftExtrapolant,
    LeftBlend,
    Identity,
    RightBlend,
    RightExtrapolant,
}

/// The endpoint-modified function `F_n` of `f`.
pub struct ModifiedFunction<F> {
    f: F,
    n: u64,
    r: u32,
    cutoff: Cutoff,
    left: LagrangeExtrapolant,
    right: LagrangeExtrapolant,
}

impl<F: SampledFunction> ModifiedFunction<F> {
    /// Requires `2r < n` and `n ≥ 5` so that the two modification zones are disjoint.
    pub fn new(f: F, n: u64, r: u32) -> Result<Self> {
        if r == 0 {
            return Err(domain("interpolation order r must be at least 1"));
        }
        if 2 * r as u64 >= n || n < 5 {
            return Err(domain(format!(
                "modification zones overlap: need 2r/n < 1 and n ≥ 5 (r = {r}, n = {n})"
            )));
        }
        let nf = n as f64;
        let left_nodes: Vec<f64> = (1..=r).map(|i| i as f64 / nf).collect();
        let right_nodes: Vec<f64> = (1..=r).map(|i| 1.0 - i as f64 / nf).collect();
        let left_values = left_nodes.iter().map(|&x| f.eval(x)).collect();
        let right_values = right_nodes.iter().map(|&x| f.eval(x)).collect();
        Ok(Self {
            left: LagrangeExtrapolant::new(left_nodes, left_values)?,
            right: LagrangeExtrapolant::new(right_nodes, right_values)?,
            cutoff: Cutoff::new(r),
            f,
            n,
            r,
        })
    }

    pub fn degree(&self) -> u64 {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.r
    }

    pub fn inner(&self) -> &F {
        &self.f
    }

    pub fn left_extrapolant(&self) -> &LagrangeExtrapolant {
        &self.left
    }

    pub fn right_extrapolant(&self) -> &LagrangeExtrapolant {
        &self.right
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn zone(&self, x: f64) -> Zone {
        let nf = self.n as f64;
        if x <= 1.0 / nf {
            Zone::LeftExtrapolant
        } else if x < 2.0 / nf {
            Zone::LeftBlend
        } else if x <= 1.0 - 2.0 / nf {
            Zone::Identity
        } else if x < 1.0 - 1.0 / nf {
            Zone::RightBlend
        } else {
            Zone::RightExtrapolant
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let nf = self.n as f64;
        match self.zone(x) {
            Zone::LeftExtrapolant => self.left.eval(x),
            Zone::LeftBlend => {
                let fx = self.f.eval(x);
                fx + self.cutoff.eval(nf * x - 1.0) * (self.left.eval(x) - fx)
            }
            Zone::Identity => self.f.eval(x),
            Zone::RightBlend => {
                let fx = self.f.eval(x);
                fx + self.cutoff.eval(nf * (1.0 - x) - 1.0) * (self.right.eval(x) - fx)
            }
            Zone::RightExtrapolant => self.right.eval(x),
        }
    }
}

impl<F: SampledFunction> SampledFunction for ModifiedFunction<F> {
    fn eval(&self, x: f64) -> f64 {
        self.value(x)
    }

    fn endpoint_limit(&self, end: Endpoint) -> Option<f64> {
        let v = self.value(end.abscissa());
        v.is_finite().then_some(v)
    }

    /// Exact on the extrapolant and identity zones; the blend zones need `f`'s
    /// derivatives and are left to the caller (finite differences).
    fn derivative(&self, order: u32, x: f64) -> Option<f64> {
        match self.zone(x) {
            Zone::LeftExtrapolant => Some(self.left.derivative(order, x)),
            Zone::RightExtrapolant => Some(self.right.derivative(order, x)),
            Zone::Identity => self.f.derivative(order, x),
            Zone::LeftBlend | Zone::RightBlend => None,
        }
    }
}

/// `F_n` for `f` with modification order `r`.
pub fn modified_function<F: SampledFunction>(f: F, n: u64, r: u32) -> Result<ModifiedFunction<F>> {
    ModifiedFunction::new(f, n, r)
}

/// `r`-th order extrapolant through `f(1/n), …, f(r/n)` evaluated at `x`.
pub fn lagrange_left<F: SampledFunction + ?Sized>(f: &F, n: u64, r: u32, x: f64) -> Result<f64> {
    if r == 0 || r as u64 >= n {
        return Err(domain("left nodes i/n, i = 1..=r, must lie in (0, 1)"));
    }
    let nodes: Vec<f64> = (1..=r).map(|i| i as f64 / n as f64).collect();
    let values = nodes.iter().map(|&t| f.eval(t)).collect();
    Ok(LagrangeExtrapolant::new(nodes, values)?.eval(x))
}

/// Mirror of [`lagrange_left`] through `f(1 − i/n)`.
pub fn lagrange_right<F: SampledFunction + ?Sized>(f: &F, n: u64, r: u32, x: f64) -> Result<f64> {
    if r == 0 || r as u64 >= n {
        return Err(domain("right nodes 1 − i/n, i = 1..=r, must lie in (0, 1)"));
    }
    let nodes: Vec<f64> = (1..=r).map(|i| 1.0 - i as f64 / n as f64).collect();
    let values = nodes.iter().map(|&t| f.eval(t)).collect();
    Ok(LagrangeExtrapolant::new(nodes, values)?.eval(x))
}

/// `B*_{n,m}` bound to `f`: one shared `F_n` (built from the base degree) and
/// the cached node tables of every term.
pub struct ModifiedCombination<F> {
    modified: ModifiedFunction<F>,
    operator: CombinedOperator,
}

impl<F: SampledFunction> ModifiedCombination<F> {
    pub fn new(scheme: &CombinationScheme, f: F, r: u32) -> Result<Self> {
        let modified = ModifiedFunction::new(f, scheme.base_degree(), r)?;
        let operator = scheme.operator(&modified)?;
        Ok(Self { modified, operator })
    }

    pub fn modified(&self) -> &ModifiedFunction<F> {
        &self.modified
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        self.operator.apply(x)
    }

    pub fn derivative(&self, order: u32, x: f64) -> Result<f64> {
        self.operator.derivative(order, x)
    }
}

/// `B*_{n,m}(f, x) = B_{n,m}(F_n, x)` with modification order `r`.
pub fn bstar_apply<F: SampledFunction>(
    scheme: &CombinationScheme,
    f: F,
    r: u32,
    x: f64,
) -> Result<f64> {
    ModifiedCombination::new(scheme, f, r)?.apply(x)
}

/// `B*_{n,m}^{(r_deriv)}(f, x)` with modification order `r_mod`.
pub fn bstar_derivative<F: SampledFunction>(
    scheme: &CombinationScheme,
    f: F,
    r_mod: u32,
    r_deriv: u32,
    x: f64,
) -> Result<f64> {
    ModifiedCombination::new(scheme, f, r_mod)?.derivative(r_deriv, x)
}
