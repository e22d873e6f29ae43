//! Sweep configuration and its validation.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bsingular_core::{JacobiWeight, Ladder, Resolution, StepWeight};
use serde::{Deserialize, Serialize};

use crate::corpus::{corpus_member, default_corpus, Singularities, TestFunction};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// A function to sweep: a corpus name, or an expression with an optional
/// descriptor and smoothness order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularities: Option<Singularities>,
    /// Known order of `ω_φ^r(f, t)_w`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
}

impl FunctionSpec {
    pub fn corpus(name: &str) -> Self {
        Self {
            name: name.to_string(),
            expr: None,
            singularities: None,
            alpha0: None,
        }
    }
}

/// `"varphi"` or explicit exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepWeightSpec {
    Named(NamedStepWeight),
    Exponents { beta0: f64, beta1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedStepWeight {
    Varphi,
}

impl StepWeightSpec {
    pub fn resolve(&self) -> bsingular_core::Result<StepWeight> {
        match *self {
            StepWeightSpec::Named(NamedStepWeight::Varphi) => Ok(StepWeight::varphi()),
            StepWeightSpec::Exponents { beta0, beta1 } => StepWeight::new(beta0, beta1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub m: usize,
    #[serde(default = "geometric")]
    pub ladder: Ladder,
}

fn geometric() -> Ladder {
    Ladder::Geometric
}

impl SchemeSpec {
    pub fn label(&self) -> String {
        let ladder = match &self.ladder {
            Ladder::Geometric => "geometric".to_string(),
            Ladder::Arithmetic => "arithmetic".to_string(),
            Ladder::Explicit(d) => format!("explicit{d:?}"),
        };
        format!("m={},{ladder}", self.m)
    }
}

/// Harness `x`-grid: `{i/uniform} ∪ {2^{−j}, 1 − 2^{−j} : j ≤ depth}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub uniform: usize,
    pub depth: i32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            uniform: 500,
            depth: 40,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = (0..=self.uniform)
            .map(|i| i as f64 / self.uniform as f64)
            .collect();
        for j in 1..=self.depth {
            let d = 2f64.powi(-j);
            xs.push(d);
            xs.push(1.0 - d);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Lemma1,
    Lemma2,
    Lemma6,
    /// Also records the Lemma 7 ratio.
    Theorem1,
    Lemma5,
    /// Also records the Lemma 3 and Lemma 4 ratios.
    Theorem2,
    Direct,
    Inverse,
    Corollary,
    CrossCheck,
    Modulus,
    KFunctional,
    FitCalibration,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::Lemma1,
        Check::Lemma2,
        Check::Lemma6,
        Check::Theorem1,
        Check::Lemma5,
        Check::Theorem2,
        Check::Direct,
        Check::Inverse,
        Check::Corollary,
        Check::CrossCheck,
        Check::Modulus,
        Check::KFunctional,
        Check::FitCalibration,
    ];

    /// Checks whose statements assume `min{β(0), β(1)} ≥ 1/2`.
    pub fn needs_theorem_mode(self) -> bool {
        matches!(
            self,
            Check::Lemma6 | Check::Theorem1 | Check::Theorem2 | Check::Direct | Check::Inverse
        )
    }

    /// Checks whose statements assume `α, β > 0`.
    pub fn needs_positive_weight(self) -> bool {
        matches!(
            self,
            Check::Theorem1
                | Check::Theorem2
                | Check::Lemma5
                | Check::Direct
                | Check::Inverse
                | Check::Corollary
        )
    }

    /// Checks that run per function.
    pub fn per_function(self) -> bool {
        !matches!(
            self,
            Check::Lemma1
                | Check::Lemma2
                | Check::Lemma6
                | Check::CrossCheck
                | Check::FitCalibration
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub schema_version: u32,
    /// Empty means the default corpus for `weight`.
    pub functions: Vec<FunctionSpec>,
    pub weight: JacobiWeight,
    pub step_weight: StepWeightSpec,
    pub r: u32,
    pub schemes: Vec<SchemeSpec>,
    pub n_list: Vec<u64>,
    pub inverse_n_list: Vec<u64>,
    pub lemma_n_list: Vec<u64>,
    pub t_list: Vec<f64>,
    pub grid: GridSpec,
    pub resolution: Resolution,
    pub checks: Vec<Check>,
    /// Exponent of `varphi^λ` in the corollary check.
    pub lambda: f64,
    pub gammas: Vec<f64>,
    pub uv: Vec<(f64, f64)>,
    pub lemma6_orders: Vec<u32>,
    pub seed: u64,
    /// Worker threads; not part of the echoed configuration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub error_tables: bool,
    pub output: OutputSpec,
}

fn geometric_list(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect()
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            functions: Vec::new(),
            weight: JacobiWeight {
                alpha: 0.5,
                beta: 0.5,
            },
            step_weight: StepWeightSpec::Named(NamedStepWeight::Varphi),
            r: 2,
            schemes: vec![
                SchemeSpec {
                    m: 1,
                    ladder: Ladder::Geometric,
                },
                SchemeSpec {
                    m: 2,
                    ladder: Ladder::Geometric,
                },
            ],
            n_list: powers_of_two(5, 9),
            inverse_n_list: powers_of_two(8, 14),
            lemma_n_list: powers_of_two(4, 10),
            t_list: geometric_list(1e-3, 1e-1, 9),
            grid: GridSpec::default(),
            resolution: Resolution::default(),
            checks: Check::ALL.to_vec(),
            lambda: 0.5,
            gammas: vec![1.0, 2.0, 3.0],
            uv: vec![(0.5, 0.0), (0.5, 0.5), (1.0, 1.0)],
            lemma6_orders: vec![1, 2],
            seed: 0x5eed,
            threads: None,
            error_tables: true,
            output: OutputSpec::default(),
        }
    }
}

/// Every hypothesis violation found in a configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid sweep configuration:\n  - {}", .0.join("\n  - "))]
pub struct ConfigError(pub Vec<String>);

/// A configured function, resolved.
#[derive(Debug, Clone)]
pub struct Subject {
    pub function: TestFunction,
    /// Declared order, from the config or the descriptor.
    pub alpha0: Option<f64>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn has(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }

    /// The configuration as echoed in reports (thread count removed).
    pub fn echo(&self) -> Self {
        Self {
            threads: None,
            ..self.clone()
        }
    }

    /// Resolves the function list without validating it.
    pub fn resolve_functions(&self) -> std::result::Result<Vec<Subject>, Vec<String>> {
        let step = self.step_weight.resolve().ok();
        let declared_order = |f: &TestFunction| match step {
            Some(s) if s.is_varphi() => f.expected_alpha0(&self.weight, self.r),
            _ => None,
        };
        if self.functions.is_empty() {
            return Ok(default_corpus(&self.weight)
                .into_iter()
                .map(|f| Subject {
                    alpha0: declared_order(&f),
                    function: f,
                })
                .collect());
        }
        let mut out = Vec::new();
        let mut errors = Vec::new();
        for spec in &self.functions {
            let function = match (&spec.expr, &spec.singularities) {
                (None, _) => corpus_member(&spec.name).ok_or_else(|| {
                    format!("unknown corpus function '{}' (give an expr)", spec.name)
                }),
                (Some(src), None) => TestFunction::from_expr(&spec.name, src)
                    .map_err(|e| format!("{}: {e}", spec.name)),
                (Some(src), Some(s)) => TestFunction::declared(&spec.name, src, s.clone())
                    .map_err(|e| format!("{}: {e}", spec.name)),
            };
            match function {
                Ok(f) => out.push(Subject {
                    alpha0: spec.alpha0.or_else(|| declared_order(&f)),
                    function: f,
                }),
                Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            Ok(out)
        } else {
            Err(errors)
        }
    }

    /// Checks every hypothesis that can be checked before a sweep and
    /// returns the resolved functions.
    pub fn validate(&self) -> std::result::Result<Vec<Subject>, ConfigError> {
        let mut errors = Vec::new();
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            errors.push(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if let Err(e) = self.weight.validate() {
            errors.push(format!("Jacobi weight: {e}"));
        }
        let step = match self.step_weight.resolve() {
            Ok(s) => Some(s),
            Err(e) => {
                errors.push(format!("step-weight: {e}"));
                None
            }
        };
        if self.r == 0 {
            errors.push("order r must be at least 1".into());
        }
        if let Some(step) = step {
            let gated: Vec<String> = self
                .checks
                .iter()
                .filter(|c| c.needs_theorem_mode())
                .map(|c| format!("{c:?}"))
                .collect();
            if !gated.is_empty() {
                if let Err(e) = step.require_theorem_mode() {
                    errors.push(format!("{e} (required by {})", gated.join(", ")));
                }
            }
        }
        if !(self.weight.alpha > 0.0 && self.weight.beta > 0.0) {
            let gated: Vec<String> = self
                .checks
                .iter()
                .filter(|c| c.needs_positive_weight())
                .map(|c| format!("{c:?}"))
                .collect();
            if !gated.is_empty() {
                errors.push(format!(
                    "hypothesis α, β > 0 violated (α = {}, β = {}; required by {})",
                    self.weight.alpha,
                    self.weight.beta,
                    gated.join(", ")
                ));
            }
        }
        for (name, list) in [
            ("n_list", &self.n_list),
            ("inverse_n_list", &self.inverse_n_list),
        ] {
            if list.is_empty() {
                errors.push(format!("{name} is empty"));
            } else if let Some(&n0) = list.iter().min() {
                if 2 * self.r as u64 >= n0 || n0 < 5 {
                    errors.push(format!(
                        "{name}: hypothesis 2r/n₀ < 1 (and n₀ ≥ 5) violated (r = {}, n₀ = {n0})",
                        self.r
                    ));
                }
            }
        }
        if self.lemma_n_list.iter().any(|&n| n < 2) {
            errors.push("lemma_n_list entries must be at least 2".into());
        }
        if self.t_list.len() < 4 || self.t_list.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            errors.push("t_list needs at least 4 values in (0, 1)".into());
        }
        if self.t_list.windows(2).any(|p| p[0] >= p[1]) {
            errors.push("t_list must be strictly increasing".into());
        }
        if self.schemes.is_empty() {
            errors.push("schemes is empty".into());
        }
        for s in &self.schemes {
            if s.m == 0 {
                errors.push(format!("scheme {}: m must be at least 1", s.label()));
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            errors.push(format!("λ must lie in [0, 1] (got {})", self.lambda));
        }
        if self.uv.iter().any(|&(u, v)| !(u >= 0.0 && v >= 0.0)) {
            errors.push("Lemma 1 exponents must satisfy u, v ≥ 0".into());
        }
        if self.lemma6_orders.iter().any(|&r| r == 0) {
            errors.push("lemma6_orders entries must be at least 1".into());
        }
        if self.grid.uniform < 2 {
            errors.push("grid.uniform must be at least 2".into());
        }
        if self.threads == Some(0) {
            errors.push("threads must be at least 1".into());
        }
        let subjects = match self.resolve_functions() {
            Ok(s) => s,
            Err(e) => {
                errors.extend(e);
                Vec::new()
            }
        };
        for s in &subjects {
            if let Some(a0) = self
                .functions
                .iter()
                .find(|f| f.name == s.function.name())
                .and_then(|f| f.alpha0)
            {
                if !(a0 > 0.0 && a0 < self.r as f64) {
                    errors.push(format!(
                        "{}: declared α₀ = {a0} outside (0, r) = (0, {})",
                        s.function.name(),
                        self.r
                    ));
                }
            }
            if self.weight.validate().is_ok() {
                if let Err(e) = s.function.check_cw(&self.weight) {
                    errors.push(format!("C_w membership: {e}"));
                }
            }
        }
        if errors.is_empty() {
            Ok(subjects)
        } else {
            Err(ConfigError(errors))
        }
    }
}
