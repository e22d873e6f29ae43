//! Sweep reports: sections, series, JSON and flat CSV.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use bsingular_core::{fit_rate, RateFit};
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Outcome of one assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Both sides vanish to rounding level, or the hypothesis range is left;
    /// nothing to test.
    Saturated,
    /// The check does not apply (e.g. `f ∉ W_φ^r`).
    Skipped,
}

impl Status {
    pub fn ok(self) -> bool {
        self != Status::Fail
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Saturated => "saturated",
            Status::Skipped => "skipped",
        }
    }
}

/// A labelled `(x, y)` series with the log-log fit over its positive pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    /// What `x` measures (`n`, `t`, `arg`, …).
    pub x_name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub fit: Option<RateFit>,
}

impl Series {
    pub fn new(label: impl Into<String>, x_name: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        let fit = fit_rate(&positive_pairs(&x, &y)).ok();
        Self {
            label: label.into(),
            x_name: x_name.to_string(),
            x,
            y,
            fit,
        }
    }
}

/// The pairs with positive, finite coordinates; what fits and plots use.
pub fn positive_pairs(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    x.iter()
        .zip(y)
        .filter(|&(&a, &b)| a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect()
}

/// One checked statement for one function and scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub criterion: String,
    pub function: String,
    pub scheme: String,
    pub status: Status,
    /// Largest observed ratio (the empirical constant of a boundedness claim).
    pub empirical_constant: Option<f64>,
    pub note: String,
    pub series: Vec<Series>,
}

impl Section {
    pub fn new(criterion: &str, function: &str, scheme: &str) -> Self {
        Self {
            criterion: criterion.to_string(),
            function: function.to_string(),
            scheme: scheme.to_string(),
            status: Status::Skipped,
            empirical_constant: None,
            note: String::new(),
            series: Vec::new(),
        }
    }

    pub fn with_status(mut self, status: Status, note: impl Into<String>) -> Self {
        self.status = status;
        self.note = note.into();
        self
    }
}

/// Pointwise weighted errors `w|f − B*f|` on the harness grid for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub function: String,
    pub scheme: String,
    pub n: u64,
    pub x: Vec<f64>,
    pub error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub sections: Vec<Section>,
    pub error_tables: Vec<ErrorTable>,
    pub all_passed: bool,
}

impl SweepReport {
    pub fn new(config: SweepConfig, sections: Vec<Section>, error_tables: Vec<ErrorTable>) -> Self {
        let all_passed = sections.iter().all(|s| s.status.ok());
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            sections,
            error_tables,
            all_passed,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Section> {
        self.sections.iter().filter(|s| s.status == Status::Fail)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        std::fs::write(path, text).with_context(|| format!("writing report {}", path.display()))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading report {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
    }

    /// Flat table with one row per (function, scheme, criterion, series, point).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "function",
            "scheme",
            "criterion",
            "series",
            "x_name",
            "x",
            "value",
            "status",
        ])?;
        for s in &self.sections {
            for series in &s.series {
                for (x, y) in series.x.iter().zip(&series.y) {
                    w.write_record([
                        s.function.as_str(),
                        s.scheme.as_str(),
                        s.criterion.as_str(),
                        series.label.as_str(),
                        series.x_name.as_str(),
                        &fmt17(*x),
                        &fmt17(*y),
                        s.status.as_str(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal that round-trips (never more than 17 significant digits).
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
