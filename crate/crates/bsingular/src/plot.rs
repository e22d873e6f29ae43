//! Plot-ready TSV files from a sweep report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::report::{fmt17, positive_pairs, Section, SweepReport};

/// File-name safe form of a function name.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

/// Series label in a plot file; the scheme is prefixed when there is one.
pub fn series_label(section: &Section, label: &str) -> String {
    if section.scheme == "-" {
        label.to_string()
    } else {
        format!("{}/{label}", section.scheme)
    }
}

fn render(function: &str, criterion: &str, sections: &[&Section]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# function: {function}");
    let _ = writeln!(out, "# criterion: {criterion}");
    let _ = writeln!(
        out,
        "# columns: series, x, y, log_x = ln(x), log_y = ln(y); tab separated"
    );
    for s in sections {
        for series in &s.series {
            let kept = positive_pairs(&series.x, &series.y).len();
            let dropped = series.x.len().min(series.y.len()) - kept;
            let fit = match &series.fit {
                Some(f) => format!(
                    "exponent {}, residual {}, samples {}",
                    fmt17(f.exponent),
                    fmt17(f.residual),
                    f.samples
                ),
                None => "no fit".to_string(),
            };
            let _ = writeln!(
                out,
                "# series {}: x = {}, status {}; {fit}; dropped {dropped} non-positive point(s)",
                series_label(s, &series.label),
                series.x_name,
                s.status.as_str()
            );
        }
    }
    let _ = writeln!(out, "series\tx\ty\tlog_x\tlog_y");
    for s in sections {
        for series in &s.series {
            let label = series_label(s, &series.label);
            for (x, y) in positive_pairs(&series.x, &series.y) {
                let _ = writeln!(
                    out,
                    "{label}\t{}\t{}\t{}\t{}",
                    fmt17(x),
                    fmt17(y),
                    fmt17(x.ln()),
                    fmt17(y.ln())
                );
            }
        }
    }
    out
}

/// Writes one TSV per (function, criterion) into `dir` and returns the paths
/// in report order.
pub fn write_plotdata(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut groups: Vec<((String, String), Vec<&Section>)> = Vec::new();
    for s in &report.sections {
        if s.series.is_empty() {
            continue;
        }
        let key = (s.function.clone(), s.criterion.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(s),
            None => groups.push((key, vec![s])),
        }
    }
    let mut paths = Vec::with_capacity(groups.len());
    for ((function, criterion), sections) in groups {
        let path = dir.join(format!("{}__{}.tsv", slug(&function), slug(&criterion)));
        std::fs::write(&path, render(&function, &criterion, &sections))
            .with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
    }
    Ok(paths)
}
