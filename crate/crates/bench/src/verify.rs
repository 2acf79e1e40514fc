//! Pass/fail checks over a finished report.

use std::fmt;

use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `l1_error <= bound` at every checkpoint.
    MaxL1(f64),
    /// `max_rel_dev <= alpha` at every checkpoint.
    MaxRelative(f64),
}

impl Tolerance {
    /// The additive-mode error bound `5α/(1−ε)`.
    pub fn additive(alpha: f64, eps: f64) -> Self {
        Tolerance::MaxL1(5.0 * alpha / (1.0 - eps))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub criterion: String,
    pub passed: bool,
    /// Worst value over all checkpoints.
    pub measured: f64,
    pub limit: f64,
    /// Checkpoint where the worst value occurred.
    pub label: Option<String>,
    pub vertex: Option<usize>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: worst {:.6e} (limit {:.6e})", self.criterion, self.measured, self.limit)?;
        if let Some(label) = &self.label {
            write!(f, " at checkpoint {label}")?;
        }
        if let Some(v) = self.vertex {
            write!(f, ", vertex {v}")?;
        }
        Ok(())
    }
}

/// One verdict per tolerance, judged on the worst checkpoint.
pub fn verify_at_checkpoints(report: &Report, tolerances: &[Tolerance]) -> Vec<Verdict> {
    tolerances
        .iter()
        .map(|tol| {
            let (name, limit, pick): (&str, f64, fn(&crate::report::Row) -> f64) = match *tol {
                Tolerance::MaxL1(b) => ("l1_error", b, |r| r.l1_error),
                Tolerance::MaxRelative(a) => ("max_rel_dev", a, |r| r.max_rel_dev),
            };
            let worst = report.rows.iter().max_by(|a, b| pick(a).total_cmp(&pick(b)));
            let measured = worst.map_or(0.0, pick);
            let vertex = match tol {
                Tolerance::MaxRelative(_) => worst.map(|r| r.worst_vertex),
                Tolerance::MaxL1(_) => None,
            };
            Verdict {
                criterion: format!("{name} <= {limit}"),
                passed: measured <= limit,
                measured,
                limit,
                label: worst.map(|r| r.label.clone()),
                vertex,
            }
        })
        .collect()
}
