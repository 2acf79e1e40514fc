//! Checkpoint reports and their CSV form.

use std::fmt::{self, Write as _};

use thiserror::Error;

/// Column order of a single-run report.
pub const COLUMNS: [&str; 9] = [
    "label",
    "updates",
    "l1_error",
    "max_rel_dev",
    "worst_vertex",
    "regenerations",
    "max_edge_load",
    "push_work",
    "elapsed_ms",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("report header must be `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("trial reports disagree on checkpoint {0}")]
    Mismatch(usize),
    #[error("no reports to aggregate")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Row {
    pub label: String,
    /// Updates applied before this checkpoint.
    pub updates: usize,
    pub l1_error: f64,
    pub max_rel_dev: f64,
    pub worst_vertex: usize,
    /// Cumulative walk regenerations.
    pub regenerations: u64,
    /// Largest number of walks ever sharing one edge.
    pub max_edge_load: u32,
    /// Cumulative push work, `Σ deg(u)` over pushes.
    pub push_work: u64,
    /// Wall time spent applying updates so far.
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(COLUMNS).expect("in-memory write");
        }
        for row in &self.rows {
            w.serialize(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != COLUMNS {
            return Err(ReportError::Header { expected: COLUMNS.join(","), found: header.join(",") });
        }
        let rows = r.deserialize().collect::<Result<Vec<Row>, _>>()?;
        Ok(Report { rows })
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
}

impl Spread {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        if xs.is_empty() {
            return Spread::default();
        }
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
        Spread { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub label: String,
    pub updates: usize,
    pub trials: usize,
    pub l1_error: Spread,
    pub max_rel_dev: Spread,
    /// Vertex of the single worst relative deviation across trials.
    pub worst_vertex: usize,
    pub regenerations: Spread,
    pub max_edge_load: Spread,
    pub push_work: Spread,
    pub elapsed_ms: Spread,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    pub fn from_trials(reports: &[Report]) -> Result<Self, ReportError> {
        let first = reports.first().ok_or(ReportError::Empty)?;
        let mut rows = Vec::with_capacity(first.rows.len());
        for (i, head) in first.rows.iter().enumerate() {
            let mut same = Vec::with_capacity(reports.len());
            for rep in reports {
                match rep.rows.get(i) {
                    Some(r) if r.label == head.label && r.updates == head.updates => same.push(r),
                    _ => return Err(ReportError::Mismatch(i)),
                }
            }
            let spread = |f: fn(&Row) -> f64| Spread::of(same.iter().map(|r| f(r)));
            let worst = same
                .iter()
                .max_by(|a, b| a.max_rel_dev.total_cmp(&b.max_rel_dev))
                .expect("at least one trial");
            rows.push(AggregateRow {
                label: head.label.clone(),
                updates: head.updates,
                trials: reports.len(),
                l1_error: spread(|r| r.l1_error),
                max_rel_dev: spread(|r| r.max_rel_dev),
                worst_vertex: worst.worst_vertex,
                regenerations: spread(|r| r.regenerations as f64),
                max_edge_load: spread(|r| f64::from(r.max_edge_load)),
                push_work: spread(|r| r.push_work as f64),
                elapsed_ms: spread(|r| r.elapsed_ms),
            });
        }
        Ok(AggregateReport { rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,updates,trials");
        for m in ["l1_error", "max_rel_dev"] {
            let _ = write!(out, ",{m}_mean,{m}_std");
        }
        out.push_str(",worst_vertex");
        for m in ["regenerations", "max_edge_load", "push_work", "elapsed_ms"] {
            let _ = write!(out, ",{m}_mean,{m}_std");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        out
    }
}

impl fmt::Display for AggregateRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            self.label,
            self.updates,
            self.trials,
            self.l1_error.mean,
            self.l1_error.std,
            self.max_rel_dev.mean,
            self.max_rel_dev.std,
            self.worst_vertex
        )?;
        for s in [self.regenerations, self.max_edge_load, self.push_work, self.elapsed_ms] {
            write!(f, ",{},{}", s.mean, s.std)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(label: &str, err: f64) -> Row {
        Row {
            label: label.into(),
            updates: 3,
            l1_error: err,
            max_rel_dev: err * 2.0,
            worst_vertex: 1,
            regenerations: 4,
            max_edge_load: 2,
            push_work: 0,
            elapsed_ms: 0.0,
        }
    }

    #[test]
    fn csv_round_trip_keeps_column_order() {
        let rep = Report { rows: vec![row("a", 0.125), row("b", 1e-7)] };
        let text = rep.to_csv();
        assert!(text.starts_with(&COLUMNS.join(",")));
        assert_eq!(Report::from_csv(&text).unwrap(), rep);
        assert_eq!(Report::default().to_csv().trim_end(), COLUMNS.join(","));
        assert!(Report::from_csv("label,updates\nx,1\n").is_err());
    }

    #[test]
    fn aggregates_mean_and_std() {
        let reps = [Report { rows: vec![row("a", 1.0)] }, Report { rows: vec![row("a", 3.0)] }];
        let agg = AggregateReport::from_trials(&reps).unwrap();
        assert_eq!(agg.rows[0].l1_error, Spread { mean: 2.0, std: 1.0 });
        assert_eq!(agg.rows[0].trials, 2);
        let csv = agg.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), csv.lines().nth(1).unwrap().split(',').count());
        let bad = [Report { rows: vec![row("a", 1.0)] }, Report { rows: vec![row("b", 1.0)] }];
        assert!(AggregateReport::from_trials(&bad).is_err());
    }
}
