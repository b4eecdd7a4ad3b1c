//! Solution CSV files and the JSON run report.

use std::path::Path;

use serde::Serialize;

use crate::conditions::{Classification, LairReport, RemarkReport};
use crate::config::RunConfig;
use crate::quadrature::{DivergenceVerdict, RadialGrid};
use crate::solver::{CentralValues, IterationRecord, SolutionBundle};
use crate::verify::{BoundReport, VerificationReport};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("solution does not match the configured grid: {0}")]
    GridMismatch(String),
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// Columns `r, u_1..u_d, lb_1..lb_d, ub`; `ub` is empty where undefined.
pub fn write_solution_csv(path: &Path, bundle: &SolutionBundle, bounds: &BoundReport) -> Result<(), ReportError> {
    let err = |source| ReportError::Csv {
        path: path.display().to_string(),
        source,
    };
    let d = bundle.u.len();
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let mut header = vec!["r".to_string()];
    header.extend((1..=d).map(|j| format!("u_{j}")));
    header.extend((1..=d).map(|j| format!("lb_{j}")));
    header.push("ub".into());
    w.write_record(&header).map_err(err)?;
    for (i, &r) in bundle.grid.nodes().iter().enumerate() {
        let mut row = Vec::with_capacity(2 * d + 2);
        row.push(fmt(r));
        row.extend(bundle.u.iter().map(|u| fmt(u.values()[i])));
        row.extend(bounds.lower.iter().map(|lb| fmt(lb[i])));
        row.push(bounds.upper.as_ref().map_or(String::new(), |ub| fmt(ub[i])));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Solution columns of a CSV written by [`write_solution_csv`], checked
/// against `grid` and the component count.
pub fn read_solution_csv(path: &Path, grid: &RadialGrid, d: usize) -> Result<Vec<Vec<f64>>, ReportError> {
    let name = path.display().to_string();
    let err = |source| ReportError::Csv {
        path: name.clone(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(err)?;
    let header = reader.headers().map_err(err)?.clone();
    let expected: Vec<String> = std::iter::once("r".to_string())
        .chain((1..=d).map(|j| format!("u_{j}")))
        .collect();
    if header.len() < d + 1 || header.iter().take(d + 1).ne(expected.iter().map(String::as_str)) {
        return Err(ReportError::GridMismatch(format!(
            "expected leading columns {expected:?}, got {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut u = vec![Vec::with_capacity(grid.len()); d];
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(err)?;
        let value = |k: usize| -> Result<f64, ReportError> {
            record.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| ReportError::Format {
                path: name.clone(),
                message: format!("row {}: column {} is not a number", i + 1, k + 1),
            })
        };
        if i >= grid.len() {
            return Err(ReportError::GridMismatch(format!("more than {} rows", grid.len())));
        }
        let r = value(0)?;
        let node = grid.nodes()[i];
        if (r - node).abs() > 1e-12 * node.max(1.0) {
            return Err(ReportError::GridMismatch(format!("row {}: r = {r:?}, grid node {node:?}", i + 1)));
        }
        for (j, col) in u.iter_mut().enumerate() {
            col.push(value(j + 1)?);
        }
        rows += 1;
    }
    if rows != grid.len() {
        return Err(ReportError::GridMismatch(format!("{rows} rows for {} grid nodes", grid.len())));
    }
    Ok(u)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub beta: CentralValues,
    pub csv: Option<String>,
    pub converged: bool,
    pub iterations: usize,
    pub final_update: f64,
    pub l_estimate: f64,
    pub monotone_violations: usize,
    pub radially_monotone: bool,
    pub u_at_horizon: Vec<f64>,
    pub verification: Option<VerificationReport>,
    /// Why the run produced no solution.
    pub error: Option<String>,
}

impl SolveSummary {
    pub fn from_bundle(bundle: &SolutionBundle, csv: Option<String>, verification: Option<VerificationReport>) -> Self {
        Self {
            beta: bundle.beta.clone(),
            csv,
            converged: bundle.converged,
            iterations: bundle.iterations,
            final_update: bundle.final_update,
            l_estimate: bundle.l_estimate,
            monotone_violations: bundle.monotone_violations(),
            radially_monotone: bundle.radially_monotone(),
            u_at_horizon: bundle.u.iter().map(|u| u.last()).collect(),
            verification,
            error: None,
        }
    }

    pub fn failed(beta: CentralValues, error: String) -> Self {
        Self {
            beta,
            csv: None,
            converged: false,
            iterations: 0,
            final_update: f64::NAN,
            l_estimate: f64::NAN,
            monotone_violations: 0,
            radially_monotone: false,
            u_at_horizon: Vec::new(),
            verification: None,
            error: Some(error),
        }
    }

    pub fn verified(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.passed)
    }
}

/// Per-iteration trace kept out of the main summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct History {
    pub beta: CentralValues,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentChecks {
    pub component: usize,
    pub keller_osserman: DivergenceVerdict,
    pub ye_zhou: DivergenceVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Auxiliary {
    /// Applied to each diagonal nonlinearity `f_j(t, ..., t)`.
    pub literature: Vec<ComponentChecks>,
    pub remarks: RemarkReport,
    pub lair: Option<LairReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub lower: usize,
    pub upper: usize,
    /// `min_{j,r} (u_upper - u_lower)`.
    pub min_gap: f64,
    pub max_gap: f64,
    /// `None` when the central values are not comparable componentwise.
    pub ordered: Option<bool>,
    pub distinct: bool,
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub pairs: Vec<PairComparison>,
    pub consistent: bool,
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Status {
    pub exit_code: i32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: Tool,
    pub command: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auxiliary: Option<Auxiliary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    pub status: Status,
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::problem::ProblemSpec;
    use crate::solver::{iterate, SolverOptions};
    use crate::verify::BoundReport;

    fn bundle() -> SolutionBundle {
        let spec = ProblemSpec::from_text(3, &[2.0], &["0"], &["1"], &["u1"], 1.0).unwrap();
        let grid = Arc::new(RadialGrid::new(1.0, 10).unwrap());
        iterate(&spec, &grid, &CentralValues::equal(1.0, 1).unwrap(), &SolverOptions::default()).unwrap()
    }

    fn bounds(b: &SolutionBundle, upper: bool) -> BoundReport {
        BoundReport {
            lower_margin: vec![0.0],
            lower: vec![vec![1.0; b.grid.len()]],
            upper_margin: None,
            upper: upper.then(|| vec![0.1; b.grid.len()]),
            upper_note: None,
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let b = bundle();
        write_solution_csv(&path, &b, &bounds(&b, false)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("r,u_1,lb_1,ub\n0.0,1.0,1.0,\n"));
        let u = read_solution_csv(&path, &b.grid, 1).unwrap();
        assert_eq!(u, b.values());

        write_solution_csv(&path, &b, &bounds(&b, true)).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().lines().nth(1).unwrap().ends_with(",0.1"));
    }

    #[test]
    fn csv_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let b = bundle();
        write_solution_csv(&path, &b, &bounds(&b, false)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        std::fs::write(&path, truncated).unwrap();
        assert!(matches!(read_solution_csv(&path, &b.grid, 1), Err(ReportError::GridMismatch(_))));
        let other = RadialGrid::new(2.0, 10).unwrap();
        std::fs::write(&path, text).unwrap();
        assert!(matches!(read_solution_csv(&path, &other, 1), Err(ReportError::GridMismatch(_))));
        assert!(matches!(read_solution_csv(&path, &b.grid, 2), Err(ReportError::GridMismatch(_))));
    }
}
