//! The JSON run document: `problem`, `grid`, `solver`, `probes`, `beta`,
//! `output`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exprlang::{parse, Role};
use crate::problem::{Component, ProblemSpec};
use crate::quadrature::{ProbeConfig, RadialGrid};
use crate::solver::{CentralValues, SolverOptions};
use crate::transforms::FTableConfig;
use crate::verify::VerifyOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub p: Vec<f64>,
    /// Defaults to `"0"` for every component.
    #[serde(default)]
    pub h: Vec<String>,
    pub a: Vec<String>,
    pub f: Vec<String>,
    #[serde(default = "default_anchor")]
    pub anchor: f64,
}

fn default_anchor() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "R")]
    pub horizon: f64,
    #[serde(rename = "M", default = "default_intervals")]
    pub intervals: usize,
    #[serde(default)]
    pub f_table: FTableConfig,
}

fn default_intervals() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub strict_monotone: bool,
    pub verify: VerifyOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverOptions::default();
        Self {
            tol: s.tol,
            max_iter: s.max_iter,
            strict_monotone: s.strict_monotone,
            verify: VerifyOptions::default(),
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            strict_monotone: self.strict_monotone,
        }
    }
}

/// A number is one equal central value; a list of numbers is several equal
/// central values; a list of lists gives full vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Scalar(f64),
    Scalars(Vec<f64>),
    Vectors(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub probes: ProbeConfig,
    pub beta: BetaSpec,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated config with everything the commands need.
#[derive(Debug, Clone)]
pub struct Run {
    /// Normalized echo: `d` and `h` filled in.
    pub config: RunConfig,
    pub spec: ProblemSpec,
    pub grid: Arc<RadialGrid>,
    pub betas: Vec<CentralValues>,
}

impl Run {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(if path == "." { "config".into() } else { path }, e.into_inner().to_string())
        })?;
        Self::from_config(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_config(mut config: RunConfig) -> Result<Self, ConfigError> {
        let spec = build_spec(&mut config.problem)?;
        let d = spec.components();
        check_grid(&config.grid)?;
        check_solver(&config.solver)?;
        check_probes(&config.probes)?;
        let betas = central_values(&config.beta, d)?;
        let grid = Arc::new(
            RadialGrid::new(config.grid.horizon, config.grid.intervals).map_err(|e| invalid("grid", e.to_string()))?,
        );
        Ok(Self {
            config,
            spec,
            grid,
            betas,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.config).expect("config serializes")
    }
}

fn build_spec(p: &mut ProblemConfig) -> Result<ProblemSpec, ConfigError> {
    if p.dimension < 3 {
        return Err(invalid("problem.N", format!("N ≥ 3 required, got {}", p.dimension)));
    }
    let d = p.p.len();
    if d == 0 {
        return Err(invalid("problem.p", "at least one component is required"));
    }
    if let Some(given) = p.d {
        if given != d {
            return Err(invalid("problem.d", format!("d = {given} but p has {d} entries")));
        }
    }
    p.d = Some(d);
    if p.h.is_empty() {
        p.h = vec!["0".into(); d];
    }
    for (name, list) in [("h", &p.h), ("a", &p.a), ("f", &p.f)] {
        if list.len() != d {
            return Err(invalid(
                format!("problem.{name}"),
                format!("expected {d} entries, got {}", list.len()),
            ));
        }
    }
    for (j, &pj) in p.p.iter().enumerate() {
        if !(pj.is_finite() && pj > 1.0) {
            return Err(invalid(format!("problem.p[{j}]"), format!("p > 1 required, got {pj}")));
        }
    }
    if !(p.anchor.is_finite() && p.anchor > 0.0) {
        return Err(invalid("problem.anchor", format!("anchor > 0 required, got {}", p.anchor)));
    }
    let expr = |name: &str, j: usize, text: &str, role| {
        parse(text, role, d).map_err(|e| invalid(format!("problem.{name}[{j}]"), e.to_string()))
    };
    let mut components = Vec::with_capacity(d);
    for j in 0..d {
        components.push(Component {
            p: p.p[j],
            h: expr("h", j, &p.h[j], Role::Radial)?,
            a: expr("a", j, &p.a[j], Role::Radial)?,
            f: expr("f", j, &p.f[j], Role::Nonlinearity)?,
        });
    }
    ProblemSpec::new(p.dimension, components, p.anchor).map_err(|e| invalid("problem", e.to_string()))
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be a finite positive number, got {v}")))
    }
}

fn check_grid(g: &GridConfig) -> Result<(), ConfigError> {
    positive("grid.R", g.horizon)?;
    if g.intervals < 8 {
        return Err(invalid("grid.M", format!("M ≥ 8 required, got {}", g.intervals)));
    }
    positive("grid.f_table.step", g.f_table.step)?;
    positive("grid.f_table.inversion_tol", g.f_table.inversion_tol)
}

fn check_solver(s: &SolverConfig) -> Result<(), ConfigError> {
    positive("solver.tol", s.tol)?;
    if s.max_iter == 0 {
        return Err(invalid("solver.max_iter", "must be at least 1"));
    }
    positive("solver.verify.bound_slack", s.verify.bound_slack)?;
    positive("solver.verify.residual_factor", s.verify.residual_factor)?;
    if !(s.verify.ode_margin.is_finite() && s.verify.ode_margin >= 0.0) {
        return Err(invalid("solver.verify.ode_margin", "must be a finite nonnegative number"));
    }
    if let Some(t) = s.verify.ode_tol {
        positive("solver.verify.ode_tol", t)?;
    }
    Ok(())
}

fn check_probes(p: &ProbeConfig) -> Result<(), ConfigError> {
    if p.horizons < 4 {
        return Err(invalid("probes.horizons", format!("K ≥ 4 required, got {}", p.horizons)));
    }
    positive("probes.r_start", p.r_start)?;
    if !(p.rho_conv > 0.0 && p.rho_conv < 1.0) {
        return Err(invalid("probes.rho_conv", format!("must lie in (0, 1), got {}", p.rho_conv)));
    }
    if p.panels_per_segment < 2 || p.panels_to_start < 1 {
        return Err(invalid("probes", "panels_per_segment ≥ 2 and panels_to_start ≥ 1 required"));
    }
    positive("probes.plateau_threshold", p.plateau_threshold)?;
    if p.sequence_points < 6 {
        return Err(invalid("probes.sequence_points", format!("at least 6 required, got {}", p.sequence_points)));
    }
    Ok(())
}

fn central_values(beta: &BetaSpec, d: usize) -> Result<Vec<CentralValues>, ConfigError> {
    let vectors: Vec<Vec<f64>> = match beta {
        BetaSpec::Scalar(b) => vec![vec![*b; d]],
        BetaSpec::Scalars(list) => list.iter().map(|b| vec![*b; d]).collect(),
        BetaSpec::Vectors(list) => list.clone(),
    };
    if vectors.is_empty() {
        return Err(invalid("beta", "at least one central value is required"));
    }
    vectors
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            if v.len() != d {
                return Err(invalid(format!("beta[{k}]"), format!("expected {d} entries, got {}", v.len())));
            }
            CentralValues::new(v).map_err(|e| invalid(format!("beta[{k}]"), e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINH: &str = r#"{
        "problem": {"N": 3, "p": [2], "a": ["1"], "f": ["u1"]},
        "grid": {"R": 5, "M": 100},
        "beta": 1
    }"#;

    fn with(patch: &str, value: serde_json::Value) -> String {
        let mut doc: serde_json::Value = serde_json::from_str(SINH).unwrap();
        *doc.pointer_mut(patch).unwrap() = value;
        doc.to_string()
    }

    fn error_path(text: &str) -> String {
        match Run::from_json(text).unwrap_err() {
            ConfigError::Invalid { path, .. } => path,
            e => panic!("{e}"),
        }
    }

    #[test]
    fn minimal_config_with_defaults() {
        let run = Run::from_json(SINH).unwrap();
        assert_eq!(run.spec.components(), 1);
        assert_eq!(run.config.problem.h, vec!["0"]);
        assert_eq!(run.config.problem.d, Some(1));
        assert_eq!(run.grid.len(), 101);
        assert_eq!(run.betas, vec![CentralValues::equal(1.0, 1).unwrap()]);
        assert_eq!(run.config.solver.tol, 1e-10);
    }

    #[test]
    fn echo_round_trips() {
        let run = Run::from_json(SINH).unwrap();
        let again = Run::from_json(&run.to_json()).unwrap();
        assert_eq!(again.config, run.config);
        assert_eq!(again.to_json(), run.to_json());
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(error_path(&with("/grid/M", 4.into())), "grid.M");
        let err = Run::from_json(&with("/grid/M", 4.into())).unwrap_err().to_string();
        assert!(err.contains("M ≥ 8"), "{err}");
        assert_eq!(error_path(&with("/problem/f", serde_json::json!(["u2"]))), "problem.f[0]");
        assert_eq!(error_path(&with("/problem/p", serde_json::json!([0.5]))), "problem.p[0]");
        assert_eq!(error_path(&with("/beta", serde_json::json!([[1, 2]]))), "beta[0]");
        assert_eq!(error_path(&with("/beta", serde_json::json!(-1))), "beta[0]");
        assert_eq!(error_path(&with("/grid/R", "x".into())), "grid.R");
        assert_eq!(error_path(&SINH.replace("\"beta\"", "\"betta\"")), "betta");
    }

    #[test]
    fn beta_forms() {
        let run = Run::from_json(&with("/beta", serde_json::json!([1, 2]))).unwrap();
        assert_eq!(run.betas.len(), 2);
        assert_eq!(run.betas[1].as_slice(), &[2.0]);
        let two = r#"{
            "problem": {"N": 3, "p": [2, 2], "a": ["1", "1"], "f": ["u2", "u1"]},
            "grid": {"R": 1, "M": 10},
            "beta": [[1, 2], [2, 3]]
        }"#;
        let run = Run::from_json(two).unwrap();
        assert_eq!(run.betas[0].as_slice(), &[1.0, 2.0]);
    }
}
