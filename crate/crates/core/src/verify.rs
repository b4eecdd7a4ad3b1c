//! A posteriori checks on a computed radial solution: the two-sided
//! estimate
//!
//! ```text
//! β_j + f_j(β)^{1/(p_j-1)} A_j(r)  <=  u_j(r),      Σ_j u_j(r)  <=  F⁻¹(F(dβ) + Σ_j A_j(r))
//! ```
//!
//! the integral-equation residual `|T(u) - u|` and a finite-difference
//! residual of the radial ODE.

use serde::{Deserialize, Serialize};

use crate::solver::{CentralValues, SolutionBundle, Solver, SolverError};
use crate::transforms::{TransformError, TransformTables};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Absolute slack allowed on both sandwich inequalities.
    pub bound_slack: f64,
    /// Integral residual must be at most `residual_factor * tol`.
    pub residual_factor: f64,
    /// ODE residual is gated on `[margin, R - margin]` only.
    pub ode_margin: f64,
    /// Optional gate on the ODE residual; `None` reports it without gating.
    pub ode_tol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            bound_slack: 1e-6,
            residual_factor: 10.0,
            ode_margin: 0.1,
            ode_tol: None,
        }
    }
}

/// Sandwich margins; a positive margin is a violation of that size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `max_r (lower_j(r) - u_j(r))` per component.
    pub lower_margin: Vec<f64>,
    #[serde(skip)]
    pub lower: Vec<Vec<f64>>,
    /// `max_r (Σ u_j(r) - upper(r))`, when the upper bound is evaluable.
    pub upper_margin: Option<f64>,
    #[serde(skip)]
    pub upper: Option<Vec<f64>>,
    pub upper_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `sup_r |(T u)_j - u_j|` per component.
    pub integral: Vec<f64>,
    /// Max ODE residual on the gated window per component.
    pub ode: Vec<f64>,
    /// Max ODE residual on interior nodes outside the window.
    pub ode_outside_window: Vec<f64>,
    #[serde(skip)]
    pub ode_profile: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub bound_slack: f64,
    pub integral: f64,
    pub ode: Option<f64>,
    pub ode_window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub bounds: BoundReport,
    pub residuals: ResidualReport,
    pub tolerances: Tolerances,
    pub converged: bool,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Lower and upper sandwich bounds at every node of `u`.
pub fn verify_bounds(
    solver: &Solver,
    tables: &TransformTables,
    u: &[Vec<f64>],
    beta: &CentralValues,
) -> Result<BoundReport, SolverError> {
    let spec = solver.spec();
    let d = spec.components();
    let at_beta = spec
        .iter()
        .enumerate()
        .map(|(j, c)| {
            c.f.eval(beta.as_slice()).map_err(|source| SolverError::Expr {
                component: j + 1,
                r: 0.0,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut lower = Vec::with_capacity(d);
    let mut lower_margin = Vec::with_capacity(d);
    for j in 0..d {
        let scale = at_beta[j].max(0.0).powf(1.0 / (spec.component(j).p - 1.0));
        let b = beta.as_slice()[j];
        let lb: Vec<f64> = tables.a[j].values().iter().map(|a| b + scale * a).collect();
        let margin = lb
            .iter()
            .zip(&u[j])
            .map(|(l, v)| l - v)
            .fold(f64::NEG_INFINITY, f64::max);
        lower.push(lb);
        lower_margin.push(margin);
    }

    let (upper, upper_margin, upper_note) = match upper_bound(spec.components(), tables, beta) {
        Ok(ub) => {
            let margin = (0..ub.len())
                .map(|i| u.iter().map(|c| c[i]).sum::<f64>() - ub[i])
                .fold(f64::NEG_INFINITY, f64::max);
            (Some(ub), Some(margin), None)
        }
        Err(note) => (None, None, Some(note)),
    };
    Ok(BoundReport {
        lower_margin,
        lower,
        upper_margin,
        upper,
        upper_note,
    })
}

/// `F⁻¹(F(dβ) + Σ_j A_j(r))` on the grid, or the reason it is not evaluable.
pub fn upper_bound(d: usize, tables: &TransformTables, beta: &CentralValues) -> Result<Vec<f64>, String> {
    let b = beta
        .common()
        .ok_or_else(|| "upper bound is stated for equal central values only".to_string())?;
    let start = d as f64 * b;
    let not_evaluable = |e: TransformError| format!("upper bound not evaluable: {e}");
    let table = tables.f_table.covering_point(start).map_err(not_evaluable)?;
    let base = table.value(start).map_err(not_evaluable)?;
    let a_sum = tables.a_sum();
    let top = base + a_sum.iter().copied().fold(0.0, f64::max);
    let table = table.covering_value(top, Some(&tables.f_inf)).map_err(not_evaluable)?;
    a_sum
        .iter()
        .map(|a| table.invert_in_range(base + a).map_err(not_evaluable))
        .collect()
}

/// Integral and ODE residuals of `u` against the spec.
pub fn residual(
    solver: &Solver,
    u: &[Vec<f64>],
    beta: &CentralValues,
    ode_margin: f64,
) -> Result<ResidualReport, SolverError> {
    let spec = solver.spec();
    let grid = solver.grid();
    let nodes = grid.nodes();
    let m = nodes.len();
    let n_pow = (spec.dimension() - 1) as i32;

    let image = solver.apply(u, beta)?;
    let integral = image
        .iter()
        .zip(u)
        .map(|(t, v)| t.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();

    let sources = solver.sources(u)?;
    let (lo, hi) = (ode_margin, grid.horizon() - ode_margin);
    let mut ode = Vec::with_capacity(u.len());
    let mut outside = Vec::with_capacity(u.len());
    let mut profiles = Vec::with_capacity(u.len());
    for (j, comp) in u.iter().enumerate() {
        let p = spec.component(j).p;
        let flux = |slope: f64| slope.abs().powf(p - 2.0) * slope;
        let log_w = solver.kernel(j).log_weight();
        let mut profile = vec![0.0; m];
        let (mut in_max, mut out_max) = (0.0f64, 0.0f64);
        for i in 1..m - 1 {
            let (r_prev, r, r_next) = (nodes[i - 1], nodes[i], nodes[i + 1]);
            let half_plus = 0.5 * (r + r_next);
            let half_minus = 0.5 * (r_prev + r);
            // H(r_{i±1/2}) / H(r_i)
            let w_plus = (half_plus / r).powi(n_pow) * (0.5 * (log_w[i + 1] - log_w[i])).exp();
            let w_minus = (half_minus / r).powi(n_pow) * (0.5 * (log_w[i - 1] - log_w[i])).exp();
            let slope_plus = (comp[i + 1] - comp[i]) / (r_next - r);
            let slope_minus = (comp[i] - comp[i - 1]) / (r - r_prev);
            let lhs = (w_plus * flux(slope_plus) - w_minus * flux(slope_minus)) / (half_plus - half_minus);
            let res = (lhs - sources[j][i]).abs();
            profile[i] = res;
            if r >= lo && r <= hi {
                in_max = in_max.max(res);
            } else {
                out_max = out_max.max(res);
            }
        }
        ode.push(in_max);
        outside.push(out_max);
        profiles.push(profile);
    }
    Ok(ResidualReport {
        integral,
        ode,
        ode_outside_window: outside,
        ode_profile: profiles,
    })
}

/// Full report for a solution given as raw component arrays.
pub fn verify_solution(
    solver: &Solver,
    tables: &TransformTables,
    u: &[Vec<f64>],
    beta: &CentralValues,
    solver_tol: f64,
    converged: bool,
    opts: &VerifyOptions,
) -> Result<VerificationReport, SolverError> {
    let bounds = verify_bounds(solver, tables, u, beta)?;
    let residuals = residual(solver, u, beta, opts.ode_margin)?;
    let tolerances = Tolerances {
        bound_slack: opts.bound_slack,
        integral: opts.residual_factor * solver_tol,
        ode: opts.ode_tol,
        ode_window: (opts.ode_margin, solver.grid().horizon() - opts.ode_margin),
    };

    let mut notes = Vec::new();
    if !converged {
        notes.push("iteration did not reach the tolerance; no fixed point is claimed".to_string());
    }
    let lower_ok = bounds.lower_margin.iter().all(|m| *m <= opts.bound_slack);
    if !lower_ok {
        notes.push("lower sandwich bound violated".to_string());
    }
    let upper_ok = bounds.upper_margin.is_none_or(|m| m <= opts.bound_slack);
    if !upper_ok {
        notes.push("upper sandwich bound violated".to_string());
    }
    if let Some(note) = &bounds.upper_note {
        notes.push(note.clone());
    }
    let integral_ok = residuals.integral.iter().all(|r| *r <= tolerances.integral);
    if !integral_ok {
        notes.push("integral-equation residual above tolerance".to_string());
    }
    let ode_ok = opts
        .ode_tol
        .is_none_or(|tol| residuals.ode.iter().all(|r| *r <= tol));
    if !ode_ok {
        notes.push("ODE residual above tolerance".to_string());
    }
    Ok(VerificationReport {
        passed: converged && lower_ok && upper_ok && integral_ok && ode_ok,
        bounds,
        residuals,
        tolerances,
        converged,
        notes,
    })
}

/// Full report for a solver bundle.
pub fn verify_bundle(
    solver: &Solver,
    tables: &TransformTables,
    bundle: &SolutionBundle,
    solver_tol: f64,
    opts: &VerifyOptions,
) -> Result<VerificationReport, SolverError> {
    verify_solution(
        solver,
        tables,
        &bundle.values(),
        &bundle.beta,
        solver_tol,
        bundle.converged,
        opts,
    )
}
