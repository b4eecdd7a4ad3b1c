//! Monotone successive approximation of the integral system
//!
//! ```text
//! u_j(r) = β_j + ∫_0^r (H_j(t)^{-1} ∫_0^t H_j a_j f_j(u_1, ..., u_d) ds)^{1/(p_j - 1)} dt
//! ```
//!
//! on a fixed grid over `[0, R]`, starting from `u_j ≡ β_j`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exprlang::ExprError;
use crate::kernel::{KernelError, RadialKernel};
use crate::problem::ProblemSpec;
use crate::quadrature::{GridFunction, RadialGrid};
use crate::transforms::{component_kernel, radial_values, TransformError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("evaluating f_{component} at r = {r:?}: {source}")]
    Expr {
        component: usize,
        r: f64,
        source: ExprError,
    },
    #[error("iterates blew up at iteration {iteration} near r = {r:?}")]
    Blowup { iteration: usize, r: f64 },
    #[error("iterate {iteration} decreased u_{component} at r = {r:?} by {drop:e}")]
    MonotonicityViolated {
        iteration: usize,
        component: usize,
        r: f64,
        drop: f64,
    },
    #[error("central values must be positive and finite, got {0:?}")]
    CentralValues(Vec<f64>),
    #[error("expected {expected} central values, got {got}")]
    CentralCount { expected: usize, got: usize },
    #[error("expected {expected} solution components of {nodes} nodes")]
    Shape { expected: usize, nodes: usize },
}

/// `β = (β_1, ..., β_d)`, all entries positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CentralValues(Vec<f64>);

impl CentralValues {
    pub fn new(values: Vec<f64>) -> Result<Self, SolverError> {
        if values.is_empty() || values.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(SolverError::CentralValues(values));
        }
        Ok(Self(values))
    }

    pub fn equal(beta: f64, components: usize) -> Result<Self, SolverError> {
        Self::new(vec![beta; components])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The common value when all entries agree.
    pub fn common(&self) -> Option<f64> {
        let first = self.0[0];
        self.0.iter().all(|b| *b == first).then_some(first)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::MIN, f64::max)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop when the sup-norm update over all components is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Treat a decreasing iterate as an error rather than recording it.
    pub strict_monotone: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            strict_monotone: true,
        }
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    /// `max_j sup_r |u_j^k - u_j^{k-1}|`.
    pub update: f64,
    /// `min_{j,r} (u_j^k - u_j^{k-1})`; nonnegative for a monotone step.
    pub min_increment: f64,
    pub monotone: bool,
}

// Rounding slack for the monotonicity check, relative to |u|.
const MONOTONE_SLACK: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub grid: Arc<RadialGrid>,
    pub beta: CentralValues,
    pub u: Vec<GridFunction>,
    pub iterations: usize,
    pub final_update: f64,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    /// `sup_r Σ_j u_j(r)`, the finite witness for `L(R)`.
    pub l_estimate: f64,
}

impl SolutionBundle {
    pub fn monotone_violations(&self) -> usize {
        self.history.iter().filter(|h| !h.monotone).count()
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.u.iter().map(|g| g.values().to_vec()).collect()
    }

    /// Whether every `u_j` is nondecreasing in `r`.
    pub fn radially_monotone(&self) -> bool {
        self.u.iter().all(|g| g.values().windows(2).all(|w| w[1] >= w[0]))
    }
}

/// The discretized integral operator for one spec on one grid.
#[derive(Debug, Clone)]
pub struct Solver {
    spec: ProblemSpec,
    grid: Arc<RadialGrid>,
    kernels: Vec<RadialKernel>,
    a_values: Vec<Vec<f64>>,
}

impl Solver {
    pub fn new(spec: &ProblemSpec, grid: &Arc<RadialGrid>) -> Result<Self, SolverError> {
        let d = spec.components();
        let mut kernels = Vec::with_capacity(d);
        let mut a_values = Vec::with_capacity(d);
        for j in 0..d {
            kernels.push(component_kernel(spec, grid.nodes(), j)?);
            a_values.push(radial_values(&spec.component(j).a, grid.nodes(), &format!("a_{}", j + 1))?);
        }
        Ok(Self {
            spec: spec.clone(),
            grid: Arc::clone(grid),
            kernels,
            a_values,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn kernel(&self, j: usize) -> &RadialKernel {
        &self.kernels[j]
    }

    pub fn a_values(&self, j: usize) -> &[f64] {
        &self.a_values[j]
    }

    fn check_shape(&self, u: &[Vec<f64>]) -> Result<(), SolverError> {
        if u.len() != self.spec.components() || u.iter().any(|c| c.len() != self.grid.len()) {
            return Err(SolverError::Shape {
                expected: self.spec.components(),
                nodes: self.grid.len(),
            });
        }
        Ok(())
    }

    /// `a_j(r_i) f_j(u(r_i))` for every component and node.
    pub fn sources(&self, u: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SolverError> {
        self.check_shape(u)?;
        let d = self.spec.components();
        let nodes = self.grid.nodes();
        let mut point = vec![0.0; d];
        let mut out = vec![vec![0.0; nodes.len()]; d];
        for (i, &r) in nodes.iter().enumerate() {
            for (k, comp) in u.iter().enumerate() {
                point[k] = comp[i];
            }
            for (j, out_j) in out.iter_mut().enumerate() {
                let a = self.a_values[j][i];
                if a == 0.0 {
                    continue;
                }
                let f = self
                    .spec
                    .component(j)
                    .f
                    .eval(&point)
                    .map_err(|source| SolverError::Expr {
                        component: j + 1,
                        r,
                        source,
                    })?;
                out_j[i] = a * f;
            }
        }
        Ok(out)
    }

    /// One application of the integral operator: `(T u)_j`.
    pub fn apply(&self, u: &[Vec<f64>], beta: &CentralValues) -> Result<Vec<Vec<f64>>, SolverError> {
        if beta.len() != self.spec.components() {
            return Err(SolverError::CentralCount {
                expected: self.spec.components(),
                got: beta.len(),
            });
        }
        let sources = self.sources(u)?;
        sources
            .iter()
            .enumerate()
            .map(|(j, src)| {
                let p = self.spec.component(j).p;
                let increment = self.kernels[j].apply(src, p).map_err(|e| match e {
                    KernelError::NonFinite { r } => SolverError::Blowup { iteration: 0, r },
                    other => SolverError::Transform(other.into()),
                })?;
                Ok(increment.into_iter().map(|v| beta.as_slice()[j] + v).collect())
            })
            .collect()
    }

    /// Runs the iteration from `u_j^0 ≡ β_j`.
    pub fn iterate(&self, beta: &CentralValues, opts: &SolverOptions) -> Result<SolutionBundle, SolverError> {
        let d = self.spec.components();
        if beta.len() != d {
            return Err(SolverError::CentralCount {
                expected: d,
                got: beta.len(),
            });
        }
        let nodes = self.grid.nodes();
        let mut current: Vec<Vec<f64>> = beta.as_slice().iter().map(|&b| vec![b; nodes.len()]).collect();
        let mut history = Vec::new();
        let mut converged = false;
        let mut final_update = f64::INFINITY;

        for iteration in 1..=opts.max_iter {
            let next = self.apply(&current, beta).map_err(|e| match e {
                SolverError::Blowup { r, .. } => SolverError::Blowup { iteration, r },
                SolverError::Expr { r, source, .. } if source.is_overflow() => SolverError::Blowup { iteration, r },
                other => other,
            })?;

            let mut update = 0.0f64;
            let mut min_increment = f64::INFINITY;
            let mut worst: Option<(usize, usize, f64)> = None;
            for j in 0..d {
                for (i, (new, old)) in next[j].iter().zip(&current[j]).enumerate() {
                    if !new.is_finite() || *new > 1e150 {
                        return Err(SolverError::Blowup { iteration, r: nodes[i] });
                    }
                    let diff = new - old;
                    update = update.max(diff.abs());
                    min_increment = min_increment.min(diff);
                    let drop = -diff;
                    if drop > MONOTONE_SLACK * old.abs().max(1.0) && worst.is_none_or(|(_, _, w)| drop > w) {
                        worst = Some((j, i, drop));
                    }
                }
            }
            let monotone = worst.is_none();
            history.push(IterationRecord {
                update,
                min_increment,
                monotone,
            });
            if let (Some((j, i, drop)), true) = (worst, opts.strict_monotone) {
                return Err(SolverError::MonotonicityViolated {
                    iteration,
                    component: j + 1,
                    r: nodes[i],
                    drop,
                });
            }
            current = next;
            final_update = update;
            if update <= opts.tol {
                converged = true;
                break;
            }
        }

        let mut l_estimate = 0.0f64;
        for i in 0..nodes.len() {
            l_estimate = l_estimate.max(current.iter().map(|c| c[i]).sum());
        }
        let u = current
            .into_iter()
            .map(|values| GridFunction::new(Arc::clone(&self.grid), values))
            .collect::<Result<Vec<_>, _>>()
            .map_err(TransformError::from)?;
        Ok(SolutionBundle {
            grid: Arc::clone(&self.grid),
            beta: beta.clone(),
            u,
            iterations: history.len(),
            final_update,
            converged,
            history,
            l_estimate,
        })
    }
}

/// Builds the operator and runs the iteration.
pub fn iterate(
    spec: &ProblemSpec,
    grid: &Arc<RadialGrid>,
    beta: &CentralValues,
    opts: &SolverOptions,
) -> Result<SolutionBundle, SolverError> {
    Solver::new(spec, grid)?.iterate(beta, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(f: &str) -> ProblemSpec {
        ProblemSpec::from_text(3, &[2.0], &["0"], &["1"], &[f], 1.0).unwrap()
    }

    fn grid(r: f64, m: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(r, m).unwrap())
    }

    #[test]
    fn zero_nonlinearity_is_constant() {
        let beta = CentralValues::equal(1.7, 1).unwrap();
        let b = iterate(&spec("0"), &grid(3.0, 64), &beta, &SolverOptions::default()).unwrap();
        assert!(b.converged);
        assert_eq!(b.iterations, 1);
        assert!(b.u[0].values().iter().all(|v| *v == 1.7));
    }

    #[test]
    fn linear_source_matches_sinh_profile() {
        let beta = CentralValues::equal(1.0, 1).unwrap();
        let b = iterate(&spec("u1"), &grid(2.0, 800), &beta, &SolverOptions::default()).unwrap();
        assert!(b.converged);
        assert_eq!(b.u[0].values()[0], 1.0);
        for (r, u) in b.grid.nodes().iter().zip(b.u[0].values()).skip(1) {
            let exact = r.sinh() / r;
            assert!((u - exact).abs() < 1e-5 * exact);
        }
        assert!(b.radially_monotone());
        assert_eq!(b.monotone_violations(), 0);
        assert!((b.l_estimate - b.u[0].last()).abs() == 0.0);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let beta = CentralValues::equal(1.0, 1).unwrap();
        let opts = SolverOptions {
            max_iter: 3,
            ..SolverOptions::default()
        };
        let b = iterate(&spec("u1"), &grid(5.0, 100), &beta, &opts).unwrap();
        assert!(!b.converged);
        assert_eq!(b.iterations, 3);
        assert!(b.final_update > opts.tol);
    }

    #[test]
    fn superlinear_growth_blows_up() {
        let beta = CentralValues::equal(1.0, 1).unwrap();
        let err = iterate(&spec("exp(u1)^4"), &grid(10.0, 200), &beta, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::Blowup { .. }), "{err:?}");
    }

    #[test]
    fn decreasing_nonlinearity_breaks_monotonicity() {
        let beta = CentralValues::equal(1.0, 1).unwrap();
        let err = iterate(&spec("exp(-u1)"), &grid(3.0, 100), &beta, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::MonotonicityViolated { .. }));
        let opts = SolverOptions {
            strict_monotone: false,
            ..SolverOptions::default()
        };
        let b = iterate(&spec("exp(-u1)"), &grid(3.0, 100), &beta, &opts).unwrap();
        assert!(b.monotone_violations() > 0);
    }

    #[test]
    fn central_values_validation() {
        assert!(CentralValues::new(vec![]).is_err());
        assert!(CentralValues::new(vec![1.0, 0.0]).is_err());
        assert!(CentralValues::new(vec![f64::NAN]).is_err());
        let b = CentralValues::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(b.common(), None);
        assert!(CentralValues::equal(1.0, 2).unwrap().le(&b));
        let beta = CentralValues::equal(1.0, 2).unwrap();
        assert!(matches!(
            iterate(&spec("u1"), &grid(1.0, 10), &beta, &SolverOptions::default()),
            Err(SolverError::CentralCount { .. })
        ));
    }
}
