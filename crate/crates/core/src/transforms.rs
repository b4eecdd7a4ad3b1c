//! Weight functions `H_j`, barrier functions `A_j`, the growth quantity
//! `F(r) = ∫_a^r (1 + Σ_j f_j(s, ..., s))^{-1/(min p - 1)} ds` and its inverse.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exprlang::{Expr, ExprError};
use crate::kernel::{KernelError, RadialKernel};
use crate::problem::ProblemSpec;
use crate::quadrature::{
    probe_divergence, DivergenceVerdict, GridFunction, ProbeConfig, ProbeGrid, QuadError,
    RadialGrid,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("evaluating {what}: {source}")]
    Expr { what: String, source: ExprError },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] QuadError),
    #[error("s = {s:?} lies below the anchor a = {anchor:?} where F is defined")]
    BelowAnchor { s: f64, anchor: f64 },
    #[error("F^-1 is only defined for values >= 0, got {0:?}")]
    NegativeValue(f64),
    #[error("{y:?} is beyond range of F^-1 (F(inf) ~ {limit})")]
    BeyondRange { y: f64, limit: String },
    #[error("value {0:?} is outside the tabulated range of F")]
    NotCovered(f64),
}

fn expr_error(what: impl Into<String>) -> impl FnOnce(ExprError) -> TransformError {
    let what = what.into();
    move |source| TransformError::Expr { what, source }
}

pub(crate) fn radial_values(expr: &Expr, nodes: &[f64], what: &str) -> Result<Vec<f64>, TransformError> {
    nodes
        .iter()
        .map(|&r| expr.eval_radial(r).map_err(expr_error(what)))
        .collect()
}

/// The kernel for component `j` (0-based) on arbitrary nodes starting at 0.
pub fn component_kernel(spec: &ProblemSpec, nodes: &[f64], j: usize) -> Result<RadialKernel, TransformError> {
    let h = radial_values(&spec.component(j).h, nodes, &format!("h_{}", j + 1))?;
    Ok(RadialKernel::new(nodes, &h, spec.dimension()))
}

/// `H_j(r) = r^{N-1} exp(∫_0^r h_j)` on the grid; `j` is 0-based.
pub fn build_h(spec: &ProblemSpec, grid: &Arc<RadialGrid>, j: usize) -> Result<GridFunction, TransformError> {
    let kernel = component_kernel(spec, grid.nodes(), j)?;
    Ok(GridFunction::new(Arc::clone(grid), kernel.weight())?)
}

/// `A_j(r) = ∫_0^r (H_j(t)^{-1} ∫_0^t H_j a_j)^{1/(p_j-1)} dt`; `j` is 0-based.
pub fn build_a(spec: &ProblemSpec, grid: &Arc<RadialGrid>, j: usize) -> Result<GridFunction, TransformError> {
    let kernel = component_kernel(spec, grid.nodes(), j)?;
    barrier_on(spec, &kernel, j).and_then(|v| Ok(GridFunction::new(Arc::clone(grid), v)?))
}

fn barrier_on(spec: &ProblemSpec, kernel: &RadialKernel, j: usize) -> Result<Vec<f64>, TransformError> {
    let a = radial_values(&spec.component(j).a, kernel.nodes(), &format!("a_{}", j + 1))?;
    Ok(kernel.apply(&a, spec.component(j).p)?)
}

/// Tail verdict for `A_j(∞)`; the limit (when it converges) is the full `A_j(∞)`.
pub fn estimate_a_inf(spec: &ProblemSpec, j: usize, cfg: &ProbeConfig) -> DivergenceVerdict {
    let grid = ProbeGrid::new(cfg);
    let result = component_kernel(spec, grid.nodes(), j).and_then(|k| barrier_on(spec, &k, j));
    match result {
        Ok(cumulative) => grid.verdict(&cumulative, cfg),
        Err(e) => DivergenceVerdict::inconclusive(format!("A_{} probe failed: {e}", j + 1)),
    }
}

/// The integrand `F'(s) = (1 + Σ_j f_j(s, ..., s))^{-1/(min p - 1)}`.
pub fn f_integrand(spec: &ProblemSpec, s: f64) -> Result<f64, ExprError> {
    Ok(spec.diagonal_sum(s)?.powf(-spec.growth_exponent()))
}

/// Tail verdict for `F(∞)`, probing from the anchor.
pub fn estimate_f_inf(spec: &ProblemSpec, cfg: &ProbeConfig) -> DivergenceVerdict {
    probe_divergence(|s| f_integrand(spec, s), spec.anchor(), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FTableConfig {
    /// Node spacing on the first segment `[a, s_max]`.
    pub step: f64,
    /// Tolerance on F-values when inverting.
    pub inversion_tol: f64,
    /// How many times the table may double its upper end.
    pub max_doublings: usize,
}

impl Default for FTableConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            inversion_tol: 1e-10,
            max_doublings: 40,
        }
    }
}

/// Tabulated `F` on `[a, s_max]`. Extending the table returns a new table.
///
/// Values come from cumulative Simpson (integrand at nodes and panel
/// midpoints); between nodes `F` is linearly interpolated, and the inverse
/// uses the same interpolant, so `F⁻¹(F(s)) = s` up to rounding.
#[derive(Debug, Clone)]
pub struct FTable {
    spec: Arc<ProblemSpec>,
    cfg: FTableConfig,
    first_panels: usize,
    doublings: usize,
    s: Vec<f64>,
    values: Vec<f64>,
}

impl FTable {
    pub fn build(spec: Arc<ProblemSpec>, s_max: f64, cfg: FTableConfig) -> Result<Self, TransformError> {
        let a = spec.anchor();
        let s_max = if s_max > a { s_max } else { a + 1.0 };
        let panels = ((s_max - a) / cfg.step).ceil().max(1.0) as usize;
        let mut table = Self {
            spec,
            first_panels: (s_max / cfg.step).ceil().max(1.0) as usize,
            cfg,
            doublings: 0,
            s: vec![a],
            values: vec![0.0],
        };
        table.append_segment(s_max, panels)?;
        Ok(table)
    }

    fn append_segment(&mut self, hi: f64, panels: usize) -> Result<(), TransformError> {
        let lo = *self.s.last().unwrap();
        let h = (hi - lo) / panels as f64;
        let g = |s: f64| f_integrand(&self.spec, s).map_err(expr_error(format!("F integrand at s = {s:?}")));
        let mut g_left = g(lo)?;
        let mut acc = *self.values.last().unwrap();
        let mut new_s = Vec::with_capacity(panels);
        let mut new_v = Vec::with_capacity(panels);
        for i in 1..=panels {
            let left = lo + (i - 1) as f64 * h;
            let right = if i == panels { hi } else { lo + i as f64 * h };
            let g_mid = g(0.5 * (left + right))?;
            let g_right = g(right)?;
            acc += (right - left) / 6.0 * (g_left + 4.0 * g_mid + g_right);
            new_s.push(right);
            new_v.push(acc);
            g_left = g_right;
        }
        self.s.extend(new_s);
        self.values.extend(new_v);
        Ok(())
    }

    /// A copy whose upper end is doubled.
    pub fn extended(&self) -> Result<Self, TransformError> {
        let mut next = self.clone();
        let hi = 2.0 * self.s_max();
        next.append_segment(hi, self.first_panels)?;
        next.doublings += 1;
        Ok(next)
    }

    pub fn anchor(&self) -> f64 {
        self.s[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn f_max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn config(&self) -> &FTableConfig {
        &self.cfg
    }

    pub fn nodes(&self) -> &[f64] {
        &self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether another doubling is allowed.
    pub fn can_extend(&self) -> bool {
        self.doublings < self.cfg.max_doublings
    }

    /// `F(s)` for `s` in the tabulated range.
    pub fn value(&self, s: f64) -> Result<f64, TransformError> {
        if s < self.anchor() {
            return Err(TransformError::BelowAnchor { s, anchor: self.anchor() });
        }
        if s > self.s_max() || s.is_nan() {
            return Err(TransformError::NotCovered(s));
        }
        let i = self.s.partition_point(|&x| x <= s).clamp(1, self.s.len() - 1);
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Ok(v0 + (v1 - v0) * (s - s0) / (s1 - s0))
    }

    /// Inverse on the tabulated range: bisection over the nodes, then the
    /// linear interpolant inside the bracketing panel.
    pub fn invert_in_range(&self, y: f64) -> Result<f64, TransformError> {
        if y < 0.0 {
            return Err(TransformError::NegativeValue(y));
        }
        if y > self.f_max() || y.is_nan() {
            return Err(TransformError::NotCovered(y));
        }
        let (mut lo, mut hi) = (0usize, self.s.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.values[mid] <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (v0, v1) = (self.values[lo], self.values[hi]);
        if v1 <= v0 {
            return Ok(self.s[lo]);
        }
        let t = ((y - v0) / (v1 - v0)).clamp(0.0, 1.0);
        Ok(self.s[lo] + t * (self.s[hi] - self.s[lo]))
    }

    /// This table, or a doubled one, whose range reaches `s`.
    pub fn covering_point(&self, s: f64) -> Result<Self, TransformError> {
        let mut table = self.clone();
        while table.s_max() < s {
            if !table.can_extend() {
                return Err(TransformError::NotCovered(s));
            }
            table = table.extended()?;
        }
        Ok(table)
    }

    /// This table, or a doubled one, whose values reach `y`. Fails with
    /// [`TransformError::BeyondRange`] when `y` is above the (finite) `F(∞)`
    /// estimate in `f_inf`, or when the doubling budget runs out.
    pub fn covering_value(&self, y: f64, f_inf: Option<&DivergenceVerdict>) -> Result<Self, TransformError> {
        if y < 0.0 {
            return Err(TransformError::NegativeValue(y));
        }
        let limit = f_inf.filter(|v| v.converges()).and_then(|v| v.limit);
        let describe = || limit.map_or_else(|| "unbounded".to_string(), |l| format!("{l:?}"));
        if let Some(l) = limit {
            if y >= l {
                return Err(TransformError::BeyondRange { y, limit: describe() });
            }
        }
        let mut table = self.clone();
        while table.f_max() < y {
            if !table.can_extend() {
                return Err(TransformError::BeyondRange { y, limit: describe() });
            }
            table = table.extended().map_err(|_| TransformError::BeyondRange { y, limit: describe() })?;
        }
        Ok(table)
    }
}

/// Convenience builder matching the usual call shape.
pub fn build_f(spec: &ProblemSpec, s_max: f64, cfg: FTableConfig) -> Result<FTable, TransformError> {
    FTable::build(Arc::new(spec.clone()), s_max, cfg)
}

/// `F⁻¹(y)`, doubling the table on demand.
pub fn invert_f(table: &FTable, y: f64, f_inf: Option<&DivergenceVerdict>) -> Result<f64, TransformError> {
    if y <= table.f_max() {
        return table.invert_in_range(y);
    }
    table.covering_value(y, f_inf)?.invert_in_range(y)
}

/// Default upper end of the first F segment: `max(10 d β, a + 1)`.
pub fn default_s_max(spec: &ProblemSpec, beta_max: f64) -> f64 {
    (10.0 * spec.components() as f64 * beta_max).max(spec.anchor() + 1.0)
}

/// Everything derived from a spec on a working grid.
#[derive(Debug, Clone)]
pub struct TransformTables {
    pub grid: Arc<RadialGrid>,
    pub h: Vec<GridFunction>,
    pub a: Vec<GridFunction>,
    pub a_inf: Vec<DivergenceVerdict>,
    pub f_table: FTable,
    pub f_inf: DivergenceVerdict,
}

impl TransformTables {
    pub fn build(
        spec: &ProblemSpec,
        grid: &Arc<RadialGrid>,
        probes: &ProbeConfig,
        f_cfg: &FTableConfig,
        s_max: f64,
    ) -> Result<Self, TransformError> {
        let d = spec.components();
        let mut h = Vec::with_capacity(d);
        let mut a = Vec::with_capacity(d);
        for j in 0..d {
            let kernel = component_kernel(spec, grid.nodes(), j)?;
            h.push(GridFunction::new(Arc::clone(grid), kernel.weight())?);
            a.push(GridFunction::new(Arc::clone(grid), barrier_on(spec, &kernel, j)?)?);
        }
        let a_inf = (0..d).map(|j| estimate_a_inf(spec, j, probes)).collect();
        Ok(Self {
            grid: Arc::clone(grid),
            h,
            a,
            a_inf,
            f_table: build_f(spec, s_max, f_cfg.clone())?,
            f_inf: estimate_f_inf(spec, probes),
        })
    }

    /// `Σ_j A_j(r)` at the grid nodes.
    pub fn a_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.grid.len()];
        for a in &self.a {
            for (s, v) in sum.iter_mut().zip(a.values()) {
                *s += v;
            }
        }
        sum
    }
}
