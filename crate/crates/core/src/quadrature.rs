//! Radial grids, cumulative quadrature and finite-horizon probes for improper
//! integrals on `[r_start, ∞)`.

use std::fmt::Display;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("grid needs at least 8 intervals (M >= 8), got {0}")]
    TooFewIntervals(usize),
    #[error("grid horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("grid function has {got} values for {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
}

/// Uniform radial grid `0 = r_0 < r_1 < ... < r_M = R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    step: f64,
}

impl RadialGrid {
    pub fn new(horizon: f64, intervals: usize) -> Result<Self, QuadError> {
        if intervals < 8 {
            return Err(QuadError::TooFewIntervals(intervals));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(QuadError::BadHorizon(horizon));
        }
        let step = horizon / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| i as f64 * step).collect();
        nodes[intervals] = horizon;
        Ok(Self { nodes, step })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node closest to `r` (clamped to the grid).
    pub fn nearest_index(&self, r: f64) -> usize {
        ((r / self.step).round().max(0.0) as usize).min(self.intervals())
    }
}

/// Values of a scalar function at every node of a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self, QuadError> {
        if values.len() != grid.len() {
            return Err(QuadError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(QuadError::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self, QuadError> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Composite trapezoid cumulative integral; `out[0] = 0`.
pub fn cumulative_integral(f: &GridFunction) -> GridFunction {
    let values = cumulative_trapezoid(f.grid.nodes(), &f.values);
    GridFunction {
        grid: Arc::clone(&f.grid),
        values,
    }
}

/// Cumulative trapezoid on arbitrary (increasing) nodes.
pub fn cumulative_trapezoid(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    debug_assert_eq!(nodes.len(), values.len());
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..values.len() {
        acc += 0.5 * (nodes[i] - nodes[i - 1]) * (values[i - 1] + values[i]);
        out.push(acc);
    }
    out
}

/// Cumulative trapezoid of `g` sampled at `nodes`; for nested probes whose
/// integrand contains a running integral.
pub(crate) fn running_integral<E>(nodes: &[f64], g: impl Fn(f64) -> Result<f64, E>) -> Result<Vec<f64>, E> {
    let values = nodes.iter().map(|&s| g(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(cumulative_trapezoid(nodes, &values))
}

/// Thresholds and resolution for the improper-integral probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Number of geometric horizons `K`; horizon k is `r_start * 2^k`.
    pub horizons: usize,
    /// Lower limit for probes that do not have a natural one.
    pub r_start: f64,
    /// Largest increment ratio still read as geometric decay.
    pub rho_conv: f64,
    /// Number of trailing increment ratios inspected; `None` means `ceil(K / 2)`.
    pub tail: Option<usize>,
    /// Quadrature panels per doubling segment.
    pub panels_per_segment: usize,
    /// Panels on `[0, r_start]` for nested probes that integrate from 0.
    pub panels_to_start: usize,
    /// A ratio sequence whose last value is below this counts as tending to 0.
    pub plateau_threshold: f64,
    /// Length of the geometric `s` sequences used by the growth checks.
    pub sequence_points: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            horizons: 10,
            r_start: 1.0,
            rho_conv: 0.9,
            tail: None,
            panels_per_segment: 512,
            panels_to_start: 512,
            plateau_threshold: 1e-2,
            sequence_points: 30,
        }
    }
}

impl ProbeConfig {
    pub(crate) fn tail_len(&self) -> usize {
        self.tail
            .unwrap_or_else(|| self.horizons.div_ceil(2))
            .clamp(1, self.horizons.saturating_sub(1).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Diverges,
    Converges,
    Inconclusive,
}

/// Evidence-carrying verdict on `∫_{r_start}^∞ g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceVerdict {
    pub outcome: Outcome,
    /// Extrapolated value of the whole integral when it converges. Includes
    /// `offset` (any mass on `[0, r_start]` folded in by nested probes).
    pub limit: Option<f64>,
    pub offset: f64,
    pub horizons: Vec<f64>,
    /// `I_k = ∫_{r_start}^{horizons[k]} g`.
    pub partials: Vec<f64>,
    pub note: Option<String>,
}

impl DivergenceVerdict {
    pub fn inconclusive(note: impl Into<String>) -> Self {
        Self {
            outcome: Outcome::Inconclusive,
            limit: None,
            offset: 0.0,
            horizons: Vec::new(),
            partials: Vec::new(),
            note: Some(note.into()),
        }
    }

    pub fn converges(&self) -> bool {
        self.outcome == Outcome::Converges
    }

    pub fn diverges(&self) -> bool {
        self.outcome == Outcome::Diverges
    }
}

// Relative slack when reading increments as non-decreasing, so that
// scale-invariant integrands (constant increments) are not lost to rounding.
const NONDECREASING_SLACK: f64 = 1e-9;

/// Applies the geometric-horizon ratio test to partial integrals
/// `I_1..I_K` over `[r_start, horizons[k]]`.
pub fn verdict_from_partials(
    horizons: Vec<f64>,
    partials: Vec<f64>,
    offset: f64,
    cfg: &ProbeConfig,
) -> DivergenceVerdict {
    let mut verdict = DivergenceVerdict {
        outcome: Outcome::Inconclusive,
        limit: None,
        offset,
        horizons,
        partials,
        note: None,
    };
    let k = verdict.partials.len();
    if k < 2 {
        verdict.note = Some("need at least two horizons".into());
        return verdict;
    }
    let mut increments = Vec::with_capacity(k);
    let mut prev = 0.0;
    for &p in &verdict.partials {
        increments.push(p - prev);
        prev = p;
    }
    if increments.iter().any(|d| *d < 0.0 || !d.is_finite()) {
        verdict.note = Some("partial integrals are not non-decreasing; integrand is not nonnegative".into());
        return verdict;
    }
    let last = verdict.partials[k - 1];
    let tail = cfg.tail_len().min(k - 1);
    let window = &increments[k - 1 - tail..];

    if window.iter().all(|d| *d == 0.0) {
        verdict.outcome = Outcome::Converges;
        verdict.limit = Some(offset + last);
        return verdict;
    }

    let ratios: Vec<f64> = window
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1] / w[0]
            }
        })
        .collect();

    if ratios.iter().all(|q| *q <= cfg.rho_conv) {
        let q = *ratios.last().unwrap();
        let tail_mass = increments[k - 1] * q / (1.0 - q);
        verdict.outcome = Outcome::Converges;
        verdict.limit = Some(offset + last + tail_mass);
    } else if window.windows(2).all(|w| w[1] >= w[0] * (1.0 - NONDECREASING_SLACK)) {
        verdict.outcome = Outcome::Diverges;
    } else {
        verdict.note = Some(format!(
            "increment ratios {:?} neither decay below {} nor stay non-decreasing",
            ratios, cfg.rho_conv
        ));
    }
    verdict
}

fn geometric_horizons(r_start: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| r_start * 2f64.powi(k as i32)).collect()
}

/// Probes `∫_{r_start}^∞ integrand` with composite Simpson on each doubling
/// segment `[r_start 2^{k-1}, r_start 2^k]`. Evaluation failures and negative
/// values yield an inconclusive verdict carrying a note.
pub fn probe_divergence<E: Display>(
    integrand: impl Fn(f64) -> Result<f64, E>,
    r_start: f64,
    cfg: &ProbeConfig,
) -> DivergenceVerdict {
    assert!(r_start > 0.0, "geometric horizons need r_start > 0");
    let horizons = geometric_horizons(r_start, cfg.horizons);
    let panels = cfg.panels_per_segment.max(2) & !1;
    let mut partials = Vec::with_capacity(horizons.len());
    let mut acc = 0.0;
    let mut lo = r_start;
    for &hi in &horizons {
        let h = (hi - lo) / panels as f64;
        let mut sum = 0.0;
        for i in 0..=panels {
            let x = if i == panels { hi } else { lo + i as f64 * h };
            let v = match integrand(x) {
                Ok(v) if v >= 0.0 && v.is_finite() => v,
                Ok(v) => return DivergenceVerdict::inconclusive(format!("integrand value {v:?} at r = {x:?}")),
                Err(e) => return DivergenceVerdict::inconclusive(format!("integrand failed at r = {x:?}: {e}")),
            };
            let w = if i == 0 || i == panels {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += w * v;
        }
        acc += sum * h / 3.0;
        partials.push(acc);
        lo = hi;
    }
    verdict_from_partials(horizons, partials, 0.0, cfg)
}

/// Nodes covering `[0, r_start]` uniformly followed by the doubling segments
/// up to `r_start 2^K`, for probes whose integrand needs a running integral
/// from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    nodes: Vec<f64>,
    start_index: usize,
    segment_ends: Vec<usize>,
}

impl ProbeGrid {
    pub fn new(cfg: &ProbeConfig) -> Self {
        Self::from_origin(cfg.r_start, cfg)
    }

    pub fn from_origin(r_start: f64, cfg: &ProbeConfig) -> Self {
        assert!(r_start > 0.0);
        let n0 = cfg.panels_to_start.max(1);
        let n_seg = cfg.panels_per_segment.max(1);
        let mut nodes: Vec<f64> = (0..=n0).map(|i| r_start * i as f64 / n0 as f64).collect();
        nodes[n0] = r_start;
        let start_index = n0;
        let mut segment_ends = Vec::with_capacity(cfg.horizons);
        let mut lo = r_start;
        for hi in geometric_horizons(r_start, cfg.horizons) {
            for i in 1..=n_seg {
                nodes.push(if i == n_seg { hi } else { lo + (hi - lo) * i as f64 / n_seg as f64 });
            }
            segment_ends.push(nodes.len() - 1);
            lo = hi;
        }
        Self {
            nodes,
            start_index,
            segment_ends,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn horizons(&self) -> Vec<f64> {
        self.segment_ends.iter().map(|&i| self.nodes[i]).collect()
    }

    /// Turns a cumulative integral from the origin, sampled on these nodes,
    /// into a verdict on the tail beyond `r_start`.
    pub fn verdict(&self, cumulative: &[f64], cfg: &ProbeConfig) -> DivergenceVerdict {
        debug_assert_eq!(cumulative.len(), self.nodes.len());
        let base = cumulative[self.start_index];
        let partials = self.segment_ends.iter().map(|&i| cumulative[i] - base).collect();
        verdict_from_partials(self.horizons(), partials, base, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64, Infallible> {
        move |x| Ok(f(x))
    }

    fn grid(r: f64, m: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(r, m).unwrap())
    }

    #[test]
    fn grid_invariants() {
        let g = RadialGrid::new(2.0, 8).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.horizon(), 2.0);
        assert_eq!(g.len(), 9);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(RadialGrid::new(1.0, 4), Err(QuadError::TooFewIntervals(4)));
        assert!(RadialGrid::new(-1.0, 10).is_err());
        assert!(RadialGrid::new(f64::NAN, 10).is_err());
    }

    #[test]
    fn grid_function_checks() {
        let g = grid(1.0, 8);
        assert!(GridFunction::new(g.clone(), vec![0.0; 8]).is_err());
        let mut v = vec![0.0; 9];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(g, v), Err(QuadError::NonFinite { index: 3, .. })));
    }

    #[test]
    fn cumulative_closed_forms() {
        let zero = GridFunction::from_fn(grid(3.0, 17), |_| 0.0).unwrap();
        assert!(cumulative_integral(&zero).values().iter().all(|v| *v == 0.0));

        for m in [8, 13, 100] {
            let one = GridFunction::from_fn(grid(2.0, m), |_| 1.0).unwrap();
            assert!((cumulative_integral(&one).last() - 2.0).abs() < 1e-14);
        }

        let lin = GridFunction::from_fn(grid(1.0, 1000), |r| r).unwrap();
        let out = cumulative_integral(&lin);
        assert_eq!(out.values()[0], 0.0);
        assert!((out.last() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_is_second_order() {
        let errors: Vec<f64> = [100, 200, 400]
            .iter()
            .map(|&m| {
                let f = GridFunction::from_fn(grid(1.0, m), |r| r * r * r).unwrap();
                (cumulative_integral(&f).last() - 0.25).abs()
            })
            .collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        }
    }

    #[test]
    fn probe_closed_forms() {
        let cfg = ProbeConfig {
            horizons: 8,
            ..ProbeConfig::default()
        };
        let v = probe_divergence(ok(|r| 1.0 / ((1.0 + r) * (1.0 + r))), 1.0, &cfg);
        assert_eq!(v.outcome, Outcome::Converges);
        let limit = v.limit.unwrap();
        assert!((limit - 0.5).abs() < 0.025, "limit {limit}");
        assert!(limit >= *v.partials.last().unwrap());

        let v = probe_divergence(ok(|r| 1.0 / (1.0 + r)), 1.0, &cfg);
        assert_eq!(v.outcome, Outcome::Diverges);

        let v = probe_divergence(ok(|_| 0.0), 1.0, &cfg);
        assert_eq!(v.outcome, Outcome::Converges);
        assert_eq!(v.limit, Some(0.0));
    }

    #[test]
    fn probe_reports_failures_as_inconclusive() {
        let cfg = ProbeConfig::default();
        let v = probe_divergence(|r: f64| if r > 10.0 { Err("boom") } else { Ok(1.0) }, 1.0, &cfg);
        assert_eq!(v.outcome, Outcome::Inconclusive);
        assert!(v.note.unwrap().contains("boom"));
        let v = probe_divergence(ok(|_| -1.0), 1.0, &cfg);
        assert_eq!(v.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn slowly_decaying_tail_is_inconclusive() {
        // Increments shrink like 2^{-0.01 k}: neither geometric decay below 0.9
        // nor non-decreasing.
        let v = probe_divergence(ok(|r: f64| r.powf(-1.01)), 1.0, &ProbeConfig::default());
        assert_eq!(v.outcome, Outcome::Inconclusive);
        assert!(v.note.is_some());
    }

    #[test]
    fn probe_grid_matches_direct_probe() {
        let cfg = ProbeConfig::default();
        let pg = ProbeGrid::new(&cfg);
        let values: Vec<f64> = pg.nodes().iter().map(|r| 1.0 / ((1.0 + r) * (1.0 + r))).collect();
        let cum = cumulative_trapezoid(pg.nodes(), &values);
        let v = pg.verdict(&cum, &cfg);
        assert_eq!(v.outcome, Outcome::Converges);
        // ∫_0^∞ (1+r)^{-2} = 1
        assert!((v.limit.unwrap() - 1.0).abs() < 0.01);
        assert!((v.offset - 0.5).abs() < 1e-5);
    }

    proptest::proptest! {
        #[test]
        fn cumulative_is_monotone_for_nonnegative(values in proptest::collection::vec(0.0f64..100.0, 9..200)) {
            let g = grid(1.0, values.len() - 1);
            let f = GridFunction::new(g, values).unwrap();
            let out = cumulative_integral(&f);
            proptest::prop_assert!(out.values().windows(2).all(|w| w[1] >= w[0]));
        }

        #[test]
        fn probe_is_scale_invariant(c in 0.01f64..100.0, decay in proptest::bool::ANY) {
            let cfg = ProbeConfig::default();
            let base = move |r: f64| if decay { 1.0 / (1.0 + r * r * r) } else { 1.0 / (1.0 + r) };
            let v1 = probe_divergence(ok(base), 1.0, &cfg);
            let v2 = probe_divergence(ok(move |r| c * base(r)), 1.0, &cfg);
            proptest::prop_assert_eq!(v1.outcome, v2.outcome);
            if let (Some(l1), Some(l2)) = (v1.limit, v2.limit) {
                proptest::prop_assert!((l2 - c * l1).abs() <= 1e-9 * c * l1.abs().max(1.0));
            }
        }
    }
}
