//! Which existence result covers an instance, and whether its radial
//! solutions are bounded or large.
//!
//! Every limit condition is a finite-horizon probe; an uncertain probe makes
//! the dependent verdict inconclusive rather than guessed.

mod literature;
mod sequence;

use std::sync::Arc;

use serde::Serialize;

pub use literature::{
    check_keller_osserman, check_lair_proposition, check_remark_implications, check_ye_zhou, Consistency,
    LairInstance, LairReport, RemarkReport,
};
pub use sequence::{check_sublinearity, check_sup_bounded, diagonal_bracket, geometric_sequence, SequenceReport};

use crate::exprlang::{validate_sampled, Property, SampleBox};
use crate::problem::ProblemSpec;
use crate::quadrature::{DivergenceVerdict, Outcome, ProbeConfig, RadialGrid};
use crate::solver::{CentralValues, Solver, SolverError, SolverOptions};
use crate::transforms::{build_a, default_s_max, estimate_a_inf, estimate_f_inf, FTable, FTableConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionVerdict {
    Holds,
    Fails,
    Inconclusive,
    /// A precondition of the check failed, so it was not evaluated.
    NotApplicable,
}

impl ConditionVerdict {
    fn from_outcome(outcome: Outcome, holds_when: Outcome) -> Self {
        match outcome {
            Outcome::Inconclusive => Self::Inconclusive,
            o if o == holds_when => Self::Holds,
            _ => Self::Fails,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "Thm1-large")]
    Thm1Large,
    #[serde(rename = "Thm1-bounded")]
    Thm1Bounded,
    #[serde(rename = "Thm2-bounded")]
    Thm2Bounded,
    #[serde(rename = "Thm3-large")]
    Thm3Large,
    #[serde(rename = "Thm3-bounded")]
    Thm3Bounded,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Thm1Large => "Thm1-large",
            Verdict::Thm1Bounded => "Thm1-bounded",
            Verdict::Thm2Bounded => "Thm2-bounded",
            Verdict::Thm3Large => "Thm3-large",
            Verdict::Thm3Bounded => "Thm3-bounded",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_large(self) -> bool {
        matches!(self, Verdict::Thm1Large | Verdict::Thm3Large)
    }
}

/// Joint reading of the `A_j(∞)` probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierTails {
    AllFinite,
    AllInfinite,
    Mixed,
    Unknown,
}

fn barrier_tails(a_inf: &[DivergenceVerdict]) -> BarrierTails {
    if a_inf.iter().any(|v| v.outcome == Outcome::Inconclusive) {
        BarrierTails::Unknown
    } else if a_inf.iter().all(|v| v.converges()) {
        BarrierTails::AllFinite
    } else if a_inf.iter().all(|v| v.diverges()) {
        BarrierTails::AllInfinite
    } else {
        BarrierTails::Mixed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C6Report {
    pub verdict: ConditionVerdict,
    /// Feasible central values `(a/d, β_max)`.
    pub window: Option<(f64, f64)>,
    /// `F(∞) - F(dβ_max) - Σ A_j(∞)`; close to 0 unless the window is cut at the table end.
    pub g_at_max: Option<f64>,
    /// Bisection points `(β, g(β))`.
    pub trace: Vec<(f64, f64)>,
    /// Every feasible trace point lies below every infeasible one.
    pub antitone: bool,
    pub note: Option<String>,
}

impl C6Report {
    fn without_search(verdict: ConditionVerdict, note: impl Into<String>) -> Self {
        Self {
            verdict,
            window: None,
            g_at_max: None,
            trace: Vec::new(),
            antitone: true,
            note: Some(note.into()),
        }
    }
}

// Relative offset above a/d where the search starts.
const C6_START: f64 = 1e-9;
const C6_MAX_STEPS: usize = 200;

/// Searches for `β > a/d` with `Σ A_j(∞) < F(∞) - F(dβ)`.
///
/// `g(β) = F(∞) - F(dβ) - Σ A_j(∞)` is decreasing, so the feasible set is an
/// interval starting at `a/d`; its right end is found by bisection on the
/// tabulated `F`.
pub fn check_c6(spec: &ProblemSpec, table: &FTable, f_inf: &DivergenceVerdict, a_inf: &[DivergenceVerdict]) -> C6Report {
    match f_inf.outcome {
        Outcome::Diverges => return C6Report::without_search(ConditionVerdict::NotApplicable, "F(∞) = ∞ (C4 fails)"),
        Outcome::Inconclusive => return C6Report::without_search(ConditionVerdict::Inconclusive, "F(∞) probe inconclusive"),
        Outcome::Converges => {}
    }
    match barrier_tails(a_inf) {
        BarrierTails::AllFinite => {}
        BarrierTails::Unknown => {
            return C6Report::without_search(ConditionVerdict::Inconclusive, "A_j(∞) probe inconclusive")
        }
        _ => return C6Report::without_search(ConditionVerdict::NotApplicable, "some A_j(∞) = ∞ (C5 fails)"),
    }
    let f_limit = f_inf.limit.expect("convergent verdict carries a limit");
    let a_sum: f64 = a_inf.iter().map(|v| v.limit.expect("convergent verdict carries a limit")).sum();
    let d = spec.components() as f64;
    let beta_lo = spec.anchor() / d;

    let g = |t: &FTable, beta: f64| t.value(d * beta).map(|f| f_limit - f - a_sum);
    let start = beta_lo * (1.0 + C6_START);
    let g_start = match g(table, start) {
        Ok(v) => v,
        Err(e) => return C6Report::without_search(ConditionVerdict::Inconclusive, e.to_string()),
    };
    let mut report = C6Report {
        verdict: ConditionVerdict::Fails,
        window: None,
        g_at_max: None,
        trace: vec![(start, g_start)],
        antitone: true,
        note: None,
    };
    if g_start <= 0.0 {
        report.note = Some(format!(
            "Σ A_j(∞) = {a_sum:.6e} is not below F(∞) - F(a) = {:.6e}",
            g_start + a_sum
        ));
        return report;
    }

    // Upper bracket: a table reaching F(∞) - Σ A_j(∞), or its last node when
    // the left side is 0 and the window runs to the end of F's domain.
    let table = if a_sum > 0.0 {
        match table.covering_value(f_limit - a_sum, None) {
            Ok(t) => t,
            Err(e) => {
                report.verdict = ConditionVerdict::Inconclusive;
                report.note = Some(format!("cannot bracket β_max: {e}"));
                return report;
            }
        }
    } else {
        table.clone()
    };
    let beta_hi = table.s_max() / d;
    let g_hi = g(&table, beta_hi).expect("table covers its own end");
    report.trace.push((beta_hi, g_hi));
    report.verdict = ConditionVerdict::Holds;
    if g_hi > 0.0 {
        report.window = Some((beta_lo, beta_hi));
        report.g_at_max = Some(g_hi);
        report.note = Some("g > 0 up to the end of the tabulated F; β_max is the table boundary".into());
        return report;
    }

    let (mut lo, mut hi) = (start, beta_hi);
    for _ in 0..C6_MAX_STEPS {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(&table, mid).expect("bisection stays inside the table");
        report.trace.push((mid, gm));
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let largest_feasible = report.trace.iter().filter(|t| t.1 > 0.0).map(|t| t.0).fold(f64::MIN, f64::max);
    let smallest_infeasible = report.trace.iter().filter(|t| t.1 <= 0.0).map(|t| t.0).fold(f64::MAX, f64::min);
    report.antitone = largest_feasible < smallest_infeasible;
    report.window = Some((beta_lo, lo));
    report.g_at_max = g(&table, lo).ok();
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub verified: bool,
    pub samples: usize,
    pub failures: Vec<String>,
}

/// Sampled nonnegativity of `h_j`, `a_j` on `[0, r_max]` and nonnegativity
/// plus monotonicity of `f_j` on `[0, s_max]^d`.
pub fn check_hypotheses(spec: &ProblemSpec, r_max: f64, s_max: f64) -> HypothesisCheck {
    let d = spec.components();
    // about 1e5 points per nonlinearity
    let samples = ((1e5f64).powf(1.0 / d as f64).floor() as usize).clamp(2, 200);
    let radial = SampleBox::cube(0.0, r_max, 1);
    let diag = SampleBox::cube(0.0, s_max, d);
    let mut failures = Vec::new();
    for (j, c) in spec.iter().enumerate() {
        let checks = [
            ("h", &c.h, Property::Nonnegativity, &radial, 200),
            ("a", &c.a, Property::Nonnegativity, &radial, 200),
            ("f", &c.f, Property::Nonnegativity, &diag, samples),
            ("f", &c.f, Property::Monotone, &diag, samples),
        ];
        for (name, expr, property, domain, n) in checks {
            match validate_sampled(expr, property, domain, n) {
                Ok(r) if r.passed => {}
                Ok(r) => {
                    let w = r.witness.expect("failed report carries a witness");
                    failures.push(format!("{name}_{} {:?} fails at {:?} (value {:?})", j + 1, property, w.point, w.value));
                }
                Err(e) => failures.push(format!("{name}_{} {:?}: {e}", j + 1, property)),
            }
        }
    }
    HypothesisCheck {
        verified: failures.is_empty(),
        samples,
        failures,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Other results whose hypotheses also hold.
    pub also_applicable: Vec<Verdict>,
    pub c3: ConditionVerdict,
    pub c4: ConditionVerdict,
    pub c5: ConditionVerdict,
    pub c6: C6Report,
    pub sublinearity: SequenceReport,
    pub sup_bounded: SequenceReport,
    pub barrier_tails: BarrierTails,
    pub f_inf: DivergenceVerdict,
    pub a_inf: Vec<DivergenceVerdict>,
    pub beta_window: Option<(f64, f64)>,
    /// Whether the given equal central value lies in the C6 window.
    pub beta_in_window: Option<bool>,
    pub hypotheses: HypothesisCheck,
    pub notes: Vec<String>,
}

enum Candidate {
    Applies(Verdict),
    Fails(String),
    Unknown(String),
}

fn first_result(c3: ConditionVerdict, tails: BarrierTails) -> Candidate {
    match (c3, tails) {
        (ConditionVerdict::Holds, BarrierTails::AllFinite) => Candidate::Applies(Verdict::Thm1Bounded),
        (ConditionVerdict::Holds, BarrierTails::AllInfinite) => Candidate::Applies(Verdict::Thm1Large),
        (ConditionVerdict::Holds, BarrierTails::Mixed) => {
            Candidate::Unknown("C3 holds but A_j(∞) is finite for some j and infinite for others".into())
        }
        (ConditionVerdict::Holds, _) => Candidate::Unknown("A_j(∞) probes inconclusive".into()),
        (ConditionVerdict::Inconclusive, _) => Candidate::Unknown("F(∞) probe inconclusive".into()),
        _ => Candidate::Fails("C3 fails".into()),
    }
}

fn second_result(c4: ConditionVerdict, c5: ConditionVerdict, c6: ConditionVerdict) -> Candidate {
    let all = [c4, c5, c6];
    if all.iter().all(|c| *c == ConditionVerdict::Holds) {
        Candidate::Applies(Verdict::Thm2Bounded)
    } else if all.iter().any(|c| matches!(c, ConditionVerdict::Fails | ConditionVerdict::NotApplicable)) {
        Candidate::Fails("C4-C6 do not all hold".into())
    } else {
        Candidate::Unknown("C4-C6 partly inconclusive".into())
    }
}

fn third_result(tails: BarrierTails, sublinear: ConditionVerdict, sup: ConditionVerdict) -> Candidate {
    let (check, verdict, what) = match tails {
        BarrierTails::AllInfinite => (sublinear, Verdict::Thm3Large, "sublinearity"),
        BarrierTails::AllFinite => (sup, Verdict::Thm3Bounded, "bounded bracket"),
        BarrierTails::Mixed => return Candidate::Fails("A_j(∞) tails are mixed".into()),
        BarrierTails::Unknown => return Candidate::Unknown("A_j(∞) probes inconclusive".into()),
    };
    match check {
        ConditionVerdict::Holds => Candidate::Applies(verdict),
        ConditionVerdict::Inconclusive => Candidate::Unknown(format!("{what} check inconclusive")),
        _ => Candidate::Fails(format!("{what} check fails")),
    }
}

/// Evaluates C3-C6 and the growth conditions and maps them to a verdict.
///
/// With equal central values the order of preference is the first result,
/// then the second, then the third; other applicable results are listed in
/// `also_applicable`. Unequal central values are covered by the third only.
pub fn classify(
    spec: &ProblemSpec,
    beta: Option<&CentralValues>,
    cfg: &ProbeConfig,
    f_cfg: &FTableConfig,
) -> Classification {
    let d = spec.components();
    let f_inf = estimate_f_inf(spec, cfg);
    let a_inf: Vec<_> = (0..d).map(|j| estimate_a_inf(spec, j, cfg)).collect();
    let tails = barrier_tails(&a_inf);
    let mut notes = Vec::new();

    let c3 = ConditionVerdict::from_outcome(f_inf.outcome, Outcome::Diverges);
    let c4 = ConditionVerdict::from_outcome(f_inf.outcome, Outcome::Converges);
    let c5 = match tails {
        BarrierTails::AllFinite => ConditionVerdict::Holds,
        BarrierTails::Unknown => ConditionVerdict::Inconclusive,
        _ => ConditionVerdict::Fails,
    };
    let beta_max = beta.map_or(spec.anchor(), CentralValues::max);
    let s_max = default_s_max(spec, beta_max);
    let c6 = match FTable::build(Arc::new(spec.clone()), s_max, f_cfg.clone()) {
        Ok(table) => check_c6(spec, &table, &f_inf, &a_inf),
        Err(e) => C6Report::without_search(ConditionVerdict::Inconclusive, format!("F table: {e}")),
    };

    let s = geometric_sequence(cfg.r_start, cfg.sequence_points);
    let sublinearity = check_sublinearity(spec, &s, cfg.plateau_threshold, cfg.rho_conv);
    let sup_bounded = check_sup_bounded(spec, &s, cfg);

    let equal = beta.is_none_or(|b| b.common().is_some());
    let candidates = if equal {
        vec![
            first_result(c3, tails),
            second_result(c4, c5, c6.verdict),
            third_result(tails, sublinearity.verdict, sup_bounded.verdict),
        ]
    } else {
        notes.push("unequal central values: only the third result applies".into());
        vec![third_result(tails, sublinearity.verdict, sup_bounded.verdict)]
    };
    let mut applicable = Vec::new();
    for c in candidates {
        match c {
            Candidate::Applies(v) => applicable.push(v),
            Candidate::Fails(why) | Candidate::Unknown(why) => notes.push(why),
        }
    }
    let verdict = applicable.first().copied().unwrap_or(Verdict::Inconclusive);
    if verdict == Verdict::Inconclusive {
        notes.push("no result could be established from the probes".into());
    }
    let also_applicable = applicable.into_iter().skip(1).collect();

    let beta_window = c6.window.filter(|_| c6.verdict == ConditionVerdict::Holds);
    let beta_in_window = match (beta.and_then(CentralValues::common), beta_window) {
        (Some(b), Some((lo, hi))) => Some(b > lo && b < hi),
        _ => None,
    };
    if beta_in_window == Some(false) {
        notes.push("the given central value lies outside the C6 window".into());
    }
    let r_max = cfg.r_start * 2f64.powi(cfg.horizons as i32);
    let hypotheses = check_hypotheses(spec, r_max, s_max);
    if !hypotheses.verified {
        notes.push("hypotheses unverified".into());
    }

    Classification {
        verdict,
        also_applicable,
        c3,
        c4,
        c5,
        c6,
        sublinearity,
        sup_bounded,
        barrier_tails: tails,
        f_inf,
        a_inf,
        beta_window,
        beta_in_window,
        hypotheses,
        notes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthWitness {
    pub horizon: f64,
    /// `u_j(2R) - u_j(R)`.
    pub increase: Vec<f64>,
    /// `f_j(β)^{1/(p_j-1)} (A_j(2R) - A_j(R))`.
    pub required: Vec<f64>,
    pub holds: bool,
}

/// Solves on `[0, 2R]` and checks the lower-bound growth of each component
/// between `R` and `2R`, with slack `tol`.
pub fn growth_witness(
    spec: &ProblemSpec,
    beta: &CentralValues,
    horizon: f64,
    intervals: usize,
    opts: &SolverOptions,
) -> Result<GrowthWitness, SolverError> {
    let grid = Arc::new(RadialGrid::new(2.0 * horizon, 2 * intervals).map_err(crate::transforms::TransformError::from)?);
    let bundle = Solver::new(spec, &grid)?.iterate(beta, opts)?;
    let mid = grid.nearest_index(horizon);
    let last = grid.len() - 1;
    let mut increase = Vec::new();
    let mut required = Vec::new();
    for j in 0..spec.components() {
        let c = spec.component(j);
        let f = c.f.eval(beta.as_slice()).map_err(|source| SolverError::Expr {
            component: j + 1,
            r: 0.0,
            source,
        })?;
        let a = build_a(spec, &grid, j)?;
        let u = bundle.u[j].values();
        increase.push(u[last] - u[mid]);
        required.push(f.max(0.0).powf(1.0 / (c.p - 1.0)) * (a.values()[last] - a.values()[mid]));
    }
    let holds = bundle.converged && increase.iter().zip(&required).all(|(i, r)| *i >= r - opts.tol);
    Ok(GrowthWitness {
        horizon,
        increase,
        required,
        holds,
    })
}
