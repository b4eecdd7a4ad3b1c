//! Classical growth conditions and the nested-integral criterion for the
//! two-component Lane-Emden type system, each as a divergence probe.

use serde::Serialize;

use super::ConditionVerdict;
use crate::exprlang::{BinOp, Expr, Node};
use crate::problem::ProblemSpec;
use crate::quadrature::{
    cumulative_trapezoid, probe_divergence, running_integral, DivergenceVerdict, Outcome, ProbeConfig, ProbeGrid,
};

/// Probes `∫_{r_start}^∞ k(s) ds` where `k` needs `G(s) = ∫_0^s g` from the
/// origin. `k(s, G(s))` may fail, which yields an inconclusive verdict.
fn nested_probe<E: ToString>(
    r_start: f64,
    cfg: &ProbeConfig,
    g: impl Fn(f64) -> Result<f64, E>,
    k: impl Fn(f64, f64) -> Result<f64, String>,
) -> DivergenceVerdict {
    let grid = ProbeGrid::from_origin(r_start, cfg);
    let nodes = grid.nodes();
    let inner = match running_integral(nodes, |s| g(s).map_err(|e| e.to_string())) {
        Ok(v) => v,
        Err(e) => return DivergenceVerdict::inconclusive(format!("inner integral failed: {e}")),
    };
    let start = grid.start_index();
    let mut outer = vec![0.0; nodes.len()];
    for i in start..nodes.len() {
        match k(nodes[i], inner[i]) {
            Ok(v) if v.is_finite() => outer[i] = v,
            Ok(v) => return DivergenceVerdict::inconclusive(format!("integrand value {v:?} at s = {:?}", nodes[i])),
            Err(e) => return DivergenceVerdict::inconclusive(format!("integrand failed at s = {:?}: {e}", nodes[i])),
        }
    }
    let mut cumulative = vec![0.0; nodes.len()];
    let tail = cumulative_trapezoid(&nodes[start..], &outer[start..]);
    cumulative[start..].copy_from_slice(&tail);
    grid.verdict(&cumulative, cfg)
}

fn reciprocal(value: f64, what: &str) -> Result<f64, String> {
    if value > 0.0 {
        Ok(1.0 / value)
    } else {
        Err(format!("zero denominator ({what} = {value:?})"))
    }
}

/// `∫_1^∞ (∫_0^s f)^{-1/2} ds`.
pub fn check_keller_osserman<E: ToString>(f: impl Fn(f64) -> Result<f64, E>, cfg: &ProbeConfig) -> DivergenceVerdict {
    nested_probe(1.0, cfg, f, |_, inner| reciprocal(inner.sqrt(), "∫_0^s f"))
}

/// `∫_1^∞ dt / f(t)`.
pub fn check_ye_zhou<E: ToString>(f: impl Fn(f64) -> Result<f64, E>, cfg: &ProbeConfig) -> DivergenceVerdict {
    probe_divergence(|t| f(t).map_err(|e| e.to_string()).and_then(|v| reciprocal(v, "f")), 1.0, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Contradiction,
    NotApplicable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemarkReport {
    pub c3: ConditionVerdict,
    /// `∫_a^∞ ds / f_j^{1/(min p - 1)}(s, ..., s)` per component.
    pub first: Vec<DivergenceVerdict>,
    /// `∫_a^∞ dt / (∫_0^t f_j(s, ..., s) ds)^{1/min p}` per component.
    pub second: Vec<DivergenceVerdict>,
    pub status: Consistency,
    pub note: Option<String>,
}

/// Under a diverging `F`, both integrals must diverge for every component.
/// A convergent one is flagged as a numerical contradiction.
pub fn check_remark_implications(spec: &ProblemSpec, c3: ConditionVerdict, cfg: &ProbeConfig) -> RemarkReport {
    let e = spec.growth_exponent();
    let min_p = spec.min_p();
    let a = spec.anchor();
    let first: Vec<_> = spec
        .iter()
        .map(|c| {
            probe_divergence(
                |s| {
                    let f = c.f.eval_diagonal(s).map_err(|e| e.to_string())?;
                    reciprocal(f.powf(e), "f_j^{1/(min p - 1)}")
                },
                a,
                cfg,
            )
        })
        .collect();
    let second: Vec<_> = spec
        .iter()
        .map(|c| {
            nested_probe(
                a,
                cfg,
                |s| c.f.eval_diagonal(s),
                |_, inner| reciprocal(inner.powf(1.0 / min_p), "∫_0^t f_j"),
            )
        })
        .collect();

    let all = || first.iter().chain(&second);
    let (status, note) = match c3 {
        ConditionVerdict::Fails | ConditionVerdict::NotApplicable => {
            (Consistency::NotApplicable, Some("F(∞) < ∞, so the implication is vacuous".to_string()))
        }
        ConditionVerdict::Inconclusive => (Consistency::Inconclusive, Some("C3 verdict is inconclusive".to_string())),
        ConditionVerdict::Holds => {
            if all().any(|v| v.converges()) {
                (
                    Consistency::Contradiction,
                    Some("F(∞) = ∞ but a remark integral converges; investigate probe resolution".to_string()),
                )
            } else if all().all(|v| v.diverges()) {
                (Consistency::Consistent, None)
            } else {
                let why = all().find_map(|v| v.note.clone());
                (Consistency::Inconclusive, why)
            }
        }
    };
    RemarkReport {
        c3,
        first,
        second,
        status,
        note,
    }
}

/// `Δu_1 = a_1(|x|) u_2^α`, `Δu_2 = a_2(|x|) u_1^β` on `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LairInstance {
    pub a1: Expr,
    pub a2: Expr,
    pub alpha: f64,
    pub beta: f64,
    pub dimension: usize,
}

fn power_of(node: &Node, var: usize) -> Option<f64> {
    match node {
        Node::Var(v) if *v == var => Some(1.0),
        Node::Binary(BinOp::Pow, base, exp) => match (base.as_ref(), exp.as_ref()) {
            (Node::Var(v), Node::Const(c)) if *v == var => Some(*c),
            _ => None,
        },
        _ => None,
    }
}

impl LairInstance {
    /// Recognizes a spec of this form: `d = 2`, `p = (2, 2)`, `h ≡ 0`,
    /// `f_1 = u2^α`, `f_2 = u1^β`.
    pub fn from_spec(spec: &ProblemSpec) -> Option<Self> {
        if spec.components() != 2 {
            return None;
        }
        let (c1, c2) = (spec.component(0), spec.component(1));
        if c1.p != 2.0 || c2.p != 2.0 || !c1.h.is_constant_zero() || !c2.h.is_constant_zero() {
            return None;
        }
        Some(Self {
            a1: c1.a.clone(),
            a2: c2.a.clone(),
            alpha: power_of(c1.f.root(), 1)?,
            beta: power_of(c2.f.root(), 0)?,
            dimension: spec.dimension(),
        })
    }

    pub fn exponents_in_range(&self) -> bool {
        [self.alpha, self.beta].iter().all(|e| *e > 0.0 && *e <= 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LairReport {
    pub alpha: f64,
    pub beta: f64,
    pub first: DivergenceVerdict,
    pub second: DivergenceVerdict,
    /// `Some(true)` when both integrals diverge, `Some(false)` when either
    /// converges.
    pub explosive: Option<bool>,
    pub exponents_in_range: bool,
    pub note: Option<String>,
}

/// `∫^∞ t a(t) (t^{2-N} ∫_0^t s^{N-3} ∫_0^s τ b(τ) dτ ds)^e dt`.
fn lair_integral(a: &Expr, b: &Expr, e: f64, n: usize, cfg: &ProbeConfig) -> DivergenceVerdict {
    let grid = ProbeGrid::new(cfg);
    let nodes = grid.nodes();
    let eval = |x: &Expr, t: f64| x.eval_radial(t).map_err(|e| e.to_string());
    let inner = match running_integral(nodes, |t| Ok::<_, String>(t * eval(b, t)?)) {
        Ok(v) => v,
        Err(e) => return DivergenceVerdict::inconclusive(format!("a_2 failed: {e}")),
    };
    let weighted: Vec<f64> = nodes
        .iter()
        .zip(&inner)
        .map(|(s, i)| s.powi(n as i32 - 3) * i)
        .collect();
    let middle = cumulative_trapezoid(nodes, &weighted);
    let mut outer = vec![0.0; nodes.len()];
    for (i, &t) in nodes.iter().enumerate().skip(1) {
        let coef = match eval(a, t) {
            Ok(v) => v,
            Err(e) => return DivergenceVerdict::inconclusive(format!("a_1 failed at t = {t:?}: {e}")),
        };
        outer[i] = t * coef * (t.powi(2 - n as i32) * middle[i]).powf(e);
    }
    if outer.iter().any(|v| !v.is_finite()) {
        return DivergenceVerdict::inconclusive("non-finite nested integrand");
    }
    grid.verdict(&cumulative_trapezoid(nodes, &outer), cfg)
}

pub fn check_lair_proposition(inst: &LairInstance, cfg: &ProbeConfig) -> LairReport {
    let n = inst.dimension;
    let first = lair_integral(&inst.a1, &inst.a2, inst.alpha, n, cfg);
    let second = lair_integral(&inst.a2, &inst.a1, inst.beta, n, cfg);
    let explosive = match (first.outcome, second.outcome) {
        (Outcome::Diverges, Outcome::Diverges) => Some(true),
        (Outcome::Converges, _) | (_, Outcome::Converges) => Some(false),
        _ => None,
    };
    let exponents_in_range = inst.exponents_in_range();
    LairReport {
        alpha: inst.alpha,
        beta: inst.beta,
        first,
        second,
        explosive,
        exponents_in_range,
        note: (!exponents_in_range).then(|| "exponents outside (0, 1]; criterion reported but not proven there".into()),
    }
}
