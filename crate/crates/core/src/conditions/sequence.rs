//! Growth of the diagonal bracket `Σ_i (1 + f_i(s, ..., s))^{1/(min p - 1)}`
//! along a geometric `s` sequence.

use serde::Serialize;

use super::ConditionVerdict;
use crate::problem::ProblemSpec;
use crate::quadrature::{verdict_from_partials, Outcome, ProbeConfig};

// Fewest usable sequence points before a verdict is attempted.
const MIN_POINTS: usize = 6;
const NONINCREASING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceReport {
    pub verdict: ConditionVerdict,
    pub s: Vec<f64>,
    /// The sequence actually inspected (ratio or bracket values).
    pub values: Vec<f64>,
    /// Extrapolated limit of `values`, when the tail settles.
    pub limit: Option<f64>,
    pub note: Option<String>,
}

/// `s_k = start * 2^k` for `k = 0..points`.
pub fn geometric_sequence(start: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| start * 2f64.powi(k as i32)).collect()
}

/// The bracket at one `s`.
pub fn diagonal_bracket(spec: &ProblemSpec, s: f64) -> Result<f64, String> {
    let e = spec.growth_exponent();
    let mut total = 0.0;
    for c in spec.iter() {
        let f = c.f.eval_diagonal(s).map_err(|e| e.to_string())?;
        let term = (1.0 + f).powf(e);
        if !term.is_finite() {
            return Err(format!("bracket term is {term:?} at s = {s:?}"));
        }
        total += term;
    }
    Ok(total)
}

/// Evaluates the bracket along `s`, truncating at the first failure.
fn sampled(spec: &ProblemSpec, s: &[f64]) -> (Vec<f64>, Vec<f64>, Option<String>) {
    let mut xs = Vec::with_capacity(s.len());
    let mut ys = Vec::with_capacity(s.len());
    for &x in s {
        match diagonal_bracket(spec, x) {
            Ok(y) => {
                xs.push(x);
                ys.push(y);
            }
            Err(e) => return (xs, ys, Some(format!("sequence truncated: {e}"))),
        }
    }
    (xs, ys, None)
}

/// `lim_{s→∞} bracket(s) / s = 0`.
///
/// Holds when the tail of the ratio is strictly decreasing and ends below
/// `threshold`; fails when it is non-decreasing or settles geometrically on
/// a value at or above `threshold`.
pub fn check_sublinearity(spec: &ProblemSpec, s: &[f64], threshold: f64, rho_conv: f64) -> SequenceReport {
    let (xs, brackets, mut note) = sampled(spec, s);
    let values: Vec<f64> = brackets.iter().zip(&xs).map(|(b, x)| b / x).collect();
    let mut report = SequenceReport {
        verdict: ConditionVerdict::Inconclusive,
        s: xs,
        values,
        limit: None,
        note: None,
    };
    let n = report.values.len();
    if n < MIN_POINTS {
        report.note = Some(note.unwrap_or_default() + &format!(" (only {n} usable points)"));
        return report;
    }
    let tail = &report.values[n - n.div_ceil(2)..];
    let last = tail[tail.len() - 1];

    if tail.windows(2).all(|w| w[1] < w[0]) {
        if last < threshold {
            report.verdict = ConditionVerdict::Holds;
        } else {
            let drops: Vec<f64> = tail.windows(2).map(|w| w[0] - w[1]).collect();
            let geometric = drops.windows(2).all(|w| w[1] <= rho_conv * w[0]);
            if geometric {
                let q = drops[drops.len() - 1] / drops[drops.len() - 2];
                let limit = last - drops[drops.len() - 1] * q / (1.0 - q);
                report.limit = Some(limit);
                if limit >= threshold {
                    report.verdict = ConditionVerdict::Fails;
                    note.get_or_insert_with(|| format!("ratio settles near {limit:.6}"));
                }
            }
            if report.verdict == ConditionVerdict::Inconclusive {
                note.get_or_insert_with(|| format!("ratio decreasing but still {last:.3e} >= {threshold:e}"));
            }
        }
    } else if tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - NONINCREASING_SLACK)) {
        report.verdict = ConditionVerdict::Fails;
        note.get_or_insert_with(|| "ratio does not decrease along the tail".to_string());
    } else {
        note.get_or_insert_with(|| "ratio tail is not monotone".to_string());
    }
    report.note = note;
    report
}

/// `sup_{s >= 0} bracket(s) < ∞`, sampled at `0` and along `s`.
///
/// The bracket increments are read like partial integrals: geometric decay
/// means a finite plateau (holds), non-decreasing increments mean growth
/// (fails).
pub fn check_sup_bounded(spec: &ProblemSpec, s: &[f64], cfg: &ProbeConfig) -> SequenceReport {
    let mut points = Vec::with_capacity(s.len() + 1);
    points.push(0.0);
    points.extend_from_slice(s);
    let (xs, values, note) = sampled(spec, &points);
    let mut report = SequenceReport {
        verdict: ConditionVerdict::Inconclusive,
        s: xs,
        values,
        limit: None,
        note,
    };
    let n = report.values.len();
    if n < MIN_POINTS {
        report.note = Some(report.note.unwrap_or_default() + &format!(" (only {n} usable points)"));
        return report;
    }
    let base = report.values[0];
    let partials = report.values[1..].iter().map(|v| v - base).collect();
    let probe_cfg = ProbeConfig {
        tail: Some(cfg.tail_len().min(n - 2).max(1)),
        ..cfg.clone()
    };
    let verdict = verdict_from_partials(report.s[1..].to_vec(), partials, base, &probe_cfg);
    match verdict.outcome {
        Outcome::Converges => {
            report.verdict = ConditionVerdict::Holds;
            let max = report.values.iter().copied().fold(f64::MIN, f64::max);
            report.limit = verdict.limit.map(|l| l.max(max));
        }
        Outcome::Diverges => {
            report.verdict = ConditionVerdict::Fails;
            report.note.get_or_insert_with(|| "bracket keeps growing".to_string());
        }
        Outcome::Inconclusive => {
            if let Some(n) = verdict.note {
                report.note = Some(n);
            }
        }
    }
    report
}
