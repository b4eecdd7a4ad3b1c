use serde::Serialize;

use super::{Expr, ExprError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Nonnegativity,
    /// Non-decreasing in every variable.
    Monotone,
}

/// A finite box `[lo_0, hi_0] x ... x [lo_k, hi_k]` in variable space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBox {
    pub bounds: Vec<(f64, f64)>,
}

impl SampleBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self { bounds }
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Self {
        Self {
            bounds: vec![(lo, hi); dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub value: f64,
    /// For monotonicity: the lower neighbour along the offending axis and its
    /// value, which exceeds `value`.
    pub predecessor: Option<(Vec<f64>, f64)>,
    /// Size of the violation (always > 0).
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub property: Property,
    pub grid: String,
    pub passed: bool,
    pub witness: Option<Witness>,
}

/// Checks `property` on the tensor grid with `samples` equispaced points per
/// axis (endpoints included). Monotonicity compares every pair of grid
/// neighbours along each axis. A pass is evidence only.
pub fn validate_sampled(
    expr: &Expr,
    property: Property,
    domain: &SampleBox,
    samples: usize,
) -> Result<ValidationReport, ExprError> {
    let dim = domain.bounds.len();
    assert_eq!(dim, expr.arity(), "sample box dimension must match the expression arity");
    assert!(samples >= 2, "at least two samples per axis are required");

    let axes: Vec<Vec<f64>> = domain
        .bounds
        .iter()
        .map(|&(lo, hi)| {
            (0..samples)
                .map(|i| {
                    if i + 1 == samples {
                        hi
                    } else {
                        lo + (hi - lo) * i as f64 / (samples - 1) as f64
                    }
                })
                .collect()
        })
        .collect();

    let total = samples.pow(dim as u32);
    let mut values = Vec::with_capacity(total);
    let mut index = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    for flat in 0..total {
        unflatten(flat, samples, &mut index);
        for (k, &i) in index.iter().enumerate() {
            point[k] = axes[k][i];
        }
        values.push(expr.eval(&point)?);
    }

    let point_at = |flat: usize| -> Vec<f64> {
        let mut idx = vec![0usize; dim];
        unflatten(flat, samples, &mut idx);
        idx.iter().enumerate().map(|(k, &i)| axes[k][i]).collect()
    };

    let mut worst: Option<(usize, Option<usize>, f64)> = None;
    match property {
        Property::Nonnegativity => {
            for (flat, &v) in values.iter().enumerate() {
                if v < 0.0 && worst.is_none_or(|(_, _, w)| -v > w) {
                    worst = Some((flat, None, -v));
                }
            }
        }
        Property::Monotone => {
            let mut stride = 1;
            for _axis in 0..dim {
                for flat in 0..total {
                    if (flat / stride) % samples == 0 {
                        continue;
                    }
                    let prev = flat - stride;
                    let drop = values[prev] - values[flat];
                    if drop > 0.0 && worst.is_none_or(|(_, _, w)| drop > w) {
                        worst = Some((flat, Some(prev), drop));
                    }
                }
                stride *= samples;
            }
        }
    }

    let grid = format!(
        "{samples} points per axis on {}",
        domain
            .bounds
            .iter()
            .map(|(lo, hi)| format!("[{lo}, {hi}]"))
            .collect::<Vec<_>>()
            .join(" x ")
    );
    let witness = worst.map(|(flat, prev, violation)| Witness {
        point: point_at(flat),
        value: values[flat],
        predecessor: prev.map(|p| (point_at(p), values[p])),
        violation,
    });
    Ok(ValidationReport {
        property,
        grid,
        passed: witness.is_none(),
        witness,
    })
}

// Axis 0 varies fastest.
fn unflatten(mut flat: usize, samples: usize, index: &mut [usize]) {
    for slot in index.iter_mut() {
        *slot = flat % samples;
        flat /= samples;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::{parse, Role};

    #[test]
    fn linear_sum_is_monotone() {
        let e = parse("u1 + u2", Role::Nonlinearity, 2).unwrap();
        let report = validate_sampled(&e, Property::Monotone, &SampleBox::cube(0.0, 10.0, 2), 50).unwrap();
        assert!(report.passed);
        assert!(report.witness.is_none());
    }

    #[test]
    fn sign_change_is_caught() {
        let e = parse("1 - r", Role::Radial, 1).unwrap();
        let report =
            validate_sampled(&e, Property::Nonnegativity, &SampleBox::cube(0.0, 10.0, 1), 50).unwrap();
        assert!(!report.passed);
        let w = report.witness.unwrap();
        assert!(w.point[0] > 1.0);
        assert_eq!(w.point[0], 10.0);
        assert!(e.eval(&w.point).unwrap() < 0.0);
    }

    #[test]
    fn decreasing_function_fails_monotonicity() {
        let e = parse("exp(-r)", Role::Radial, 1).unwrap();
        let report = validate_sampled(&e, Property::Monotone, &SampleBox::cube(0.0, 10.0, 1), 50).unwrap();
        assert!(!report.passed);
        let w = report.witness.unwrap();
        let (prev_point, prev_value) = w.predecessor.unwrap();
        assert!(prev_point[0] < w.point[0]);
        assert!(prev_value - w.value > 0.0);
        assert_eq!(w.violation, prev_value - w.value);
    }

    #[test]
    fn monotone_check_sees_second_axis() {
        let e = parse("u1 - u2", Role::Nonlinearity, 2).unwrap();
        let report = validate_sampled(&e, Property::Monotone, &SampleBox::cube(0.0, 1.0, 2), 5).unwrap();
        assert!(!report.passed);
        let w = report.witness.unwrap();
        let (prev, _) = w.predecessor.unwrap();
        assert_eq!(prev[0], w.point[0]);
        assert!(prev[1] < w.point[1]);
    }

    #[test]
    fn evaluation_errors_propagate() {
        let e = parse("log(r)", Role::Radial, 1).unwrap();
        assert!(validate_sampled(&e, Property::Nonnegativity, &SampleBox::cube(0.0, 1.0, 1), 4).is_err());
    }
}
