use crate::exprlang::{parse, Expr, ExprError, Role};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("space dimension N must be at least 3, got {0}")]
    Dimension(usize),
    #[error("at least one component is required")]
    NoComponents,
    #[error("exponent p_{index} must be a finite real > 1, got {value}")]
    Exponent { index: usize, value: f64 },
    #[error("anchor a must be a finite real > 0, got {0}")]
    Anchor(f64),
    #[error("{field} has {got} entries for {expected} components")]
    Count {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{field}_{index}: {source}")]
    Expr {
        field: &'static str,
        index: usize,
        source: ExprError,
    },
}

/// One equation `Δ_p u_j + h_j |∇u_j|^{p-1} = a_j f_j(u_1..u_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub p: f64,
    pub h: Expr,
    pub a: Expr,
    pub f: Expr,
}

/// A full system instance on `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    dimension: usize,
    components: Vec<Component>,
    anchor: f64,
}

impl ProblemSpec {
    pub fn new(dimension: usize, components: Vec<Component>, anchor: f64) -> Result<Self, ProblemError> {
        if dimension < 3 {
            return Err(ProblemError::Dimension(dimension));
        }
        if components.is_empty() {
            return Err(ProblemError::NoComponents);
        }
        for (index, c) in components.iter().enumerate() {
            if !(c.p.is_finite() && c.p > 1.0) {
                return Err(ProblemError::Exponent {
                    index: index + 1,
                    value: c.p,
                });
            }
        }
        if !(anchor.is_finite() && anchor > 0.0) {
            return Err(ProblemError::Anchor(anchor));
        }
        Ok(Self {
            dimension,
            components,
            anchor,
        })
    }

    /// Builds a spec from expression text, one entry per component.
    pub fn from_text(
        dimension: usize,
        p: &[f64],
        h: &[&str],
        a: &[&str],
        f: &[&str],
        anchor: f64,
    ) -> Result<Self, ProblemError> {
        let d = p.len();
        if d == 0 {
            return Err(ProblemError::NoComponents);
        }
        for (field, got) in [("h", h.len()), ("a", a.len()), ("f", f.len())] {
            if got != d {
                return Err(ProblemError::Count { field, expected: d, got });
            }
        }
        let parse_at = |field: &'static str, index: usize, text: &str, role| {
            parse(text, role, d).map_err(|source| ProblemError::Expr {
                field,
                index: index + 1,
                source,
            })
        };
        let components = (0..d)
            .map(|j| {
                Ok(Component {
                    p: p[j],
                    h: parse_at("h", j, h[j], Role::Radial)?,
                    a: parse_at("a", j, a[j], Role::Radial)?,
                    f: parse_at("f", j, f[j], Role::Nonlinearity)?,
                })
            })
            .collect::<Result<Vec<_>, ProblemError>>()?;
        Self::new(dimension, components, anchor)
    }

    /// `N`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `d`.
    pub fn components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &Component {
        &self.components[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Component> {
        self.components.iter()
    }

    /// Lower limit `a` of the integral defining `F`.
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn min_p(&self) -> f64 {
        self.components.iter().map(|c| c.p).fold(f64::INFINITY, f64::min)
    }

    /// `1 / (min p - 1)`, the exponent applied to `1 + Σ f_j` throughout.
    pub fn growth_exponent(&self) -> f64 {
        1.0 / (self.min_p() - 1.0)
    }

    /// `1 + Σ_j f_j(s, ..., s)`.
    pub fn diagonal_sum(&self, s: f64) -> Result<f64, ExprError> {
        let mut total = 1.0;
        for c in &self.components {
            total += c.f.eval_diagonal(s)?;
        }
        Ok(total)
    }

    pub fn with_anchor(&self, anchor: f64) -> Result<Self, ProblemError> {
        Self::new(self.dimension, self.components.clone(), anchor)
    }
}
