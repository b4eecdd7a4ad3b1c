//! A small expression language for radial coefficients `h_j(r)`, `a_j(r)` and
//! nonlinearities `f_j(u1, ..., ud)`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | ident | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func   := exp | log | sqrt | abs | min | max
//! ident  := r | u1 .. ud
//! ```
//!
//! `^` is right-associative, there is no implicit multiplication and
//! whitespace is insignificant. Evaluation is real-valued: any operation
//! whose result would be NaN or infinite is reported as a [`ExprError::Domain`].

mod parse;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::parse;
pub use validate::{validate_sampled, Property, SampleBox, ValidationReport, Witness};

/// Which variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Functions of the radius `r` only.
    Radial,
    /// Functions of `u1, ..., ud`.
    Nonlinearity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub(crate) fn is_variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree. Variables are stored by slot: `r` is slot 0 for radial
/// expressions, `u{k}` is slot `k - 1` for nonlinearities.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Call(Func, Vec<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown variable `{name}` at position {position} (allowed: {allowed})")]
    UnknownVariable {
        name: String,
        position: usize,
        allowed: String,
    },
    #[error("unknown function `{name}` at position {position}")]
    UnknownFunction { name: String, position: usize },
    #[error("`{func}` at position {position} takes {expected} argument(s), got {got}")]
    Arity {
        func: &'static str,
        position: usize,
        expected: &'static str,
        got: usize,
    },
    #[error("domain error in `{subexpr}` at {inputs}: {reason}")]
    Domain {
        subexpr: String,
        inputs: String,
        reason: &'static str,
    },
    #[error("expected {expected} variable value(s), got {got}")]
    Env { expected: usize, got: usize },
    #[error("empty expression")]
    Empty,
}

const NON_FINITE: &str = "non-finite result";

impl ExprError {
    /// Whether evaluation failed only because the result overflowed.
    pub fn is_overflow(&self) -> bool {
        matches!(self, ExprError::Domain { reason, .. } if *reason == NON_FINITE)
    }
}

/// A parsed expression together with the variable set it was checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    role: Role,
    arity: usize,
}

impl Expr {
    pub(crate) fn new(root: Node, role: Role, arity: usize) -> Self {
        Self { root, role, arity }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Number of variables the expression is evaluated on (1 for radial).
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_constant_zero(&self) -> bool {
        matches!(self.root, Node::Const(c) if c == 0.0)
    }

    /// Evaluates at the given variable assignment (`[r]` or `[u1, ..., ud]`).
    pub fn eval(&self, vars: &[f64]) -> Result<f64, ExprError> {
        if vars.len() != self.arity {
            return Err(ExprError::Env {
                expected: self.arity,
                got: vars.len(),
            });
        }
        eval_node(&self.root, vars).map_err(|fault| fault.into_error(self.role, vars))
    }

    pub fn eval_radial(&self, r: f64) -> Result<f64, ExprError> {
        self.eval(&[r])
    }

    /// Evaluates a nonlinearity on the diagonal `(s, ..., s)`.
    pub fn eval_diagonal(&self, s: f64) -> Result<f64, ExprError> {
        let point = vec![s; self.arity];
        self.eval(&point)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, self.role, f)
    }
}

pub(crate) fn variable_name(role: Role, slot: usize) -> String {
    match role {
        Role::Radial => "r".to_string(),
        Role::Nonlinearity => format!("u{}", slot + 1),
    }
}

struct Fault<'a> {
    node: &'a Node,
    reason: &'static str,
}

impl Fault<'_> {
    fn into_error(self, role: Role, vars: &[f64]) -> ExprError {
        let inputs = vars
            .iter()
            .enumerate()
            .map(|(slot, v)| format!("{}={v:?}", variable_name(role, slot)))
            .collect::<Vec<_>>()
            .join(", ");
        ExprError::Domain {
            subexpr: Printed(self.node, role).to_string(),
            inputs,
            reason: self.reason,
        }
    }
}

fn fault<'a>(node: &'a Node, reason: &'static str) -> Fault<'a> {
    Fault { node, reason }
}

fn eval_node<'a>(node: &'a Node, vars: &[f64]) -> Result<f64, Fault<'a>> {
    let value = match node {
        Node::Const(c) => *c,
        Node::Var(slot) => vars[*slot],
        Node::Neg(inner) => -eval_node(inner, vars)?,
        Node::Call(func, args) => {
            let first = eval_node(&args[0], vars)?;
            match func {
                Func::Exp => first.exp(),
                Func::Log => {
                    if first <= 0.0 {
                        return Err(fault(node, "logarithm of a non-positive argument"));
                    }
                    first.ln()
                }
                Func::Sqrt => {
                    if first < 0.0 {
                        return Err(fault(node, "square root of a negative argument"));
                    }
                    first.sqrt()
                }
                Func::Abs => first.abs(),
                Func::Min | Func::Max => {
                    let mut acc = first;
                    for arg in &args[1..] {
                        let v = eval_node(arg, vars)?;
                        acc = if *func == Func::Min { acc.min(v) } else { acc.max(v) };
                    }
                    acc
                }
            }
        }
        Node::Binary(op, lhs, rhs) => {
            let a = eval_node(lhs, vars)?;
            let b = eval_node(rhs, vars)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(fault(node, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a < 0.0 && b.fract() != 0.0 {
                        return Err(fault(node, "negative base with non-integer exponent"));
                    }
                    if a == 0.0 && b < 0.0 {
                        return Err(fault(node, "zero raised to a negative power"));
                    }
                    a.powf(b)
                }
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(fault(node, NON_FINITE))
    }
}

struct Printed<'a>(&'a Node, Role);

impl fmt::Display for Printed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(self.0, self.1, f)
    }
}

fn is_atomic(node: &Node) -> bool {
    matches!(node, Node::Const(_) | Node::Var(_) | Node::Call(..))
}

fn write_operand(node: &Node, role: Role, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_atomic(node) {
        write_node(node, role, f)
    } else {
        f.write_str("(")?;
        write_node(node, role, f)?;
        f.write_str(")")
    }
}

// Prints a fully disambiguated form: every compound operand is wrapped in
// parentheses, so reparsing gives back the same tree.
fn write_node(node: &Node, role: Role, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Const(c) => write!(f, "{c:?}"),
        Node::Var(slot) => f.write_str(&variable_name(role, *slot)),
        Node::Neg(inner) => {
            f.write_str("-")?;
            write_operand(inner, role, f)
        }
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_node(arg, role, f)?;
            }
            f.write_str(")")
        }
        Node::Binary(op, lhs, rhs) => {
            write_operand(lhs, role, f)?;
            write!(f, " {} ", op.symbol())?;
            write_operand(rhs, role, f)
        }
    }
}
