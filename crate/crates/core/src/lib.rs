//! Radial solutions of quasilinear systems
//!
//! ```text
//! Δ_{p_j} u_j + h_j(r) |∇u_j|^{p_j - 1} = a_j(r) f_j(u_1, ..., u_d)   on R^N
//! ```
//!
//! built by monotone successive approximation of the equivalent integral
//! system, with tabulated barrier functions, sandwich-bound and residual
//! verification, and finite-horizon probes that decide which existence
//! result covers an instance and whether its solution is bounded or large.
//!
//! The runnable programs under `examples/` walk through each capability; the
//! `plap-radial` binary drives everything from a JSON config.

pub mod cli;
pub mod conditions;
pub mod config;
pub mod exprlang;
pub mod kernel;
pub mod problem;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod transforms;
pub mod verify;

pub use conditions::{classify, Classification, ConditionVerdict, Verdict};
pub use config::{ConfigError, Run, RunConfig};
pub use exprlang::{parse, Expr, ExprError, Role};
pub use problem::{Component, ProblemError, ProblemSpec};
pub use quadrature::{DivergenceVerdict, GridFunction, Outcome, ProbeConfig, RadialGrid};
pub use solver::{iterate, CentralValues, SolutionBundle, Solver, SolverError, SolverOptions};
pub use transforms::{FTable, FTableConfig, TransformTables};
pub use verify::{VerificationReport, VerifyOptions};
