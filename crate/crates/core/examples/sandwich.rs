//! A bounded solution pinned between β + f(β)^{1/(p-1)} A(r) and
//! F^{-1}(F(dβ) + Σ A(r)), together with its residuals.

use std::sync::Arc;

use plap_radial::transforms::default_s_max;
use plap_radial::verify::verify_bundle;
use plap_radial::{
    classify, CentralValues, FTableConfig, ProbeConfig, ProblemSpec, RadialGrid, Solver, SolverOptions,
    TransformTables, VerifyOptions,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProblemSpec::from_text(3, &[2.0], &["0"], &["(1 + r)^(-4)"], &["u1^3"], 1.0)?;
    let probes = ProbeConfig::default();
    let c = classify(&spec, None, &probes, &FTableConfig::default());
    let (lo, hi) = c.beta_window.ok_or("no feasible window")?;
    println!("{}: β window ({lo}, {hi:.6})", c.verdict.label());

    let grid = Arc::new(RadialGrid::new(20.0, 4000)?);
    let solver = Solver::new(&spec, &grid)?;
    for beta in [1.1, 0.5 * (lo + hi), hi - 0.01] {
        let beta = CentralValues::equal(beta, 1)?;
        let tables = TransformTables::build(&spec, &grid, &probes, &FTableConfig::default(), default_s_max(&spec, beta.max()))?;
        let bundle = solver.iterate(&beta, &SolverOptions::default())?;
        let report = verify_bundle(&solver, &tables, &bundle, 1e-10, &VerifyOptions::default())?;
        println!(
            "β = {:.4}: u(20) = {:.6}, lower margin {:.2e}, upper margin {:.2e}, integral residual {:.1e}, passed {}",
            beta.as_slice()[0],
            bundle.u[0].last(),
            report.bounds.lower_margin[0],
            report.bounds.upper_margin.unwrap_or(f64::NAN),
            report.residuals.integral[0],
            report.passed
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
