//! Tabulating H, A and F for an instance, inverting F, and estimating the
//! tails A(∞), F(∞).

use std::sync::Arc;

use plap_radial::transforms::{build_a, build_f, build_h, estimate_a_inf, estimate_f_inf, invert_f};
use plap_radial::{FTableConfig, ProbeConfig, ProblemSpec, RadialGrid};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Arc::new(RadialGrid::new(1.0, 2000)?);
    let spec = ProblemSpec::from_text(3, &[2.0], &["0"], &["1"], &["u1"], 1.0)?;

    let h = build_h(&spec, &grid, 0)?;
    let a = build_a(&spec, &grid, 0)?;
    println!("H(1) = {:?}   (r^2 = 1)", h.last());
    println!("A(1) = {:?}   (r^2/6 = {:?})", a.last(), 1.0 / 6.0);

    let table = build_f(&spec, 10.0, FTableConfig::default())?;
    let f3 = table.value(3.0)?;
    println!("F(3) = {f3:?}   (ln 2 = {:?})", 2f64.ln());
    println!("F^-1(ln 2) = {:?}", invert_f(&table, 2f64.ln(), None)?);

    let cfg = ProbeConfig::default();
    let decaying = ProblemSpec::from_text(3, &[2.0], &["0"], &["(1 + r)^(-4)"], &["u1^3"], 1.0)?;
    let a_inf = estimate_a_inf(&decaying, 0, &cfg);
    let f_inf = estimate_f_inf(&decaying, &cfg);
    println!("a = (1+r)^-4: A(∞) {:?} ≈ {:?} (exact 1/6)", a_inf.outcome, a_inf.limit);
    println!("f = u^3:      F(∞) {:?} ≈ {:?}", f_inf.outcome, f_inf.limit);
    println!("f = u:        F(∞) {:?}", estimate_f_inf(&spec, &cfg).outcome);

    // requests past F(∞) are refused rather than extrapolated
    let cubic = build_f(&decaying, 10.0, FTableConfig::default())?;
    let beyond = invert_f(&cubic, 0.5, Some(&f_inf)).unwrap_err();
    println!("F^-1(0.5) for f = u^3: {beyond}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
