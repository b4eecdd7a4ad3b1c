//! Solving Δu = u in R^3 with u(0) = 1, whose radial solution is sinh(r)/r,
//! and watching the error fall as the grid is refined.

use std::sync::Arc;

use plap_radial::{iterate, CentralValues, ProblemSpec, RadialGrid, SolverOptions};

fn sup_error(m: usize) -> Result<(f64, usize), Box<dyn std::error::Error>> {
    let spec = ProblemSpec::from_text(3, &[2.0], &["0"], &["1"], &["u1"], 1.0)?;
    let grid = Arc::new(RadialGrid::new(5.0, m)?);
    let bundle = iterate(&spec, &grid, &CentralValues::equal(1.0, 1)?, &SolverOptions::default())?;
    let err = grid
        .nodes()
        .iter()
        .zip(bundle.u[0].values())
        .skip(1)
        .map(|(r, u)| {
            let exact = r.sinh() / r;
            (u - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    Ok((err, bundle.iterations))
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let mut previous: Option<f64> = None;
    for m in [500, 1000, 2000, 4000] {
        let (err, iterations) = sup_error(m)?;
        let ratio = previous.map(|p| p / err);
        println!("M = {m:>5}: {iterations} iterations, relative error {err:.3e}, ratio {ratio:.2?}");
        previous = Some(err);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
