//! One sublinear system, many central values: each gives its own entire
//! large solution, and larger central values give larger solutions.

use std::sync::Arc;

use plap_radial::{classify, CentralValues, FTableConfig, ProbeConfig, ProblemSpec, RadialGrid, Solver, SolverOptions};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProblemSpec::from_text(
        3,
        &[2.0, 2.5],
        &["0", "1 / (1 + r)"],
        &["1", "1"],
        &["sqrt(u2)", "u1^0.25 + u2^0.25"],
        1.0,
    )?;
    let first = CentralValues::new(vec![1.0, 3.0])?;
    let c = classify(&spec, Some(&first), &ProbeConfig::default(), &FTableConfig::default());
    println!("unequal central values: {} (sublinearity {:?})", c.verdict.label(), c.sublinearity.verdict);

    let grid = Arc::new(RadialGrid::new(8.0, 1600)?);
    let solver = Solver::new(&spec, &grid)?;
    let betas = [[0.5, 0.5], [1.0, 3.0], [2.0, 3.0], [4.0, 4.0]];
    let mut previous: Option<Vec<Vec<f64>>> = None;
    for b in betas {
        let bundle = solver.iterate(&CentralValues::new(b.to_vec())?, &SolverOptions::default())?;
        let u = bundle.values();
        let above = previous.as_ref().map(|p| {
            p.iter()
                .zip(&u)
                .all(|(lo, hi)| lo.iter().zip(hi).all(|(x, y)| x <= y))
        });
        println!(
            "β = {b:?}: u(8) = ({:.4}, {:.4}), {} iterations, above previous: {above:?}",
            u[0][u[0].len() - 1],
            u[1][u[1].len() - 1],
            bundle.iterations
        );
        previous = Some(u);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
