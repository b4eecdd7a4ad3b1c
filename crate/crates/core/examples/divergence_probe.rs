//! Deciding whether improper integrals converge from partial integrals over
//! doubling horizons.

use std::convert::Infallible;

use plap_radial::conditions::{check_keller_osserman, check_ye_zhou};
use plap_radial::quadrature::{cumulative_integral, probe_divergence, GridFunction, ProbeConfig, RadialGrid};

fn exact(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64, Infallible> {
    move |x| Ok(f(x))
}

type Integrand = fn(f64) -> f64;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let grid = std::sync::Arc::new(RadialGrid::new(1.0, 1000)?);
    let linear = GridFunction::from_fn(grid, |r| r)?;
    println!("trapezoid ∫_0^1 r dr = {:?}", cumulative_integral(&linear).last());

    let cfg = ProbeConfig::default();
    let cases: [(&str, Integrand); 3] = [
        ("1/(1+r)^2", |r| (1.0 + r).powi(-2)),
        ("1/(1+r)", |r| 1.0 / (1.0 + r)),
        ("r^-1.01", |r| r.powf(-1.01)),
    ];
    for (name, g) in cases {
        let v = probe_divergence(exact(g), 1.0, &cfg);
        println!("∫_1^∞ {name:<10} {:?} limit {:?}", v.outcome, v.limit);
    }

    for (name, f) in [("t", 1), ("t^3", 3)] {
        let ko = check_keller_osserman(exact(move |t| t.powi(f)), &cfg);
        let yz = check_ye_zhou(exact(move |t| t.powi(f)), &cfg);
        println!(
            "f = {name:<4} Keller-Osserman {:?} {:?}, Ye-Zhou {:?} {:?}",
            ko.outcome, ko.limit, yz.outcome, yz.limit
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
