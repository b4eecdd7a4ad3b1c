//! The coupled system Δu_1 = a_1 u_2^α, Δu_2 = a_2 u_1^β: the nested-integral
//! criterion for explosive solutions next to the solver's own growth.

use plap_radial::conditions::{check_lair_proposition, growth_witness, LairInstance};
use plap_radial::{classify, CentralValues, FTableConfig, ProbeConfig, ProblemSpec, SolverOptions};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ProbeConfig::default();
    for (a, f1, f2) in [
        ("1", "u2", "u1"),
        ("1", "u2^0.5", "u1^0.5"),
        ("(1 + r)^(-6)", "u2", "u1"),
    ] {
        let spec = ProblemSpec::from_text(3, &[2.0, 2.0], &["0", "0"], &[a, a], &[f1, f2], 1.0)?;
        let inst = LairInstance::from_spec(&spec).ok_or("not of the coupled form")?;
        let lair = check_lair_proposition(&inst, &cfg);
        let c = classify(&spec, None, &cfg, &FTableConfig::default());
        println!(
            "a = {a:<13} α = {}, β = {}: explosive predicted {:?}; classifier says {}",
            lair.alpha,
            lair.beta,
            lair.explosive,
            c.verdict.label()
        );
        if lair.explosive == Some(true) {
            let beta = CentralValues::equal(1.0, 2)?;
            let w = growth_witness(&spec, &beta, 4.0, 800, &SolverOptions::default())?;
            println!(
                "    u(8) - u(4) = {:.4?}, lower-bound growth {:.4?}, witness holds: {}",
                w.increase, w.required, w.holds
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
