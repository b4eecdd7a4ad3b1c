//! Which existence result covers an instance, with the evidence behind it.

use plap_radial::{classify, CentralValues, FTableConfig, ProbeConfig, ProblemSpec};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("a = 1,          f = u  ", "1", "u1", 1.0),
        ("a = (1+r)^-4,   f = u  ", "(1 + r)^(-4)", "u1", 1.0),
        ("a = (1+r)^-4,   f = u^3", "(1 + r)^(-4)", "u1^3", 1.2),
        ("a = 1, f = u log(1+u)^1.05", "1", "u1 * log(1 + u1)^1.05", 1.0),
    ];
    for (name, a, f, beta) in cases {
        let spec = ProblemSpec::from_text(3, &[2.0], &["0"], &[a], &[f], 1.0)?;
        let beta = CentralValues::equal(beta, 1)?;
        let c = classify(&spec, Some(&beta), &ProbeConfig::default(), &FTableConfig::default());
        println!("{name}: {}", c.verdict.label());
        println!("    C3 {:?}  C4 {:?}  C5 {:?}  C6 {:?}", c.c3, c.c4, c.c5, c.c6.verdict);
        if let Some((lo, hi)) = c.beta_window {
            println!("    feasible β in ({lo}, {hi:.6}), given β inside: {:?}", c.beta_in_window);
        }
        for note in &c.notes {
            println!("    note: {note}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
