//! Parsing, evaluating and sampling coefficient and nonlinearity expressions.

use plap_radial::exprlang::{parse, validate_sampled, Property, Role, SampleBox};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let weight = parse("r^2 * exp(r)", Role::Radial, 1)?;
    println!("{weight} at r = 1: {}", weight.eval_radial(1.0)?);

    let coupling = parse("u1 * u2 + max(u1, 2 * u2)^0.5", Role::Nonlinearity, 2)?;
    println!("{coupling} at (2, 5): {}", coupling.eval(&[2.0, 5.0])?);

    // printed form parses back to the same tree
    let again = parse(&coupling.to_string(), Role::Nonlinearity, 2)?;
    assert_eq!(again, coupling);

    for bad in ["u3", "min()", "2 *"] {
        println!("{bad:>6} -> {}", parse(bad, Role::Nonlinearity, 2).unwrap_err());
    }
    let log = parse("log(r)", Role::Radial, 1)?;
    println!("log(r) at 0 -> {}", log.eval_radial(0.0).unwrap_err());

    let sum = parse("u1 + u2", Role::Nonlinearity, 2)?;
    let report = validate_sampled(&sum, Property::Monotone, &SampleBox::cube(0.0, 10.0, 2), 50)?;
    println!("u1 + u2 monotone on [0,10]^2: {}", report.passed);

    let ramp = parse("1 - r", Role::Radial, 1)?;
    let report = validate_sampled(&ramp, Property::Nonnegativity, &SampleBox::cube(0.0, 10.0, 1), 50)?;
    let w = report.witness.expect("failure has a witness");
    println!("1 - r nonnegative: {} (witness r = {:?}, value {:?})", report.passed, w.point, w.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
