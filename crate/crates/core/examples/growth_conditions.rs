//! Growth tests on the diagonal bracket Σ (1 + f_i(s,...,s))^{1/(min p - 1)}
//! and the implications between the classical integral conditions.

use plap_radial::conditions::{check_remark_implications, check_sublinearity, check_sup_bounded, geometric_sequence};
use plap_radial::{classify, FTableConfig, ProbeConfig, ProblemSpec};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ProbeConfig::default();
    let s = geometric_sequence(1.0, 30);
    for f in ["u1^0.5", "u1", "u1^3", "u1 / (1 + u1)", "0"] {
        let spec = ProblemSpec::from_text(3, &[2.0], &["0"], &["1"], &[f], 1.0)?;
        let sub = check_sublinearity(&spec, &s, cfg.plateau_threshold, cfg.rho_conv);
        let sup = check_sup_bounded(&spec, &s, &cfg);
        let c3 = classify(&spec, None, &cfg, &FTableConfig::default()).c3;
        let remarks = check_remark_implications(&spec, c3, &cfg);
        println!(
            "f = {f:<12} bracket/s -> 0: {:<12} sup bracket < ∞: {:<12} C3 {:<12} remarks {:?}",
            format!("{:?}", sub.verdict),
            format!("{:?}", sup.verdict),
            format!("{c3:?}"),
            remarks.status
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
