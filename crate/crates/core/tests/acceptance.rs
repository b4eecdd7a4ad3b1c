//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use plap_radial::cli::{cmd_solve, cmd_verify, CommonArgs, VerifyArgs, EXIT_OK, EXIT_VERIFICATION};
use plap_radial::conditions::{
    check_keller_osserman, check_lair_proposition, growth_witness, ConditionVerdict, LairInstance,
};
use plap_radial::quadrature::probe_divergence;
use plap_radial::transforms::{build_a, build_f, default_s_max, invert_f};
use plap_radial::verify::{residual, verify_bounds};
use plap_radial::{
    classify, conditions::check_ye_zhou, CentralValues, FTableConfig, Outcome, ProbeConfig, ProblemSpec, RadialGrid,
    Solver, SolverOptions, TransformTables, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn sinh_spec() -> ProblemSpec {
    ProblemSpec::from_text(3, &[2.0], &["0"], &["1"], &["u1"], 1.0).unwrap()
}

fn sinh_exact(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        r.sinh() / r
    }
}

fn sinh_error(intervals: usize) -> Result<(f64, usize), String> {
    let grid = Arc::new(RadialGrid::new(5.0, intervals).map_err(|e| e.to_string())?);
    let beta = CentralValues::equal(1.0, 1).unwrap();
    let bundle = Solver::new(&sinh_spec(), &grid)
        .and_then(|s| s.iterate(&beta, &SolverOptions::default()))
        .map_err(|e| e.to_string())?;
    if !bundle.converged {
        return Err(format!("M = {intervals}: not converged"));
    }
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for (&r, &u) in grid.nodes().iter().zip(bundle.u[0].values()) {
        err = err.max((u - sinh_exact(r)).abs());
        scale = scale.max(sinh_exact(r));
    }
    Ok((err / scale, bundle.iterations))
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let (err, iterations) = sinh_error(4000)?;
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("{iterations} iterations, relative error {err:.3e}, {secs:.3} s");
    if iterations < 200 && err < 1e-5 && secs < 5.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Check {
    let spec = sinh_spec();
    let grid = Arc::new(RadialGrid::new(1.0, 2000).unwrap());
    let a1 = build_a(&spec, &grid, 0).map_err(|e| e.to_string())?.last();
    let a_err = (a1 - 1.0 / 6.0).abs() * 6.0;

    let table = build_f(&spec, 200.0, FTableConfig::default()).map_err(|e| e.to_string())?;
    let f3 = table.value(3.0).map_err(|e| e.to_string())?;
    let f_err = (f3 - 2f64.ln()).abs();

    let mut inv_err = 0.0f64;
    for k in 0..100 {
        let s = 1.0 + 1.99 * k as f64;
        let y = table.value(s).map_err(|e| e.to_string())?;
        let back = invert_f(&table, y, None).map_err(|e| e.to_string())?;
        inv_err = inv_err.max((back - s).abs());
    }
    let msg = format!("A(1) rel err {a_err:.1e}, F(3) err {f_err:.1e}, inverse err {inv_err:.1e}");
    if a_err <= 1e-6 && f_err <= 1e-8 && inv_err <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

struct SuiteRun {
    label: String,
    spec: ProblemSpec,
    beta: CentralValues,
    horizon: f64,
    /// Set for the bounded family where the sandwich is checked.
    sandwich: bool,
}

fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(0.1..2.0f64) * 100.0).round() / 100.0
}

fn random_radial(rng: &mut ChaCha8Rng, allow_zero: bool) -> String {
    match rng.gen_range(0..if allow_zero { 4 } else { 3 }) {
        0 => format!("{} + {} * r", coeff(rng), coeff(rng)),
        1 => format!("{} + {} * r^2", coeff(rng), coeff(rng)),
        2 => format!("{} / (1 + {} * r)", coeff(rng), coeff(rng)),
        _ => "0".into(),
    }
}

/// Monotone in every argument with growth of order at most `q <= min p - 1`.
fn random_sublinear(rng: &mut ChaCha8Rng, d: usize, q: f64) -> String {
    let c = coeff(rng);
    match (rng.gen_range(0..3), d) {
        (0, 1) => format!("{c} * u1^{q:.3}"),
        (0, _) => format!("{c} * (u1 + u2)^{q:.3}"),
        (1, 1) => format!("{c} * u1^{q:.3} / (1 + u1)^0.25"),
        (1, _) => format!("{c} * u2^{q:.3} + {} * u1^{q:.3}", coeff(rng)),
        _ => format!("{c} * log(1 + u{})", rng.gen_range(1..=d)),
    }
}

fn suite() -> Vec<SuiteRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut runs = Vec::new();
    for k in 0..24 {
        let d = rng.gen_range(1..=2);
        let n = rng.gen_range(3..=5);
        let p: Vec<f64> = (0..d).map(|_| (rng.gen_range(1.5..3.5f64) * 100.0).round() / 100.0).collect();
        let q = (p.iter().copied().fold(f64::INFINITY, f64::min) - 1.0) * rng.gen_range(0.3..1.0);
        let h: Vec<String> = (0..d).map(|_| random_radial(&mut rng, true)).collect();
        let a: Vec<String> = (0..d).map(|_| random_radial(&mut rng, false)).collect();
        let f: Vec<String> = (0..d).map(|_| random_sublinear(&mut rng, d, q)).collect();
        let beta: Vec<f64> = (0..d).map(|_| (rng.gen_range(0.2..3.0f64) * 10.0).round() / 10.0).collect();
        let h_ref: Vec<&str> = h.iter().map(String::as_str).collect();
        let a_ref: Vec<&str> = a.iter().map(String::as_str).collect();
        let f_ref: Vec<&str> = f.iter().map(String::as_str).collect();
        let spec = ProblemSpec::from_text(n, &p, &h_ref, &a_ref, &f_ref, 1.0).expect("generated spec parses");
        runs.push(SuiteRun {
            label: format!("random {k}: N={n} p={p:?} h={h:?} a={a:?} f={f:?}"),
            spec,
            beta: CentralValues::new(beta).unwrap(),
            horizon: 2.0,
            sandwich: false,
        });
    }
    // Decaying weights with superlinear sources; β is placed inside the
    // feasible window found by the classifier.
    for k in 0..8 {
        let p = (rng.gen_range(1.6..3.0f64) * 100.0).round() / 100.0;
        let decay = rng.gen_range(4.0..7.0f64).round();
        let q = ((p - 1.0) * rng.gen_range(1.6..3.0) * 100.0).round() / 100.0;
        let c = coeff(&mut rng);
        let a = format!("{c} * (1 + r)^(-{decay})");
        let f = format!("{} * u1^{q}", coeff(&mut rng));
        let spec = ProblemSpec::from_text(3, &[p], &["0"], &[a.as_str()], &[f.as_str()], 1.0).unwrap();
        let class = classify(&spec, None, &ProbeConfig::default(), &FTableConfig::default());
        let holds = [class.c4, class.c5, class.c6.verdict].iter().all(|c| *c == ConditionVerdict::Holds);
        let Some((lo, hi)) = class.beta_window.filter(|_| holds) else {
            println!("    note: bounded family {k} (a={a}, f={f}, p={p}) has no feasible window; skipped");
            continue;
        };
        runs.push(SuiteRun {
            label: format!("bounded {k}: p={p} a={a} f={f} window=({lo:.4}, {hi:.4})"),
            spec,
            beta: CentralValues::equal(0.5 * (lo + hi), 1).unwrap(),
            horizon: 10.0,
            sandwich: true,
        });
    }
    runs
}

struct SuiteResult {
    monotone_failures: Vec<String>,
    sandwich_checked: usize,
    sandwich_failures: Vec<String>,
    residual_failures: Vec<String>,
    converged: usize,
    total: usize,
}

fn run_suite() -> SuiteResult {
    let opts = SolverOptions {
        strict_monotone: false,
        ..SolverOptions::default()
    };
    let mut out = SuiteResult {
        monotone_failures: Vec::new(),
        sandwich_checked: 0,
        sandwich_failures: Vec::new(),
        residual_failures: Vec::new(),
        converged: 0,
        total: 0,
    };
    for run in suite() {
        out.total += 1;
        // Default config resolution.
        let grid = Arc::new(RadialGrid::new(run.horizon, 2000).unwrap());
        let solver = Solver::new(&run.spec, &grid).unwrap();
        let bundle = match solver.iterate(&run.beta, &opts) {
            Ok(b) => b,
            Err(e) => {
                out.monotone_failures.push(format!("{}: {e}", run.label));
                continue;
            }
        };
        if bundle.monotone_violations() > 0 || !bundle.converged || !bundle.radially_monotone() {
            out.monotone_failures.push(format!(
                "{}: violations {}, converged {}, radially monotone {}",
                run.label,
                bundle.monotone_violations(),
                bundle.converged,
                bundle.radially_monotone()
            ));
        }
        if !bundle.converged {
            continue;
        }
        out.converged += 1;
        let u = bundle.values();
        match residual(&solver, &u, &run.beta, 0.1) {
            Ok(r) if r.integral.iter().all(|v| *v <= 10.0 * opts.tol) => {}
            Ok(r) => out.residual_failures.push(format!("{}: integral residual {:?}", run.label, r.integral)),
            Err(e) => out.residual_failures.push(format!("{}: {e}", run.label)),
        }
        if run.sandwich {
            out.sandwich_checked += 1;
            let tables = TransformTables::build(
                &run.spec,
                &grid,
                &ProbeConfig::default(),
                &FTableConfig::default(),
                default_s_max(&run.spec, run.beta.max()),
            );
            let bounds = tables.map_err(|e| e.to_string()).and_then(|t| {
                verify_bounds(&solver, &t, &u, &run.beta).map_err(|e| e.to_string())
            });
            match bounds {
                Ok(b) if b.lower_margin.iter().all(|m| *m <= 1e-6) && b.upper_margin.is_some_and(|m| m <= 1e-6) => {}
                Ok(b) => out.sandwich_failures.push(format!(
                    "{}: lower {:?}, upper {:?} {:?}",
                    run.label, b.lower_margin, b.upper_margin, b.upper_note
                )),
                Err(e) => out.sandwich_failures.push(format!("{}: {e}", run.label)),
            }
        }
    }
    out
}

fn criterion_3(s: &SuiteResult) -> Check {
    let msg = format!("{} specs, {} converged, {} failures", s.total, s.converged, s.monotone_failures.len());
    if s.total >= 20 && s.monotone_failures.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {:?}", s.monotone_failures))
    }
}

fn criterion_4(s: &SuiteResult) -> Check {
    let msg = format!("{} bounded runs checked, {} failures", s.sandwich_checked, s.sandwich_failures.len());
    if s.sandwich_checked > 0 && s.sandwich_failures.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {:?}", s.sandwich_failures))
    }
}

fn criterion_5() -> Check {
    let cfg = ProbeConfig::default();
    let f_cfg = FTableConfig::default();
    let fixtures = [
        ("1", "u1", Verdict::Thm1Large),
        ("(1 + r)^(-4)", "u1", Verdict::Thm1Bounded),
        ("(1 + r)^(-4)", "u1^3", Verdict::Thm2Bounded),
    ];
    let mut got = Vec::new();
    for (a, f, want) in fixtures {
        let spec = ProblemSpec::from_text(3, &[2.0], &["0"], &[a], &[f], 1.0).unwrap();
        let v = classify(&spec, None, &cfg, &f_cfg).verdict;
        if v != want {
            return Err(format!("a = {a}, f = {f}: got {}, expected {}", v.label(), want.label()));
        }
        got.push(v.label());
    }
    let lair = ProblemSpec::from_text(3, &[2.0, 2.0], &["0", "0"], &["1", "1"], &["u2", "u1"], 1.0).unwrap();
    let inst = LairInstance::from_spec(&lair).ok_or("coupled system not detected")?;
    let report = check_lair_proposition(&inst, &cfg);
    let beta = CentralValues::equal(1.0, 2).unwrap();
    let witness = growth_witness(&lair, &beta, 4.0, 800, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let msg = format!(
        "{got:?}; coupled system explosive = {:?}, growth witness holds = {}",
        report.explosive, witness.holds
    );
    if report.explosive == Some(true) && witness.holds {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ode_residual(spec: &ProblemSpec, beta: &CentralValues, horizon: f64, intervals: usize) -> Result<f64, String> {
    let grid = Arc::new(RadialGrid::new(horizon, intervals).unwrap());
    let solver = Solver::new(spec, &grid).map_err(|e| e.to_string())?;
    let bundle = solver.iterate(beta, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let r = residual(&solver, &bundle.values(), beta, 0.1).map_err(|e| e.to_string())?;
    Ok(r.ode.iter().copied().fold(0.0, f64::max))
}

fn criterion_6(s: &SuiteResult) -> Check {
    if !s.residual_failures.is_empty() {
        return Err(format!("integral residual above 10·tol: {:?}", s.residual_failures));
    }
    let cases = [
        ("sinh", sinh_spec(), CentralValues::equal(1.0, 1).unwrap(), 5.0),
        (
            "p=3 with drift",
            ProblemSpec::from_text(4, &[3.0], &["1 / (1 + r)"], &["1 + r"], &["sqrt(u1)"], 1.0).unwrap(),
            CentralValues::equal(1.0, 1).unwrap(),
            3.0,
        ),
        (
            "coupled",
            ProblemSpec::from_text(3, &[2.0, 2.5], &["0", "0"], &["1", "1"], &["u2", "u1^0.5"], 1.0).unwrap(),
            CentralValues::new(vec![1.0, 2.0]).unwrap(),
            3.0,
        ),
    ];
    let mut parts = vec![format!("integral residual ok on {} converged suite runs", s.converged)];
    let mut ok = true;
    for (name, spec, beta, horizon) in cases {
        let coarse = ode_residual(&spec, &beta, horizon, 1000)?;
        let fine = ode_residual(&spec, &beta, horizon, 2000)?;
        let ratio = coarse / fine;
        ok &= ratio >= 1.8;
        parts.push(format!("{name} ODE ratio {ratio:.2}"));
    }
    let msg = parts.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7() -> Check {
    let (coarse, _) = sinh_error(1000)?;
    let (fine, _) = sinh_error(2000)?;
    let ratio = coarse / fine;
    let msg = format!("errors {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2}");
    if ratio >= 3.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Check {
    let cfg = ProbeConfig::default();
    let id = |t: f64| Ok::<f64, String>(t);
    let cube = |t: f64| Ok::<f64, String>(t * t * t);
    let cases = [
        (
            "1/(1+r)",
            probe_divergence(|r| Ok::<f64, String>(1.0 / (1.0 + r)), 1.0, &cfg),
            Outcome::Diverges,
            None,
        ),
        (
            "1/(1+r)^2",
            probe_divergence(|r| Ok::<f64, String>((1.0 + r).powi(-2)), 1.0, &cfg),
            Outcome::Converges,
            Some(0.5),
        ),
        ("KO f=t", check_keller_osserman(id, &cfg), Outcome::Diverges, None),
        ("KO f=t^3", check_keller_osserman(cube, &cfg), Outcome::Converges, Some(2.0)),
        ("YZ f=t", check_ye_zhou(id, &cfg), Outcome::Diverges, None),
        ("YZ f=t^3", check_ye_zhou(cube, &cfg), Outcome::Converges, Some(0.5)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, v, outcome, exact) in cases {
        let mut good = v.outcome == outcome;
        if let Some(exact) = exact {
            good &= v.limit.is_some_and(|l| (l - exact).abs() <= 0.05 * exact);
        }
        ok &= good;
        parts.push(format!("{name} {:?} {:?}", v.outcome, v.limit.map(|l| (l * 1e4).round() / 1e4)));
    }
    let msg = parts.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("sinh.json");
    std::fs::write(
        &config,
        r#"{"problem": {"N": 3, "p": [2], "a": ["1"], "f": ["u1"]}, "grid": {"R": 5, "M": 1000}, "beta": [1, 2]}"#,
    )
    .map_err(|e| e.to_string())?;
    let common = CommonArgs {
        config,
        out: Some(dir.path().join("out")),
    };
    let out = dir.path().join("out");
    let files = ["solve.json", "solve.history.json", "solution_1.csv", "solution_2.csv"];

    let first = cmd_solve(&common).map_err(|e| e.to_string())?;
    let snapshot = files.iter().map(|f| read(&out.join(f))).collect::<Result<Vec<_>, _>>()?;
    let second = cmd_solve(&common).map_err(|e| e.to_string())?;
    for (name, bytes) in files.iter().zip(&snapshot) {
        if read(&out.join(name))? != *bytes {
            return Err(format!("{name} differs between runs"));
        }
    }
    if first.code != EXIT_OK || second.code != EXIT_OK {
        return Err(format!("solve exit codes {} and {}", first.code, second.code));
    }

    let verified = cmd_verify(&VerifyArgs {
        common: common.clone(),
        solution: None,
    })
    .map_err(|e| e.to_string())?;

    let text = String::from_utf8(snapshot[2].clone()).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cells: Vec<String> = lines[400].split(',').map(str::to_string).collect();
    cells[1] = format!("{:?}", cells[1].parse::<f64>().unwrap() + 0.1);
    lines[400] = cells.join(",");
    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, lines.join("\n") + "\n").map_err(|e| e.to_string())?;
    let rejected = cmd_verify(&VerifyArgs {
        common,
        solution: Some(broken),
    })
    .map_err(|e| e.to_string())?;
    let residual = rejected
        .report
        .verification
        .as_ref()
        .map(|v| v.residuals.integral[0])
        .unwrap_or(f64::NAN);
    let msg = format!(
        "{} files byte-identical, verify exit {}, perturbed exit {} (residual {residual:.3})",
        files.len(),
        verified.code,
        rejected.code
    );
    if verified.code == EXIT_OK && rejected.code == EXIT_VERIFICATION {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let suite = run_suite();
    let results: Vec<(usize, &str, Check)> = vec![
        (1, "analytic solver oracle", criterion_1()),
        (2, "transform closed forms", criterion_2()),
        (3, "monotone iteration invariant", criterion_3(&suite)),
        (4, "sandwich bounds", criterion_4(&suite)),
        (5, "classification fixtures", criterion_5()),
        (6, "residual gate", criterion_6(&suite)),
        (7, "grid convergence", criterion_7()),
        (8, "probe correctness", criterion_8()),
        (9, "determinism and round trip", criterion_9()),
    ];
    let mut failed = 0;
    for (n, name, result) in &results {
        match result {
            Ok(msg) => println!("criterion {n} ({name}): PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL  {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
