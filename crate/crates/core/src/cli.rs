//! `plap-radial solve|classify|verify|sweep --config <path> [--out <dir>]`
//!
//! Each command writes `<command>.json` (deterministic) and
//! `<command>.timings.json` (wall clock) into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{
    check_keller_osserman, check_lair_proposition, check_remark_implications, check_ye_zhou, classify,
    Classification, LairInstance, Verdict,
};
use crate::config::{ConfigError, Run};
use crate::report::{
    read_solution_csv, write_json, write_solution_csv, Auxiliary, ComponentChecks, History, PairComparison,
    ReportError, RunReport, SolveSummary, Status, SweepReport, Tool,
};
use crate::solver::{CentralValues, Solver, SolverError};
use crate::transforms::{default_s_max, TransformTables};
use crate::verify::{verify_bundle, verify_solution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "plap-radial", version, about = "Radial solutions of quasilinear p-Laplacian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for every configured central value and write solution CSVs.
    Solve(CommonArgs),
    /// Decide which existence result applies and run the auxiliary checks.
    Classify(CommonArgs),
    /// Recheck bounds and residuals of a stored solution.
    Verify(VerifyArgs),
    /// Solve for a list of central values and compare the solutions.
    Sweep(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Solution CSV; defaults to `<out>/solution_1.csv`.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("creating {path}: {source}")]
    OutputDir { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Report(ReportError::GridMismatch(_)) => EXIT_VERIFICATION,
            _ => EXIT_FAILURE,
        }
    }
}

/// What a command produced.
#[derive(Debug)]
pub struct CommandOutput {
    pub code: i32,
    pub report: RunReport,
    pub report_path: PathBuf,
    pub lines: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
struct Timings {
    command: String,
    phases: Vec<(String, f64)>,
    total_seconds: f64,
}

struct Clock {
    start: Instant,
    last: Instant,
    timings: Timings,
}

impl Clock {
    fn new(command: &str) -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            timings: Timings {
                command: command.to_string(),
                ..Timings::default()
            },
        }
    }

    fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        self.timings.phases.push((phase.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }

    fn finish(mut self, dir: &Path) -> Result<(), ReportError> {
        self.timings.total_seconds = self.start.elapsed().as_secs_f64();
        write_json(&dir.join(format!("{}.timings.json", self.timings.command)), &self.timings)
    }
}

fn prepare(args: &CommonArgs) -> Result<(Run, PathBuf), CliError> {
    let run = Run::load(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| run.config.output.dir.clone());
    std::fs::create_dir_all(&out).map_err(|source| CliError::OutputDir {
        path: out.clone(),
        source,
    })?;
    Ok((run, out))
}

fn build_tables(run: &Run) -> Result<TransformTables, CliError> {
    let beta_max = run.betas.iter().map(CentralValues::max).fold(0.0, f64::max);
    Ok(TransformTables::build(
        &run.spec,
        &run.grid,
        &run.config.probes,
        &run.config.grid.f_table,
        default_s_max(&run.spec, beta_max),
    )
    .map_err(SolverError::from)?)
}

/// Classifies against the first central value, or the first unequal one
/// when present, since that restricts which results apply.
fn classify_run(run: &Run) -> Classification {
    let beta = run.betas.iter().find(|b| b.common().is_none()).or(run.betas.first());
    classify(&run.spec, beta, &run.config.probes, &run.config.grid.f_table)
}

fn error_code(e: &SolverError) -> i32 {
    match e {
        SolverError::Blowup { .. } => EXIT_NOT_CONVERGED,
        SolverError::MonotonicityViolated { .. } => EXIT_VERIFICATION,
        _ => EXIT_FAILURE,
    }
}

struct Solved {
    summary: SolveSummary,
    values: Option<Vec<Vec<f64>>>,
    history: Option<History>,
    code: i32,
}

fn solve_one(run: &Run, solver: &Solver, tables: &TransformTables, out: &Path, index: usize) -> Result<Solved, CliError> {
    let beta = &run.betas[index];
    let opts = run.config.solver.options();
    let bundle = match solver.iterate(beta, &opts) {
        Ok(b) => b,
        Err(e) => {
            return Ok(Solved {
                summary: SolveSummary::failed(beta.clone(), e.to_string()),
                values: None,
                history: None,
                code: error_code(&e),
            })
        }
    };
    let verification = verify_bundle(solver, tables, &bundle, opts.tol, &run.config.solver.verify)?;
    let name = format!("solution_{}.csv", index + 1);
    write_solution_csv(&out.join(&name), &bundle, &verification.bounds)?;
    let code = if !bundle.converged {
        EXIT_NOT_CONVERGED
    } else if !verification.passed {
        EXIT_VERIFICATION
    } else {
        EXIT_OK
    };
    Ok(Solved {
        values: Some(bundle.values()),
        history: Some(History {
            beta: beta.clone(),
            records: bundle.history.clone(),
        }),
        summary: SolveSummary::from_bundle(&bundle, Some(name), Some(verification)),
        code,
    })
}

/// Highest-priority nonzero code: non-convergence, then verification.
fn combine(codes: impl IntoIterator<Item = i32>) -> i32 {
    let codes: Vec<i32> = codes.into_iter().collect();
    for c in [EXIT_NOT_CONVERGED, EXIT_VERIFICATION, EXIT_FAILURE] {
        if codes.contains(&c) {
            return c;
        }
    }
    EXIT_OK
}

fn status(code: i32, ok: &str) -> Status {
    let message = match code {
        EXIT_OK => ok.to_string(),
        EXIT_NOT_CONVERGED => "no fixed point found at this tolerance for at least one central value".into(),
        EXIT_VERIFICATION => "verification failed".into(),
        EXIT_INCONCLUSIVE => "classification inconclusive".into(),
        _ => "run failed".into(),
    };
    Status { exit_code: code, message }
}

fn summary_line(s: &SolveSummary) -> String {
    match &s.error {
        Some(e) => format!("beta {:?}: {e}", s.beta.as_slice()),
        None => format!(
            "beta {:?}: converged={} iterations={} u(R)={:?} verified={}",
            s.beta.as_slice(),
            s.converged,
            s.iterations,
            s.u_at_horizon,
            s.verified()
        ),
    }
}

fn finish(
    out: &Path,
    command: &str,
    report: RunReport,
    clock: Clock,
    lines: Vec<String>,
) -> Result<CommandOutput, CliError> {
    let report_path = out.join(format!("{command}.json"));
    write_json(&report_path, &report)?;
    clock.finish(out)?;
    Ok(CommandOutput {
        code: report.status.exit_code,
        report,
        report_path,
        lines,
    })
}

fn base_report(command: &str, run: &Run) -> RunReport {
    RunReport {
        tool: Tool::current(),
        command: command.to_string(),
        config: run.config.clone(),
        classification: None,
        auxiliary: None,
        runs: Vec::new(),
        verification: None,
        sweep: None,
        status: status(EXIT_OK, "ok"),
    }
}

pub fn cmd_solve(args: &CommonArgs) -> Result<CommandOutput, CliError> {
    let mut clock = Clock::new("solve");
    let (run, out) = prepare(args)?;
    let classification = classify_run(&run);
    clock.lap("classify");
    let solver = Solver::new(&run.spec, &run.grid)?;
    let tables = build_tables(&run)?;
    clock.lap("transforms");
    let solved = (0..run.betas.len())
        .map(|k| solve_one(&run, &solver, &tables, &out, k))
        .collect::<Result<Vec<_>, _>>()?;
    clock.lap("solve");
    write_json(&out.join("solve.history.json"), &solved.iter().filter_map(|s| s.history.as_ref()).collect::<Vec<_>>())?;

    let code = combine(solved.iter().map(|s| s.code));
    let mut lines = vec![format!("verdict: {}", classification.verdict.label())];
    lines.extend(solved.iter().map(|s| summary_line(&s.summary)));
    let report = RunReport {
        classification: Some(classification),
        runs: solved.into_iter().map(|s| s.summary).collect(),
        status: status(code, "converged and verified"),
        ..base_report("solve", &run)
    };
    finish(&out, "solve", report, clock, lines)
}

fn auxiliary(run: &Run, classification: &Classification) -> Auxiliary {
    let cfg = &run.config.probes;
    let literature = run
        .spec
        .iter()
        .enumerate()
        .map(|(j, c)| ComponentChecks {
            component: j + 1,
            keller_osserman: check_keller_osserman(|t| c.f.eval_diagonal(t), cfg),
            ye_zhou: check_ye_zhou(|t| c.f.eval_diagonal(t), cfg),
        })
        .collect();
    Auxiliary {
        literature,
        remarks: check_remark_implications(&run.spec, classification.c3, cfg),
        lair: LairInstance::from_spec(&run.spec).map(|inst| check_lair_proposition(&inst, cfg)),
    }
}

pub fn cmd_classify(args: &CommonArgs) -> Result<CommandOutput, CliError> {
    let mut clock = Clock::new("classify");
    let (run, out) = prepare(args)?;
    let classification = classify_run(&run);
    let aux = auxiliary(&run, &classification);
    clock.lap("classify");

    let mut lines = vec![format!("verdict: {}", classification.verdict.label())];
    if let Some((lo, hi)) = classification.beta_window {
        lines.push(format!("beta window: ({lo:?}, {hi:?})"));
    }
    if let Some(l) = &aux.lair {
        lines.push(format!("lair criterion: explosive = {:?}", l.explosive));
    }
    let code = if classification.verdict == Verdict::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    let report = RunReport {
        classification: Some(classification),
        auxiliary: Some(aux),
        status: status(code, "classified"),
        ..base_report("classify", &run)
    };
    finish(&out, "classify", report, clock, lines)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<CommandOutput, CliError> {
    let mut clock = Clock::new("verify");
    let (run, out) = prepare(&args.common)?;
    let path = args.solution.clone().unwrap_or_else(|| out.join("solution_1.csv"));
    let u = read_solution_csv(&path, &run.grid, run.spec.components())?;
    let solver = Solver::new(&run.spec, &run.grid)?;
    let tables = build_tables(&run)?;
    clock.lap("load");

    let origin: Vec<f64> = u.iter().map(|c| c[0]).collect();
    let known = run.betas.iter().find(|b| b.as_slice() == origin.as_slice());
    let beta = match known {
        Some(b) => b.clone(),
        None => CentralValues::new(origin.clone()).unwrap_or_else(|_| run.betas[0].clone()),
    };
    let mut verification = verify_solution(
        &solver,
        &tables,
        &u,
        &beta,
        run.config.solver.tol,
        true,
        &run.config.solver.verify,
    )?;
    if known.is_none() {
        verification.passed = false;
        verification
            .notes
            .push(format!("u(0) = {origin:?} matches none of the configured central values"));
    }
    clock.lap("verify");

    let code = if verification.passed { EXIT_OK } else { EXIT_VERIFICATION };
    let mut lines = vec![format!("{}: passed = {}", path.display(), verification.passed)];
    lines.push(format!("integral residual: {:?}", verification.residuals.integral));
    lines.extend(verification.notes.iter().cloned());
    let report = RunReport {
        verification: Some(verification),
        status: status(code, "verified"),
        ..base_report("verify", &run)
    };
    finish(&out, "verify", report, clock, lines)
}

fn compare(values: &[Option<Vec<Vec<f64>>>], betas: &[CentralValues], slack: f64) -> Vec<PairComparison> {
    let mut pairs = Vec::new();
    for k in 0..betas.len() {
        for l in k + 1..betas.len() {
            let (Some(uk), Some(ul)) = (&values[k], &values[l]) else {
                continue;
            };
            let (lower, upper, ul_, uu) = if betas[l].le(&betas[k]) && !betas[k].le(&betas[l]) {
                (l, k, ul, uk)
            } else {
                (k, l, uk, ul)
            };
            let comparable = betas[lower].le(&betas[upper]);
            let mut min_gap = f64::INFINITY;
            let mut max_gap = f64::NEG_INFINITY;
            let mut identical = true;
            for (a, b) in ul_.iter().zip(uu) {
                for (x, y) in a.iter().zip(b) {
                    let g = y - x;
                    min_gap = min_gap.min(g);
                    max_gap = max_gap.max(g);
                    identical &= x.to_bits() == y.to_bits();
                }
            }
            pairs.push(PairComparison {
                lower: lower + 1,
                upper: upper + 1,
                min_gap,
                max_gap,
                ordered: comparable.then_some(min_gap >= -slack),
                distinct: !identical,
                identical,
            });
        }
    }
    pairs
}

fn sweep_table(run: &Run, summaries: &[SolveSummary]) -> String {
    let d = run.spec.components();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string()];
    header.extend((1..=d).map(|j| format!("beta_{j}")));
    header.extend(["converged".into(), "iterations".into()]);
    header.extend((1..=d).map(|j| format!("u_{j}(R)")));
    header.extend(["L_estimate".into(), "verified".into()]);
    w.write_record(&header).expect("in-memory write");
    for (k, s) in summaries.iter().enumerate() {
        let mut row = vec![(k + 1).to_string()];
        row.extend(s.beta.as_slice().iter().map(|b| format!("{b:?}")));
        row.extend([s.converged.to_string(), s.iterations.to_string()]);
        if s.u_at_horizon.len() == d {
            row.extend(s.u_at_horizon.iter().map(|u| format!("{u:?}")));
        } else {
            row.extend(std::iter::repeat_n(String::new(), d));
        }
        row.extend([format!("{:?}", s.l_estimate), s.verified().to_string()]);
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn cmd_sweep(args: &CommonArgs) -> Result<CommandOutput, CliError> {
    let mut clock = Clock::new("sweep");
    let (run, out) = prepare(args)?;
    if run.betas.len() < 2 {
        return Err(ConfigError::Invalid {
            path: "beta".into(),
            message: "sweep needs at least two central values".into(),
        }
        .into());
    }
    let classification = classify_run(&run);
    clock.lap("classify");
    let solver = Solver::new(&run.spec, &run.grid)?;
    let tables = build_tables(&run)?;
    clock.lap("transforms");
    let solved = (0..run.betas.len())
        .into_par_iter()
        .map(|k| solve_one(&run, &solver, &tables, &out, k))
        .collect::<Result<Vec<_>, _>>()?;
    clock.lap("solve");

    let values: Vec<_> = solved.iter().map(|s| s.values.clone()).collect();
    let slack = run.config.solver.verify.residual_factor * run.config.solver.tol;
    let pairs = compare(&values, &run.betas, slack);
    let consistent = pairs.iter().all(|p| {
        let same_beta = run.betas[p.lower - 1] == run.betas[p.upper - 1];
        p.ordered != Some(false) && if same_beta { p.identical } else { p.distinct }
    });
    let summaries: Vec<SolveSummary> = solved.iter().map(|s| s.summary.clone()).collect();
    let table = sweep_table(&run, &summaries);
    std::fs::write(out.join("sweep.csv"), &table).map_err(|source| ReportError::Io {
        path: out.join("sweep.csv").display().to_string(),
        source,
    })?;
    clock.lap("compare");

    let mut code = combine(solved.iter().map(|s| s.code));
    if code == EXIT_OK && !consistent {
        code = EXIT_VERIFICATION;
    }
    let mut lines = vec![format!("verdict: {}", classification.verdict.label())];
    lines.extend(summaries.iter().map(summary_line));
    lines.push(format!("ordering and distinctness consistent: {consistent}"));
    let report = RunReport {
        classification: Some(classification),
        runs: summaries,
        sweep: Some(SweepReport {
            pairs,
            consistent,
            table: Some("sweep.csv".into()),
        }),
        status: status(code, "all solutions converged, verified and ordered"),
        ..base_report("sweep", &run)
    };
    finish(&out, "sweep", report, clock, lines)
}

pub fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// Parses `args`, runs the command, prints a summary, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(output) => {
            for line in &output.lines {
                println!("{line}");
            }
            println!("report: {}", output.report_path.display());
            output.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
