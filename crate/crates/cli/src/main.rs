//! `circext`: batch front end for the circulant covariance extension solvers.
//!
//! Every subcommand writes its outputs into the output directory (`--out`,
//! else `$CIRCEXT_OUT`, else `./circext_out`) together with a `run.json`
//! record. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | input, schema or usage error |
//! | 2 | infeasible data: `BoundaryCollapse`, `NotInOuterCone`, `ThresholdNotFound`, `NotPositiveDefinite`, or `check` finding no positive spectrum |
//! | 3 | `NumeratorBoundary`: cepstral data inconsistent at `λ = 0` |
//! | 4 | `MaxIterations` |
//! | 5 | `Io` |

use circext::approx::{convergence_sweep, default_schedule, find_threshold, DEFAULT_REFERENCE_HALF};
use circext::cepstral::{epsilon_report, joint_solve, lambda_path, DEFAULT_LAMBDA};
use circext::dual::{complete_covariances, newton_solve};
use circext::io::{self, FileOptions, ProblemFile, RunRecord, SweepFile};
use circext::moments::{feasibility_certificate, toeplitz_positive};
use circext::process::{estimate_cepstra, estimate_covariances, model_from_solution, sample};
use circext::{
    Cepstra, DualProblem, Error, JointOptions, JointProblem, SolutionReport, SolverOptions, SweepConfig, Symbol,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(name = "circext", version, about = "Rational covariance extension on the discrete circle")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Convergence tolerance on the moment residual (overrides the input file).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Newton iteration cap (overrides the input file).
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Cepstral regularization weight (overrides the input file).
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Seed for `simulate`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, env = "CIRCEXT_OUT", default_value = "circext_out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for Q with the numerator P from the problem file (P ≡ 1 if absent).
    Solve { problem: PathBuf },
    /// Maximum-entropy solution (P ≡ 1), ignoring any P in the file.
    Maxent { problem: PathBuf },
    /// Joint (P, Q) from covariances and cepstral coefficients.
    Cepstral {
        problem: PathBuf,
        /// Warm-started continuation stages λ: 1 → target.
        #[arg(long, default_value_t = 0)]
        continuation: usize,
        /// Comma-separated λ values; writes lambda_path.csv of (λ, ‖P − 1‖∞).
        #[arg(long, value_delimiter = ',')]
        lambda_sweep: Option<Vec<f64>>,
    },
    /// Threshold search and convergence sweep toward the continuous circle.
    Approx { config: PathBuf },
    /// Draw realizations of the model (a model or solution JSON).
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Real-valued process (real symbols only).
        #[arg(long)]
        real: bool,
    },
    /// Estimate covariances (and cepstra) from an ensemble written by `simulate`.
    Estimate {
        ensemble: PathBuf,
        /// Number of lags n.
        #[arg(long)]
        order: usize,
        /// Also estimate cepstral coefficients.
        #[arg(long)]
        cepstral: bool,
        /// Average per-realization cepstra instead of using the averaged periodogram.
        #[arg(long)]
        no_smoothing: bool,
        /// Re-solve on the ensemble grid: maximum entropy, or the joint problem with --cepstral.
        #[arg(long)]
        solve: bool,
    },
    /// Feasibility of the covariance data on the grid.
    Check { problem: PathBuf },
}

enum Failure {
    Core(Error),
    Infeasible(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BoundaryCollapse { .. }
        | Error::NotInOuterCone { .. }
        | Error::ThresholdNotFound { .. }
        | Error::NotPositiveDefinite { .. } => 2,
        Error::NumeratorBoundary { .. } => 3,
        Error::MaxIterations { .. } => 4,
        Error::Io { .. } => 5,
        _ => 1,
    }
}

struct Run<'a> {
    global: &'a Global,
    outputs: Vec<String>,
}

impl Run<'_> {
    fn write(&mut self, name: &str, text: &str) -> Result<(), Error> {
        io::write_text(&self.global.out.join(name), text)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, v: &Value) -> Result<(), Error> {
        self.write(name, &io::to_json_string(v))
    }

    fn solver_options(&self, file: &FileOptions) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(t) = self.global.tol.or(file.tol) {
            o.grad_tol = t;
        }
        if let Some(m) = self.global.max_iter.or(file.max_iter) {
            o.max_iter = m;
        }
        o
    }
}

fn warn(warnings: &[String]) {
    if !warnings.is_empty() {
        eprintln!("warning: ignoring unknown fields: {}", warnings.join(", "));
    }
}

fn write_solution(run: &mut Run, report: &SolutionReport) -> Result<(), Error> {
    let ext = complete_covariances(report)?;
    run.write_json("solution.json", &io::solution_json(report, &ext))?;
    run.write("spectrum.csv", &io::spectrum_csv(&report.phi))?;
    run.write("covariances.csv", &io::covariances_csv(&ext.lags))
}

fn cmd_solve(run: &mut Run, path: &Path, maxent: bool) -> Result<(), Failure> {
    let file = ProblemFile::load(path)?;
    warn(&file.warnings);
    let p = match (&file.p, maxent) {
        (Some(p), false) => p.clone(),
        _ => Symbol::one(),
    };
    let prob = DualProblem::new(&file.grid()?, file.c.clone(), p)?;
    let report = newton_solve(&prob, &run.solver_options(&file.options))?;
    write_solution(run, &report)?;
    Ok(())
}

fn cmd_cepstral(run: &mut Run, path: &Path, continuation: usize, sweep: Option<&[f64]>) -> Result<(), Failure> {
    let file = ProblemFile::load(path)?;
    warn(&file.warnings);
    let m = match &file.m {
        Some(m) => m.clone(),
        None => Cepstra::zeros(file.c.order()),
    };
    let lambda = run.global.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA);
    let prob = JointProblem::new(&file.grid()?, file.c.clone(), m, lambda)?;
    let opts = JointOptions {
        solver: run.solver_options(&file.options),
        continuation_stages: continuation,
        ..JointOptions::default()
    };
    let sol = joint_solve(&prob, &opts)?;
    run.write_json("solution.json", &io::joint_json(&sol, &epsilon_report(&sol)))?;
    run.write("spectrum.csv", &io::spectrum_csv(&sol.phi))?;
    let lags = sol.grid.moments_real(&sol.phi.real_parts(), sol.grid.half());
    run.write("covariances.csv", &io::covariances_csv(&lags))?;
    if let Some(lambdas) = sweep {
        let path = lambda_path(&prob, lambdas, &opts)?;
        run.write("lambda_path.csv", &io::lambda_path_csv(&path))?;
    }
    Ok(())
}

fn cmd_approx(run: &mut Run, path: &Path) -> Result<(), Failure> {
    let file = SweepFile::load(path)?;
    warn(&file.warnings);
    let (schedule, threshold) = match &file.schedule {
        Some(s) => (s.clone(), None),
        None => {
            let t = find_threshold(&file.c, file.n_max)?;
            (default_schedule(t, file.n_max), Some(t))
        }
    };
    let cfg = SweepConfig {
        c: file.c.clone(),
        p: file.p.clone().unwrap_or_else(Symbol::one),
        schedule,
        reference_half: file.reference_half.unwrap_or(DEFAULT_REFERENCE_HALF),
        options: run.solver_options(&file.options),
    };
    let rep = convergence_sweep(&cfg)?;
    run.write_json("sweep.json", &io::sweep_json(&rep, threshold))?;
    run.write("sweep.csv", &io::sweep_csv(&rep))?;
    Ok(())
}

fn cmd_simulate(run: &mut Run, path: &Path, count: usize, real: bool) -> Result<(), Failure> {
    let (model, warnings) = io::parse_model(&io::read_text(path)?)?;
    warn(&warnings);
    let rs = sample(&model, count, run.global.seed, real)?;
    let names = io::write_ensemble(&run.global.out, &model, &rs, run.global.seed, real)?;
    run.outputs.extend(names);
    run.write("spectrum.csv", &io::spectrum_csv(&model.phi))?;
    Ok(())
}

fn cmd_estimate(run: &mut Run, dir: &Path, order: usize, cepstral: bool, smoothing: bool, solve: bool) -> Result<(), Failure> {
    let (manifest, rs) = io::read_ensemble(dir)?;
    let c = estimate_covariances(&rs, order)?;
    let m = if cepstral { Some(estimate_cepstra(&rs, order, smoothing)?) } else { None };
    let mut extra = BTreeMap::new();
    extra.insert("N".to_string(), json!(manifest.half));
    extra.insert("seed".to_string(), json!(manifest.seed));
    extra.insert("model_hash".to_string(), json!(manifest.model_hash));
    run.write_json("estimate.json", &io::estimate_json(&c, m.as_ref(), rs.len(), extra))?;
    if !solve {
        return Ok(());
    }
    let grid = rs[0].grid().clone();
    let opts = run.solver_options(&FileOptions::default());
    match m {
        None => {
            let report = newton_solve(&DualProblem::new(&grid, c, Symbol::one())?, &opts)?;
            write_solution(run, &report)?;
        }
        Some(m) => {
            let lambda = run.global.lambda.unwrap_or(DEFAULT_LAMBDA);
            let sol = joint_solve(
                &JointProblem::new(&grid, c, m, lambda)?,
                &JointOptions { solver: opts, ..JointOptions::default() },
            )?;
            let model = model_from_solution(&sol)?;
            run.write_json("solution.json", &io::joint_json(&sol, &epsilon_report(&sol)))?;
            run.write("spectrum.csv", &io::spectrum_csv(&model.phi))?;
        }
    }
    Ok(())
}

fn cmd_check(run: &mut Run, path: &Path) -> Result<(), Failure> {
    let file = ProblemFile::load(path)?;
    warn(&file.warnings);
    let grid = file.grid()?;
    let toeplitz = toeplitz_positive(&file.c);
    let f = feasibility_certificate(&file.c, &grid)?;
    run.write_json("feasibility.json", &io::feasibility_json(&file.c, file.half, &f, toeplitz.min_eigenvalue))?;
    println!("feasible: {} (margin {})", f.feasible, io::fmt_f64(f.margin));
    if !f.feasible {
        return Err(Failure::Infeasible(format!(
            "no strictly positive spectrum on the grid with N = {} matches the covariances",
            file.half
        )));
    }
    Ok(())
}

fn input_path(cmd: &Command) -> &Path {
    match cmd {
        Command::Solve { problem } | Command::Maxent { problem } | Command::Check { problem } => problem,
        Command::Cepstral { problem, .. } => problem,
        Command::Approx { config } => config,
        Command::Simulate { model, .. } => model,
        Command::Estimate { ensemble, .. } => ensemble,
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Solve { .. } => "solve",
        Command::Maxent { .. } => "maxent",
        Command::Cepstral { .. } => "cepstral",
        Command::Approx { .. } => "approx",
        Command::Simulate { .. } => "simulate",
        Command::Estimate { .. } => "estimate",
        Command::Check { .. } => "check",
    }
}

fn input_hash(path: &Path) -> String {
    let target = if path.is_dir() { path.join(io::MANIFEST) } else { path.to_path_buf() };
    std::fs::read(target).map(|b| io::sha256_hex(&b)).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let mut run = Run { global: &cli.global, outputs: Vec::new() };
    let result = match &cli.command {
        Command::Solve { problem } => cmd_solve(&mut run, problem, false),
        Command::Maxent { problem } => cmd_solve(&mut run, problem, true),
        Command::Cepstral { problem, continuation, lambda_sweep } => {
            cmd_cepstral(&mut run, problem, *continuation, lambda_sweep.as_deref())
        }
        Command::Approx { config } => cmd_approx(&mut run, config),
        Command::Simulate { model, count, real } => cmd_simulate(&mut run, model, *count, *real),
        Command::Estimate { ensemble, order, cepstral, no_smoothing, solve } => {
            cmd_estimate(&mut run, ensemble, *order, *cepstral, !*no_smoothing, *solve)
        }
        Command::Check { problem } => cmd_check(&mut run, problem),
    };
    let code = match &result {
        Ok(()) => 0,
        Err(Failure::Core(e)) => {
            eprintln!("error: {}: {e}", e.name());
            exit_code(e)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("error: Infeasible: {msg}");
            2
        }
    };
    if code == 0 || !run.outputs.is_empty() {
        let record = RunRecord {
            command: command_name(&cli.command).to_string(),
            input_hash: input_hash(input_path(&cli.command)),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            wall_clock_ms: started.elapsed().as_secs_f64() * 1e3,
            outputs: run.outputs.clone(),
        };
        if let Err(e) = io::write_text(&cli.global.out.join("run.json"), &io::to_json_string(&record.to_json())) {
            eprintln!("error: {}: {e}", e.name());
            return ExitCode::from(5);
        }
    }
    ExitCode::from(code)
}
