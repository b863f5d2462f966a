//! `ddlpb` command-line front end: single solves, α sweeps and the analytic
//! single-ball spectrum.

mod report;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ddlpb::analytic::{optimal_alpha, practical_alpha};
use ddlpb::cavity::{parse_pqr, DEFAULT_DELTA};
use ddlpb::coupling::parse_alpha_grid;
use ddlpb::{Atom, Error, InitialGuess, ModeSpectrum, PhysicalParams, RichardsonSolver, SolverConfig};
use report::{Header, Outcome};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "ddlpb", version, about = "Linearized Poisson-Boltzmann solvation by interior-exterior domain decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the relaxed interface iteration for one step size.
    Solve {
        pqr: PathBuf,
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the iteration for every step size of a grid.
    Sweep {
        pqr: PathBuf,
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// `start:step:stop` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0.1:0.1:2.0")]
        alpha_grid: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate the per-degree spectrum of a single ball.
    Spectrum {
        /// Ball radius, Å.
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        phys: PhysArgs,
        #[arg(long, default_value_t = 7)]
        lmax: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct PhysArgs {
    #[arg(long, default_value_t = 1.0)]
    eps1: f64,
    #[arg(long, default_value_t = 78.54)]
    eps2: f64,
    /// Inverse Debye length, 1/Å.
    #[arg(long, default_value_t = 0.104)]
    kappa: f64,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = 7)]
    lmax: usize,
    /// Lebedev points per sphere.
    #[arg(long, default_value_t = 86)]
    leb: usize,
    /// Relative energy change that stops the iteration.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 60)]
    kmax: usize,
    /// Initial boundary datum (zero | psi0).
    #[arg(long, default_value = "zero")]
    g0: InitialGuess,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

impl PhysArgs {
    fn params(&self) -> Result<PhysicalParams> {
        Ok(PhysicalParams::new(self.eps1, self.eps2, self.kappa)?)
    }
}

fn solver_config(phys: &PhysArgs, solver: &SolverArgs, alpha: f64) -> Result<SolverConfig> {
    let config = SolverConfig {
        params: phys.params()?,
        lmax: solver.lmax,
        leb_order: solver.leb,
        alpha,
        tol: solver.tol,
        kmax: solver.kmax,
        g0: solver.g0,
        delta: DEFAULT_DELTA,
    };
    config.validate()?;
    Ok(config)
}

fn read_atoms(path: &PathBuf) -> Result<Vec<Atom>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_pqr(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn setup_threads(output: &OutputArgs) -> Result<()> {
    if let Some(n) = output.threads {
        anyhow::ensure!(n > 0, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    Ok(())
}

fn emit(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(pqr: &PathBuf, phys: &PhysArgs, solver: &SolverArgs, alpha: f64, output: &OutputArgs) -> Result<ExitCode> {
    let config = solver_config(phys, solver, alpha)?;
    let atoms = read_atoms(pqr)?;
    let start = Instant::now();
    let outcome = match RichardsonSolver::new(&atoms, config)?.run() {
        Ok(r) => Outcome::Finished(r),
        Err(e @ Error::Diverged { .. }) => Outcome::Diverged(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    let header = Header::new("solve", Some(pqr), config_lines(&config));
    let text = match output.format {
        Format::Csv => report::solve_csv(&header, &outcome)?,
        Format::Json => report::solve_json(&header, &config, &outcome, start.elapsed().as_secs_f64())?,
    };
    emit(output, &text)?;
    Ok(if outcome.converged() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_sweep(pqr: &PathBuf, phys: &PhysArgs, solver: &SolverArgs, grid: &str, output: &OutputArgs) -> Result<ExitCode> {
    let alphas = parse_alpha_grid(grid)?;
    let config = solver_config(phys, solver, alphas[0])?;
    let atoms = read_atoms(pqr)?;
    let start = Instant::now();
    let table = RichardsonSolver::new(&atoms, config)?.sweep(&alphas)?;
    let predicted = practical_alpha(&config.params);
    let mut lines = config_lines(&config);
    lines.retain(|l| !l.starts_with("alpha="));
    lines.push(format!("alpha_grid={grid}"));
    let header = Header::new("sweep", Some(pqr), lines);
    let text = match output.format {
        Format::Csv => report::sweep_csv(&header, &table, predicted)?,
        Format::Json => report::sweep_json(&header, &config, &table, predicted, start.elapsed().as_secs_f64())?,
    };
    emit(output, &text)?;
    Ok(if table.best_alpha.is_some() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_spectrum(radius: f64, phys: &PhysArgs, lmax: usize, output: &OutputArgs) -> Result<ExitCode> {
    let params = phys.params()?;
    let spectrum = ModeSpectrum::compute(radius, &params, lmax)?;
    let (c1, c2) = spectrum.bounds();
    let summary = report::SpectrumSummary {
        c1,
        c2,
        mu_range: spectrum.mu_range(),
        alpha_op: optimal_alpha(c1, c2)?,
        practical_alpha: practical_alpha(&params),
    };
    let header = Header::new(
        "spectrum",
        None,
        vec![
            format!("radius={radius}"),
            format!("eps1={},eps2={},kappa={}", params.eps1, params.eps2, params.kappa),
            format!("lmax={lmax}"),
        ],
    );
    let text = match output.format {
        Format::Csv => report::spectrum_csv(&header, &spectrum, &summary)?,
        Format::Json => report::spectrum_json(&header, &spectrum, &summary)?,
    };
    emit(output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn config_lines(config: &SolverConfig) -> Vec<String> {
    let p = &config.params;
    vec![
        format!("eps1={},eps2={},kappa={}", p.eps1, p.eps2, p.kappa),
        format!("lmax={},leb={},delta={}", config.lmax, config.leb_order, config.delta),
        format!("alpha={}", config.alpha),
        format!("tol={},kmax={},g0={}", config.tol, config.kmax, config.g0),
    ]
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Solve { pqr, phys, solver, alpha, output } => {
            setup_threads(output)?;
            cmd_solve(pqr, phys, solver, *alpha, output)
        }
        Command::Sweep { pqr, phys, solver, alpha_grid, output } => {
            setup_threads(output)?;
            cmd_sweep(pqr, phys, solver, alpha_grid, output)
        }
        Command::Spectrum { radius, phys, lmax, output } => {
            setup_threads(output)?;
            cmd_spectrum(*radius, phys, *lmax, output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
