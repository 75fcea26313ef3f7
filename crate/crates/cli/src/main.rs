//! `ehopt`: offline transmission policies for energy-harvesting networks
//! whose receivers pay rate-dependent decoding costs.
//!
//! Three commands:
//! - `solve` reads a scenario JSON file and writes the optimal policy as
//!   JSON (rates or powers per slot, totals, convergence flag).
//! - `region` sweeps the two-user departure region boundary and writes it
//!   as CSV (`mu1,mu2,b1,b2,converged`, one row per weight pair).
//! - `verify` runs the randomized property suites with a fixed seed.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 infeasible scenario,
//! 3 solver did not converge (the best policy found is still written).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use ehopt_cli::commands::{self, CliError, SolveOptions};
use ehopt_cli::output;
use ehopt_cli::scenario;
use ehopt_core::mac::{DecodingMode, WeightPair};
use ehopt_core::verify::SuiteKind;

#[derive(Parser)]
#[command(name = "ehopt", version, about = "Energy-harvesting policy solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write the policy as JSON.
    Solve {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Objective weights "mu1,mu2" for the two-user topologies.
        #[arg(long, value_parser = parse_weights, default_value = "0.5,0.5")]
        weights: Weights,
        /// Receiver decoding procedure (mac only; everything else has a
        /// single mode).
        #[arg(long, value_enum, default_value_t = ModeArg::Simultaneous)]
        mode: ModeArg,
        /// Convergence tolerance of the iterative solvers.
        #[arg(long, default_value_t = commands::DEFAULT_TOL)]
        tol: f64,
        /// Iteration cap for the iterative solvers (solver default when
        /// absent).
        #[arg(long)]
        max_iters: Option<usize>,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a departure region boundary and write it as CSV.
    Region {
        /// Scenario JSON file (mac or bc topology).
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Simultaneous)]
        mode: ModeArg,
        /// Number of weight pairs along the boundary.
        #[arg(long, default_value_t = 21)]
        n_weights: usize,
        #[arg(long, default_value_t = commands::DEFAULT_TOL)]
        tol: f64,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized property suites and print a pass/fail table.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Seed for the suites' random instances.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Simultaneous,
    Successive,
}

impl From<ModeArg> for DecodingMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Simultaneous => DecodingMode::Simultaneous,
            ModeArg::Successive => DecodingMode::Successive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Lemmas,
    Oracle,
    All,
}

impl From<SuiteArg> for SuiteKind {
    fn from(suite: SuiteArg) -> Self {
        match suite {
            SuiteArg::Lemmas => SuiteKind::Lemmas,
            SuiteArg::Oracle => SuiteKind::Oracle,
            SuiteArg::All => SuiteKind::All,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Weights {
    mu1: f64,
    mu2: f64,
}

fn parse_weights(text: &str) -> Result<Weights, String> {
    let (first, second) = text
        .split_once(',')
        .ok_or("expected two comma-separated numbers, like 0.6,0.4")?;
    let mu1: f64 = first.trim().parse().map_err(|_| "mu1 is not a number")?;
    let mu2: f64 = second.trim().parse().map_err(|_| "mu2 is not a number")?;
    if !(mu1.is_finite() && mu2.is_finite() && mu1 >= 0.0 && mu2 >= 0.0) {
        return Err("weights must be finite and non-negative".to_string());
    }
    if mu1 + mu2 <= 0.0 {
        return Err("at least one weight must be positive".to_string());
    }
    Ok(Weights { mu1, mu2 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Solve {
            scenario: path,
            weights,
            mode,
            tol,
            max_iters,
            out,
        } => {
            let scenario = scenario::load_scenario(&path)?;
            let opts = SolveOptions {
                weights: WeightPair {
                    mu1: weights.mu1,
                    mu2: weights.mu2,
                },
                mode: mode.into(),
                tol,
                max_iters,
            };
            let solved = commands::run_solve(&scenario, &opts)?;
            write_output(out.as_deref(), &solved.to_json())?;
            Ok(exit_by_convergence(solved.converged()))
        }
        Command::Region {
            scenario: path,
            mode,
            n_weights,
            tol,
            out,
        } => {
            let scenario = scenario::load_scenario(&path)?;
            let region = commands::run_region(&scenario, mode.into(), n_weights, tol)?;
            write_output(out.as_deref(), &output::region_csv(&region))?;
            Ok(exit_by_convergence(
                region.points.iter().all(|point| point.converged),
            ))
        }
        Command::Verify { suite, seed } => {
            let report = commands::run_verify(suite.into(), seed);
            print!("{}", commands::render_suite(&report));
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn exit_by_convergence(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, text)
            .map_err(|err| CliError::Usage(format!("cannot write {}: {err}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|err| CliError::Usage(format!("cannot write to stdout: {err}")))
        }
    }
}
