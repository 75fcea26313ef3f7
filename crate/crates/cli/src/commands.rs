//! Command implementations behind the binary's argument parsing.

use std::fmt;

use ehopt_core::mac::{self, DecodingMode, DepartureRegion, WeightPair};
use ehopt_core::model::{Scenario, Topology};
use ehopt_core::verify::{SuiteKind, SuiteReport};
use ehopt_core::waterfill::{WATERFLOW_DEFAULT_MAX_SWEEPS, WATERFLOW_DEFAULT_TOL};
use ehopt_core::{bc, single_user, two_hop, verify, Error};

use crate::output::{self, SolveOutput};

pub const DEFAULT_TOL: f64 = WATERFLOW_DEFAULT_TOL;

/// Failures the binary maps to exit codes: usage and parse problems exit 1,
/// infeasible or invalid scenarios exit 2. (Non-convergence is not an error;
/// the solve and region commands report it through exit code 3 after
/// writing their output.)
#[derive(Debug, Clone)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Infeasible(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Infeasible(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

/// Solver errors on a structurally valid scenario mean the instance cannot
/// be served: the math is infeasible rather than the invocation malformed.
fn classify(err: Error) -> CliError {
    match err {
        Error::Unsupported(_) | Error::OracleLimit { .. } => CliError::Usage(err.to_string()),
        other => CliError::Infeasible(other.to_string()),
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "tolerance must be a positive number, got {tol}"
        )))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub weights: WeightPair,
    pub mode: DecodingMode,
    pub tol: f64,
    /// Iteration cap for the iterative solvers; each solver's default when
    /// absent.
    pub max_iters: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            weights: WeightPair { mu1: 0.5, mu2: 0.5 },
            mode: DecodingMode::Simultaneous,
            tol: DEFAULT_TOL,
            max_iters: None,
        }
    }
}

pub fn run_solve(scenario: &Scenario, opts: &SolveOptions) -> Result<SolveOutput, CliError> {
    check_tol(opts.tol)?;
    if opts.mode == DecodingMode::Successive && !matches!(scenario.topology(), Topology::Mac) {
        return Err(CliError::Usage(
            "successive decoding only applies to the mac topology".to_string(),
        ));
    }
    match scenario {
        Scenario::SingleUser {
            tx,
            rx,
            rx_has_battery,
            link,
        } => {
            if *rx_has_battery {
                let solution = single_user::solve_single_user(tx, rx, link).map_err(classify)?;
                Ok(output::single_user_output(&solution, link))
            } else {
                let rates =
                    single_user::solve_single_user_no_battery(tx, rx, link).map_err(classify)?;
                Ok(output::single_user_no_battery_output(&rates, link))
            }
        }
        Scenario::TwoHop { .. } => {
            let sweeps = opts.max_iters.unwrap_or(WATERFLOW_DEFAULT_MAX_SWEEPS);
            let solution = two_hop::solve_two_hop(scenario, opts.tol, sweeps).map_err(classify)?;
            Ok(output::two_hop_output(&solution))
        }
        Scenario::Mac { .. } => {
            let point = match opts.mode {
                DecodingMode::Simultaneous => {
                    mac::solve_mac_simultaneous(scenario, opts.weights, opts.tol)
                }
                DecodingMode::Successive => {
                    let rounds = opts.max_iters.unwrap_or(mac::DEFAULT_MAX_SCA_ITERS);
                    mac::solve_mac_successive(scenario, opts.weights, None, opts.tol, rounds)
                }
            }
            .map_err(classify)?;
            Ok(output::mac_output(&point, opts.mode))
        }
        Scenario::Bc { .. } => {
            let point = bc::solve_bc(scenario, opts.weights, opts.tol).map_err(classify)?;
            Ok(output::bc_output(&point))
        }
    }
}

pub fn run_region(
    scenario: &Scenario,
    mode: DecodingMode,
    n_weights: usize,
    tol: f64,
) -> Result<DepartureRegion, CliError> {
    check_tol(tol)?;
    if n_weights < 3 {
        return Err(CliError::Usage(format!(
            "a region sweep needs at least 3 weight pairs, got {n_weights}"
        )));
    }
    match scenario.topology() {
        Topology::Mac => mac::sweep_region(scenario, mode, n_weights, tol).map_err(classify),
        Topology::Bc => {
            if mode == DecodingMode::Successive {
                return Err(CliError::Usage(
                    "successive decoding only applies to the mac topology".to_string(),
                ));
            }
            bc::sweep_bc_region(scenario, n_weights, tol).map_err(classify)
        }
        Topology::SingleUser | Topology::TwoHop => Err(CliError::Usage(
            "region sweeps require a mac or bc scenario".to_string(),
        )),
    }
}

pub fn run_verify(kind: SuiteKind, seed: u64) -> SuiteReport {
    verify::run_suite(kind, seed)
}

/// Fixed-width pass/fail table, one row per check.
pub fn render_suite(report: &SuiteReport) -> String {
    let width = report
        .checks
        .iter()
        .map(|check| check.name.len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status}  {:<width$}  {}\n",
            check.name, check.detail
        ));
    }
    let passed = report.checks.iter().filter(|check| check.passed).count();
    out.push_str(&format!("{passed}/{} checks passed\n", report.checks.len()));
    out
}
