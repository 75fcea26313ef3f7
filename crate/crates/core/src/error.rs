//! Error type shared by all solvers.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two sequences that must be slot-aligned have different lengths.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A numeric argument is outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A profile or policy entry is negative or not finite.
    #[error("invalid value at slot {slot}: {value}")]
    InvalidValue { slot: usize, value: f64 },

    /// An empty horizon was supplied where at least one slot is required.
    #[error("empty horizon")]
    EmptyHorizon,

    /// The scenario fails its structural invariants.
    #[error("invalid scenario: {}", violations.join("; "))]
    InvalidScenario { violations: Vec<String> },

    /// A cumulative spending plan exceeds the harvested prefix budget.
    /// `prefix` is the first (1-based) slot count at which it happens.
    #[error("infeasible at prefix {prefix}: requires {required}, available {available}")]
    InfeasiblePrefix {
        prefix: usize,
        required: f64,
        available: f64,
    },

    /// The solver combination cannot handle the given scenario shape.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A constrained program has no strictly feasible point.
    #[error("infeasible program: {0}")]
    InfeasibleProgram(String),

    /// A brute-force oracle was asked for more work than it will accept.
    #[error("oracle limit exceeded: {what} = {got}, maximum {max}")]
    OracleLimit {
        what: &'static str,
        got: usize,
        max: usize,
    },
}
