//! Library half of the `ehopt` binary: scenario file parsing, solver
//! dispatch, and output rendering. Kept separate from `main.rs` so the
//! integration tests can drive the same code paths in process.

pub mod commands;
pub mod output;
pub mod scenario;

pub use commands::CliError;
