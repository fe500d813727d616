//! Command-line front end for the `kframe` crate.
//!
//! Exit codes: 0 when the inequality is certified (or a computation
//! succeeded), 1 when it is refuted, degenerate or a prediction is violated,
//! 2 on input errors. Reports are written on exits 0 and 1.

pub mod args;
pub mod commands;
pub mod io;
pub mod report;
pub mod sweep;

pub use args::Cli;
pub use commands::{execute, resolve_tol, run, Outcome, EXIT_INPUT, EXIT_OK, EXIT_REFUTED, TOL_ENV};
pub use io::InputError;
