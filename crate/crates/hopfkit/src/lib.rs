//! Command-line front end for `hopf-core`: solvers, energies, charge scans, gradient flows
//! and metric-change certificates, with CSV and JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x < 1.0)` also rejects NaN

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod io;

pub use cli::{Cli, RunConfig};
pub use error::{CliError, Result};

/// Result classes of a run, mapped to process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The run finished but did not meet its threshold.
    Failure,
    /// The harmonic equation has no solution for the charge.
    NoSolution,
    /// A metric-change criterion is certified to fail.
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Success => 0,
            Self::Failure => 1,
            Self::NoSolution => 2,
            Self::Violation => 3,
        }
    }

    pub fn status(self) -> &'static str {
        match self {
            Self::Success => "ok",
            Self::Failure => "failed",
            Self::NoSolution => "no-solution",
            Self::Violation => "violation",
        }
    }
}

/// Resolves the configuration and runs the command.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let config = RunConfig::resolve(cli)?;
    commands::dispatch(&config)
}
