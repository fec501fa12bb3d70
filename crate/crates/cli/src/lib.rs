//! Command-line orchestration for the complex-eikonal library: JSON run
//! configurations, deterministic CSV/JSON/SVG artifacts and a `verify` audit
//! that recomputes every residual from the written samples.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod config;
pub mod csv;
pub mod emit;
pub mod run;
pub mod verify;

pub use config::RunConfig;
pub use run::{execute, Outcome, Subcommand};
pub use verify::verify;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] complex_eikonal::Error),
}

impl CliError {
    /// Process exit code: 1 for configuration and i/o problems, 2 for
    /// numerical failures (the run itself could not meet its gates).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(_) => 2,
        }
    }
}
