use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use complex_eikonal::exec::configure_threads;
use complex_eikonal::Execution;
use eikonal_cli::{execute, verify, CliError, RunConfig, Subcommand};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Constant,
    Classify,
    Variable,
    Verify,
    Field,
}

/// Complex eikonal solutions: sampling, light/shadow atlas, variable-index
/// pipeline, field demo and residual audits.
#[derive(Debug, Parser)]
#[command(name = "eikonal", version)]
struct Args {
    command: Command,
    /// JSON run configuration (not used by `verify`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (for `verify`: the run to audit).
    #[arg(long)]
    out: PathBuf,
    /// Override the grid resolution.
    #[arg(long)]
    grid: Option<usize>,
    /// Override the primary gate tolerance (`constant`: eikonal residual,
    /// `variable`: solver residual).
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated output formats: csv, json, svg.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

fn sub(c: Command) -> Subcommand {
    match c {
        Command::Constant => Subcommand::Constant,
        Command::Classify => Subcommand::Classify,
        Command::Variable => Subcommand::Variable,
        Command::Verify => Subcommand::Verify,
        Command::Field => Subcommand::Field,
    }
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(n) = args.grid {
        cfg.grid.resolution = n;
    }
    if let Some(t) = args.tol {
        match args.command {
            Command::Variable => cfg.tolerances.solver = t,
            _ => cfg.tolerances.residual = t,
        }
    }
    if let Some(f) = &args.format {
        cfg.outputs = f.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<i32, CliError> {
    let exec = Execution::default();
    let outcome = match args.command {
        Command::Verify => verify::verify(&args.out, exec)?,
        c => execute(sub(c), &load(args)?, &args.out, exec)?,
    };
    for (k, v) in &outcome.summary {
        if k == "recorded_error" || k == "first_mismatch" {
            eprintln!("{k}: {v}");
        }
    }
    print!("{}", verify::report(&outcome));
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var("EIKONAL_THREADS").ok().and_then(|s| s.parse().ok()) {
        configure_threads(n);
    }
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("eikonal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
