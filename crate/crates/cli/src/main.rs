//! `ost`: coherence certificates, one-shot selection/recovery, and seeded
//! Monte Carlo sweeps.
//!
//! Exit codes: 0 ok, 1 check failure, 2 usage, 3 validation,
//! 4 over-selection, 5 I/O.

mod commands;
mod frame_args;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ExperimentArgs, RecoverArgs, SelectArgs, VerifyArgs};
use frame_args::FrameArgs;

#[derive(Parser)]
#[command(name = "ost", version, about = "One-step thresholding for sparse model selection and recovery")]
struct Cli {
    /// Worker threads for parallel sections (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case/average coherence, spectral norm, Welch bound and the
    /// coherence-property checks of a frame.
    Coherence {
        #[command(flatten)]
        frame: FrameArgs,
        /// Use closed forms for Alltop frames instead of computing.
        #[arg(long)]
        analytic: bool,
    },
    /// Model selection by OST (threshold) or sorted OST (known k).
    Select(SelectArgs),
    /// Noiseless recovery: OST selection followed by least squares.
    Recover(RecoverArgs),
    /// Run a Monte Carlo sweep described by a JSON config.
    Experiment(ExperimentArgs),
    /// Run one of the bundled empirical self-checks.
    Verify(VerifyArgs),
    /// Write a frame in the text format accepted by --frame-file.
    Frame {
        #[command(flatten)]
        frame: FrameArgs,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

/// Failure categories, each with a stable exit code.
#[derive(Debug)]
pub enum Failure {
    Check(String),
    Usage(String),
    Core(ost_core::Error),
}

impl From<ost_core::Error> for Failure {
    fn from(e: ost_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        use ost_core::Error as E;
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Core(E::OverSelection { .. }) => 4,
            Failure::Core(E::Io { .. }) => 5,
            Failure::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: usage: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not configure thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Coherence { frame, analytic } => commands::coherence(&frame, analytic),
        Command::Select(a) => commands::select(&a),
        Command::Recover(a) => commands::recover(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Frame { frame, out } => commands::export_frame(&frame, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
