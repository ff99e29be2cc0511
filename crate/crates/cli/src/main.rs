mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "kflag", version, about = "Run and verify flag-functional case files")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Include integrand traces.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Add a decimal rendering with this many digits next to exact values.
    #[arg(long, value_name = "DIGITS", global = true)]
    pub decimal: Option<usize>,
    /// Case directory (default: $KFLAG_CASES, then the bundled cases).
    #[arg(long, value_name = "DIR", global = true)]
    pub cases: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the cases in the case directory.
    List,
    /// Run one case file and compare against its expected values.
    Run {
        /// Path to a case file, or the name of a case in the case directory.
        case: String,
    },
    /// Run every case in the case directory.
    VerifyAll,
    /// Evaluate one functional on one flag.
    Eval {
        case: String,
        flag: usize,
        functional: String,
    },
    /// Zariski decomposition of a class on a case's surface.
    Decompose {
        case: String,
        /// Class as `name:coeff,...`, e.g. `l:3,e1:-1`.
        class: String,
        /// Use this flag's surface instead of the case surface.
        #[arg(long)]
        flag: Option<usize>,
    },
    /// Volume of a class on a case's surface.
    Volume {
        case: String,
        class: String,
        #[arg(long)]
        flag: Option<usize>,
    },
    /// Pseudoeffective and nef thresholds of `class - v·curve`.
    Threshold {
        case: String,
        class: String,
        curve: String,
        #[arg(long)]
        flag: Option<usize>,
    },
}

/// Report text plus the exit status; diagnostics are written as they arise.
pub struct Outcome {
    pub report: String,
    pub code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| commands::dispatch(&cli)).unwrap_or_else(|_| Outcome {
        report: String::new(),
        code: 1,
    });
    let mut out = std::io::stdout().lock();
    if out.write_all(outcome.report.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(outcome.code)
}
