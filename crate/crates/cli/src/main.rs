//! Command-line front end: configured experiments in, trajectories as CSV
//! and phase/consistency reports as JSON with full provenance manifests out.
//!
//! Exit codes: 0 ok, 1 selftest failure, 2 config error, 3 numerical
//! failure, 4 tolerance breach, 5 no periodic orbit.

mod config;
mod run;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mechphase",
    version,
    about = "Reduction, reconstruction, and phase experiments for rigid-body, heavy-top, and magnetic-particle dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured system and write the trajectory CSV.
    Simulate {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Find a periodic reduced orbit and report every phase decomposition
    /// against the direct unreduced phase.
    Phase {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the magnetic-symplectic, minimal-coupling, and Kaluza-Klein
    /// formulations of the same charged-particle motion.
    KaluzaCompare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the reduced-scale invariant suites of all modules.
    Selftest {
        /// Inject a known defect to exercise the failure path
        /// (available: euler-sign).
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Run `simulate` over several configs, merged in order.
    Batch {
        /// TOML run configurations, processed in the given order.
        configs: Vec<String>,
    },
}

fn load(path: &Path) -> Result<RunConfig, ExitCode> {
    RunConfig::from_path(path).map_err(|e| {
        eprintln!("{e}");
        ExitCode::from(run::EXIT_CONFIG as u8)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate { config } => match load(&config) {
            Ok(cfg) => run::cmd_simulate(&cfg),
            Err(code) => return code,
        },
        Command::Phase { config } => match load(&config) {
            Ok(cfg) => run::cmd_phase(&cfg),
            Err(code) => return code,
        },
        Command::KaluzaCompare { config } => match load(&config) {
            Ok(cfg) => run::cmd_kaluza_compare(&cfg),
            Err(code) => return code,
        },
        Command::Selftest { inject_fault } => run::cmd_selftest(inject_fault.as_deref()),
        Command::Batch { configs } => run::cmd_batch(&configs),
    };
    ExitCode::from(code as u8)
}
