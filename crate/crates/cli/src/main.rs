use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dunkl_pauli_cli::output::OUT_ENV;
use dunkl_pauli_cli::{parse_config, run, RunError, Subcommand};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    AngularSpectrum,
    EpSolve,
    StationaryEnergy,
    Evolve,
    Verify,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::AngularSpectrum => Subcommand::AngularSpectrum,
            Command::EpSolve => Subcommand::EpSolve,
            Command::StationaryEnergy => Subcommand::StationaryEnergy,
            Command::Evolve => Subcommand::Evolve,
            Command::Verify => Subcommand::Verify,
        }
    }
}

/// Exact solutions of the time-dependent Dunkl-Pauli oscillator.
///
/// Exit codes: 0 success, 1 tolerance failure, 2 config error, 3 collapse of
/// the auxiliary solution.
#[derive(Parser, Debug)]
#[command(name = "dunkl-pauli", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to the config, then $DUNKL_PAULI_OUT, then ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted for interface compatibility; every computation is deterministic.
    #[arg(long)]
    seedless: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let _ = cli.seedless;
    let scenario = match parse_config(&cli.config) {
        Ok(s) => s,
        Err(e) => return fail(&RunError::Config(e)),
    };
    let out = cli
        .out
        .or_else(|| scenario.config.outputs.directory.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match run(cli.command.into(), &scenario, out) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if summary.pass { 0 } else { 1 })
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("dunkl-pauli: {e}");
    ExitCode::from(e.exit_code() as u8)
}
