use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qmeas::qec::{CodeKind, NoiseModel};
use qmeas_cli::commands::{cmd_channel, cmd_qec, cmd_usd, parse_state_arg};
use qmeas_cli::plan::check;
use qmeas_cli::{pretty, run_file, CliError, CliResult, ExperimentSpec, Mode};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qmeas", version, about = "Run measurement, channel and error-correction experiments")]
struct Cli {
    /// Also print human-readable tables to stderr.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and print the result report.
    Run {
        file: PathBuf,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Check an experiment file and print the maximum structural deviations.
    Validate { file: PathBuf },
    /// Repetition-code syndrome table and Monte-Carlo logical error rates.
    Qec {
        #[arg(long, value_enum, default_value = "bit-flip")]
        kind: KindArg,
        /// Flip probability; repeat for several rates. Omit for the table only.
        #[arg(long = "p")]
        p: Vec<f64>,
        #[arg(long, value_enum, default_value = "independent")]
        noise: NoiseArg,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Unambiguous discrimination of two pure states.
    Usd {
        /// State name ("0", "+", "01", ...) or JSON amplitudes.
        #[arg(long)]
        psi0: String,
        #[arg(long)]
        psi1: String,
        /// Which of the two states the register actually holds.
        #[arg(long, default_value_t = 0)]
        truth: usize,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
    },
    /// Apply the channels of a channel file to its initial state.
    Channel { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    BitFlip,
    PhaseFlip,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Independent,
    AtMostOne,
}

fn emit<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::runtime)?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(CliError::runtime),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            file,
            shots,
            seed,
            mode,
        } => {
            let report = run_file(&file, shots, seed, mode)?;
            if cli.pretty {
                pretty::run_report(&report);
            }
            emit(&report)
        }
        Command::Validate { file } => {
            let spec = ExperimentSpec::load(&file)?;
            let (summary, _) = check(&spec)?;
            if cli.pretty {
                pretty::validation(&summary);
            }
            emit(&summary)?;
            match summary.first_failure() {
                Some(f) => Err(CliError::validation(f)),
                None => Ok(()),
            }
        }
        Command::Qec {
            kind,
            p,
            noise,
            shots,
            seed,
        } => {
            let kind = match kind {
                KindArg::BitFlip => CodeKind::BitFlip,
                KindArg::PhaseFlip => CodeKind::PhaseFlip,
            };
            let noise = match noise {
                NoiseArg::Independent => NoiseModel::Independent,
                NoiseArg::AtMostOne => NoiseModel::AtMostOne,
            };
            let report = cmd_qec(kind, noise, &p, shots, seed)?;
            if cli.pretty {
                pretty::qec(&report);
            }
            emit(&report)
        }
        Command::Usd {
            psi0,
            psi1,
            truth,
            shots,
            seed,
            mode,
        } => {
            let report = cmd_usd(parse_state_arg(&psi0)?, parse_state_arg(&psi1)?, truth, shots, seed, mode)?;
            if cli.pretty {
                pretty::usd(&report);
            }
            emit(&report)
        }
        Command::Channel { file } => {
            let report = cmd_channel(&file)?;
            if cli.pretty {
                pretty::channel(&report);
            }
            emit(&report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmeas: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
