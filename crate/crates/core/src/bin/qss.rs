//! Command-line front end: `run`, `sweep`, `oracle` and `report`.
//!
//! Detection is reported as data; the exit status is nonzero only when the
//! tool itself fails (bad config, I/O error).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use qss::adversary::{AttackModel, InterceptPolicy, NoiseModel};
use qss::engine::MemoryMode;
use qss::io::{self as qio, CommandError, OracleQuery, OutputFormat};

#[derive(Parser)]
#[command(name = "qss", version, about = "Multiparty quantum secret sharing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sessions and emit result records.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Override `output_path`; `-` writes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Vary one numeric parameter and emit a CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print analytic predictions without simulating.
    Oracle {
        #[arg(long, default_value = "none")]
        attack: String,
        #[arg(long, default_value_t = 0.0)]
        depolarizing: f64,
        #[arg(long, default_value_t = 0.0)]
        loss: f64,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        agents: usize,
        #[arg(long, default_value_t = 32)]
        decoys: usize,
        #[arg(long, default_value_t = 0.05)]
        eta_t: f64,
        #[arg(long, value_enum, default_value_t = Mode::QuantumMemory)]
        memory_mode: Mode,
    },
    /// Print a summary table of a `run` output file.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    QuantumMemory,
    NoMemory,
}

fn open_output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(Box::new(BufWriter::new(File::create(p)?))),
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn execute(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Run { config, seed, trials, output, format } => {
            let mut cfg = qio::parse_config(&config)?;
            for w in &cfg.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(seed) = seed {
                cfg.session.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials.max(1);
            }
            if let Some(format) = format {
                cfg.output_format = match format {
                    Format::Json => OutputFormat::Json,
                    Format::Csv => OutputFormat::Csv,
                };
            }
            let path = output.or_else(|| cfg.output_path.clone());
            let now = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
            let mut out = open_output(path.as_ref())?;
            let summary = qio::cmd_run(&cfg, &mut out, now)?;
            eprintln!(
                "{} trials, detection frequency {:.4} ± {:.4}",
                summary.trials, summary.detection_frequency, summary.detection_stderr
            );
        }
        Command::Sweep { config, param, values, output } => {
            let cfg = qio::parse_config(&config)?;
            for w in &cfg.warnings {
                eprintln!("warning: {w}");
            }
            let mut out = open_output(output.as_ref())?;
            qio::cmd_sweep(&cfg, &param, &values, &mut out)?;
        }
        Command::Oracle { attack, depolarizing, loss, p, agents, decoys, eta_t, memory_mode } => {
            let attack = match attack.as_str() {
                "none" => AttackModel::None,
                name => AttackModel::InterceptResend(
                    InterceptPolicy::parse(name)
                        .ok_or_else(|| CommandError::Usage(format!("unsupported attack `{name}`")))?,
                ),
            };
            let noise = NoiseModel::new(depolarizing, loss).map_err(|e| CommandError::Usage(e.to_string()))?;
            let memory_mode = match memory_mode {
                Mode::QuantumMemory => MemoryMode::QuantumMemory,
                Mode::NoMemory => MemoryMode::NoMemory,
            };
            let q = OracleQuery { attack, noise, p, agents, decoys, eta_t, memory_mode };
            print!("{}", qio::cmd_oracle(&q)?);
        }
        Command::Report { input } => print!("{}", qio::cmd_report(&input)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
