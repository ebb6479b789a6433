use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eprsim::Execution;
use eprsim_cli::config::{self, Overrides};
use eprsim_cli::{commands, CliError, Report};

#[derive(Parser)]
#[command(name = "eprsim", version, about = "Broadband EPR-beam simulator")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bundled scenario: paper-fig2, paper-fig3, lossless, phasematch-12mm.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory, overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Seed for analyzer jitter and Monte-Carlo sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run library kernels on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-source noise spectra (vacuum, squeezed, anti-squeezed, dark).
    SqueezeSpectrum,
    /// EPR inseparability sum versus frequency.
    EprSpectrum,
    /// Phase-matching curve and bandwidth of the waveguide.
    Phasematch,
    /// Squeezing before a known loss from the level measured after it.
    Infer {
        #[arg(long, allow_hyphen_values = true)]
        measured_db: f64,
        #[arg(long)]
        eta: f64,
    },
    /// Analytic pipeline versus Monte-Carlo sampling.
    Validate {
        /// Also write the raw samples to `mc_samples.bin`.
        #[arg(long)]
        dump_samples: bool,
    },
    /// Print the resolved scenario as TOML.
    ShowConfig,
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    if let Command::Infer { measured_db, eta } = cli.command {
        return commands::run_infer(measured_db, eta);
    }
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
    };
    let scenario = config::resolve(cli.config.as_deref(), cli.preset.as_deref(), &overrides)?;
    let report = match cli.command {
        Command::SqueezeSpectrum => commands::run_squeeze_spectrum(&scenario, exec)?,
        Command::EprSpectrum => commands::run_epr_spectrum(&scenario, exec)?,
        Command::Phasematch => commands::run_phasematch(&scenario, exec)?,
        Command::Validate { dump_samples } => commands::run_validate(&scenario, dump_samples, exec)?,
        Command::ShowConfig => {
            print!("{}", config::to_toml(&scenario)?);
            return Ok(Report::default());
        }
        Command::Infer { .. } => unreachable!("handled above"),
    };
    report.write(Path::new(&scenario.output.dir))?;
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{}", report.summary.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
