use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use latspec_cli::commands::{clt_cmd, lln_cmd, martingale_error_cmd, simulate_cmd, spectrum_cmd};
use latspec_cli::{exit_code, Overrides, RunConfig};

/// Simulate stationary random fields and check their spectral limit laws.
#[derive(Parser)]
#[command(name = "latspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one realization of the configured field as CSV
    Simulate(Flags),
    /// Tabulate the spectral density on a frequency grid as CSV
    Spectrum(Flags),
    /// Run the central limit and periodogram checks; write a JSON report
    Clt(Flags),
    /// Estimate the martingale approximation error along the shape ladder as CSV
    MartingaleError(Flags),
    /// Estimate rotated row averages along the n1 ladder as CSV
    Lln(Flags),
}

#[derive(Args)]
struct Flags {
    /// Run configuration, TOML (or JSON if the name ends in .json)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output file [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed, overriding experiment.master_seed
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Omit the generation timestamp from reports
    #[arg(long)]
    no_timestamp: bool,
    /// Replicate count, overriding the config
    #[arg(long, value_name = "N")]
    replicates: Option<u64>,
    /// Double every target variance; a correct implementation must then fail
    #[arg(long)]
    negative_control: bool,
}

type Runner = fn(&RunConfig, bool) -> latspec::Result<latspec_cli::Outcome>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (flags, run): (&Flags, Runner) = match &cli.command {
        Command::Simulate(f) => (f, |c, _| simulate_cmd(c)),
        Command::Spectrum(f) => (f, |c, _| spectrum_cmd(c)),
        Command::Clt(f) => (f, clt_cmd),
        Command::MartingaleError(f) => (f, |c, _| martingale_error_cmd(c)),
        Command::Lln(f) => (f, |c, _| lln_cmd(c)),
    };
    let overrides = Overrides {
        out: flags.out.clone(),
        seed: flags.seed,
        replicates: flags.replicates,
        no_timestamp: flags.no_timestamp,
        negative_control: flags.negative_control,
    };
    let result = RunConfig::load(&flags.config).and_then(|mut config| {
        overrides.apply(&mut config);
        run(&config, overrides.negative_control)
    });
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result))
}
