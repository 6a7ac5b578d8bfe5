use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use isrs_nli::closed_form::Tier;
use isrs_nli::commands::{run, write_output, Command, Overrides};
use isrs_nli::config::Config;

/// Per-channel nonlinear interference and SNR for wideband WDM links.
#[derive(Debug, Parser)]
#[command(name = "isrs-nli", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// estimate | validate | simulate | sweep | identity-check
    #[arg(long, value_name = "NAME", default_value = "estimate")]
    command: String,
    /// Number of spans, overriding the config.
    #[arg(long, value_name = "N")]
    spans: Option<usize>,
    /// Evaluator tier; repeat or comma-separate for validate.
    #[arg(long, value_name = "TIER", value_delimiter = ',', value_parser = ["cf", "int", "ssfm"])]
    tier: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Symbol RNG seed for the split-step tier.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// SPM coherence exponent.
    #[arg(long, value_name = "F")]
    epsilon: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("isrs-nli: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(args: &Args) -> isrs_nli::Result<PathBuf> {
    let command: Command = args.command.parse()?;
    let config = Config::from_path(&args.config)?;
    let overrides = Overrides {
        spans: args.spans,
        epsilon: args.epsilon,
        seed: args.seed,
        tiers: args.tier.iter().map(|t| t.parse::<Tier>()).collect::<isrs_nli::Result<_>>()?,
    };
    let output = run(&config, command, &overrides)?;
    write_output(&args.out, &output)
}
