//! Runs one command from a JSON configuration and prints the CSV.
//!
//! cargo run --release --example run_config -- docs/presets/smf.json [command]

use isrs_nli::commands::{run, Command, Overrides};
use isrs_nli::config::Config;

fn main() -> isrs_nli::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "docs/presets/smf.json".into());
    let command: Command = args.next().as_deref().unwrap_or("estimate").parse()?;
    let config = Config::from_path(&path)?;
    let output = run(&config, command, &Overrides::default())?;
    print!("{}", output.text);
    Ok(())
}
