mod config;
mod error;
mod output;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig};
use error::CliError;
use output::{read_manifest, Sink};

/// Integrable curve flows, KdV hierarchy algebra and hyperelliptic functions.
#[derive(Debug, Parser)]
#[command(name = "elastica", version)]
struct Cli {
    /// Directory for tables and manifest.json (nothing is written without it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(flatten)]
    Run(RunConfig),
    /// Rerun the configuration stored in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    let (config, format) = match cli.command {
        Command::Run(c) => (c, cli.format),
        Command::Replay { manifest } => {
            let m = read_manifest(&manifest)?;
            (m.config, m.format)
        }
    };
    let mut sink = Sink::new(cli.out, format)?;
    let report = run::execute(&config, &mut sink)?;
    if let Some(path) = sink.finish(&config, report.results)? {
        eprintln!("{} run written to {}", config.name(), path.display());
    }
    Ok(report.success)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
