mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};

/// Bad flags or parameters; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<qrf_core::Error> for CliError {
    fn from(e: qrf_core::Error) -> Self {
        match e {
            qrf_core::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QRF_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| UsageError(format!("QRF_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failed(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let (command, options) = match &cli.json_config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
            let cfg = RunConfig::from_json(&text)?;
            (cli.command.or(cfg.command), cli.options.merged_over(cfg.options))
        }
        None => (cli.command, cli.options),
    };
    let command =
        command.ok_or_else(|| UsageError("a subcommand is required (channel, verify, sweep, postselect)".into()))?;
    options.validate()?;
    match command {
        Command::Channel => commands::channel(&options).map(|_| true),
        Command::Verify => commands::verify_cmd(&options),
        Command::Sweep => commands::sweep(&options).map(|_| true),
        Command::Postselect => commands::postselect(&options).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("usage: qrf <channel|verify|sweep|postselect> [--scenario phase|cartesian|direction] [options]; see --help");
            ExitCode::from(2)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
