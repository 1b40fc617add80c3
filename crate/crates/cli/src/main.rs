use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qwiretap_cli::config::{parse_config_for, Command};
use qwiretap_cli::run::{run, RunError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    Region,
    Sweep,
    Covering,
    Permutation,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Region => Command::Region,
            CommandArg::Sweep => Command::Sweep,
            CommandArg::Covering => Command::Covering,
            CommandArg::Permutation => Command::Permutation,
        }
    }
}

/// Secrecy rate regions and coding diagnostics for quantum wiretap channels
/// with unreliable entanglement assistance.
#[derive(Debug, Parser)]
#[command(name = "qwiretap", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,
    /// Configuration file (`key = value` lines, `#` comments).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, RunError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Io(format!("{}: {e}", cli.config.display())))?;
    let config = parse_config_for(&text, Some(cli.command.into()))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(RunError::Input("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| RunError::Io(e.to_string()))?;
    pool.install(|| run(&config, &cli.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
