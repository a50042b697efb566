use bergkit::config::ExperimentConfig;
use bergkit::experiment;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bergkit", about = "Weighted Bergman kernels, equilibrium potentials and sampling")]
struct Cli {
    /// Override stochastic.seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment and write CSV artifacts to out.dir.
    Run { config: PathBuf },
    /// Print the per-k convergence table on stdout.
    Table { config: PathBuf },
    /// Draw sample batches only (samples.csv).
    Sample { config: PathBuf },
    /// Emit the equilibrium-envelope profile CSV only.
    Envelope { config: PathBuf },
}

fn load(path: &PathBuf, seed: Option<u64>) -> bergkit::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> bergkit::Result<()> {
    match &cli.command {
        Command::Run { config } => experiment::run(&load(config, cli.seed)?),
        Command::Table { config } => {
            experiment::table(&load(config, cli.seed)?, &mut std::io::stdout())
        }
        Command::Sample { config } => experiment::sample(&load(config, cli.seed)?),
        Command::Envelope { config } => experiment::envelope(&load(config, cli.seed)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiment::exit_code(&e) as u8)
        }
    }
}
