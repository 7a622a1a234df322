use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shc_lab::{output, run_with_workers, ExperimentConfig, ExperimentKind, LabError};

#[derive(Parser)]
#[command(name = "shc-lab", version, about = "Spectral heat content experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key=value config file.
    Run {
        config: PathBuf,
        /// Override a config key (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Worker threads for Monte Carlo.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output directory for the CSV table and JSON sidecar.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the experiment kinds.
    ListExperiments,
}

fn run(config: PathBuf, sets: Vec<String>, workers: usize, out: PathBuf) -> Result<(), LabError> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| LabError::Validation(format!("{}: {e}", config.display())))?;
    let cfg = ExperimentConfig::from_text(&text, &sets)?;
    let result = run_with_workers(&cfg, workers)?;
    let (csv, json) = output::write_outputs(&result, &out, &cfg.output)?;
    println!("{}", csv.display());
    println!("{}", json.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::ListExperiments => {
            for k in ExperimentKind::ALL {
                println!("{:<22} {}", k.name(), k.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, sets, workers, out } => match run(config, sets, workers, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("shc-lab: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
