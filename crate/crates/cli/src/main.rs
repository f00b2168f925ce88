use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kaczmarz_cli::{catalog_json, catalog_text, run_config, Overrides};

#[derive(Parser)]
#[command(name = "kaczmarz", version, about = "Relaxed Kaczmarz experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its artifacts.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides the root seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the experiment kinds.
    List {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List { json } => {
            if json {
                println!("{:#}", catalog_json());
            } else {
                print!("{}", catalog_text());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, output_dir, seed } => match run_config(&config, &Overrides { output_dir, seed }) {
            Ok(summary) => {
                for cell in &summary.cells {
                    let label = cell.lambda.map_or_else(|| "-".to_string(), |l| format!("lambda={l}"));
                    let failed: Vec<&str> = cell.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                    if failed.is_empty() {
                        println!("{} {label}: ok", summary.kind);
                    } else {
                        println!("{} {label}: FAILED {}", summary.kind, failed.join(", "));
                    }
                }
                println!("wrote {} files to {}", summary.artifacts.len(), summary.output_dir.display());
                if summary.all_passed {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
