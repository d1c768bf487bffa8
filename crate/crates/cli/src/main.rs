use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cylspec_cli::{run, RunOptions};

#[derive(Parser)]
#[command(name = "cylspec", version, about = "Spectra of Maxwell operators in layered cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured analysis and write the report.
    Run {
        config: PathBuf,
        /// Concurrent per-mode solves (defaults to the number of CPUs).
        #[arg(long, env = "CYLSPEC_JOBS")]
        jobs: Option<usize>,
        /// Also compare weighted and transformed eigenvalues.
        #[arg(long)]
        oracle: bool,
        /// Write each mode potential as a (y, V) table.
        #[arg(long)]
        dump_potentials: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        jobs,
        oracle,
        dump_potentials,
    } = Cli::parse().command;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match run(&config, RunOptions { jobs, oracle, dump_potentials }) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
