use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varexp::cli::{self, Overrides, Task};

#[derive(Parser)]
#[command(name = "varexp-solve", version, about = "Variable-exponent variational solvers")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Task (overrides `task`): verify, mountain-pass, fountain, lambda1,
        /// minimize-at-lambda or norms.
        #[arg(long)]
        task: Option<Task>,
        /// Record wall-clock timings in the report.
        #[arg(long)]
        timings: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VAREXP_LOG", "warn")).init();
    let Command::Run { config, out, seed, task, timings } = Args::parse().command;
    let overrides = Overrides { output_dir: out, seed, task, timings };
    match cli::run(&config, &overrides) {
        Ok(outcome) => {
            println!("{}", outcome.report_path.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
