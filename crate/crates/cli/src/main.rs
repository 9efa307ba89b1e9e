//! `robarch`: supernet training, search, screening, reporting and final
//! training from the command line.
//!
//! Exit codes: 0 ok, 2 config, 3 I/O, 4 missing prerequisite artifact,
//! 5 numeric failure.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robarch::search::{EvaluatorKind, Mode};
use robarch::surrogate::SurrogateKind;

use commands::{Overrides, Pick};
use error::CliError;

#[derive(Parser)]
#[command(name = "robarch", version, about = "Bi-fidelity surrogate-assisted search for robust cell architectures")]
struct Cli {
    /// Threads for parallel evaluation.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat JSON config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `$ROBARCH_OUT/<command>`, else `runs/<command>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchFlags {
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    surrogate: Option<SurrogateKind>,
    #[arg(long)]
    evaluator: Option<EvaluatorKind>,
    /// Supernet checkpoint for the micronet evaluator.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Adversarially train the weight-sharing supernet.
    TrainSupernet {
        #[command(flatten)]
        common: Common,
    },
    /// Run the search and write a run directory.
    Search {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: SearchFlags,
    },
    /// Re-score a run's archive at high fidelity and keep its front.
    Screen {
        run: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Merge screened fronts and hypervolume histories of several runs.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one architecture from scratch and report its error rates.
    FinalTrain {
        run: Option<PathBuf>,
        /// Row of the run's screened.csv.
        #[arg(long, conflicts_with = "genome", required_unless_present = "genome")]
        index: Option<usize>,
        #[arg(long)]
        genome: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::TrainSupernet { common } => {
            let ov = Overrides { seed: common.seed, ..Overrides::default() };
            commands::train_supernet(common.config.as_deref(), &ov, common.out)
        }
        Command::Search { common, flags } => {
            let ov = Overrides { seed: common.seed, mode: flags.mode, surrogate: flags.surrogate, evaluator: flags.evaluator, checkpoint: flags.checkpoint };
            commands::search(common.config.as_deref(), &ov, common.out)
        }
        Command::Screen { run, checkpoint } => commands::screen(&run, &Overrides { checkpoint, ..Overrides::default() }),
        Command::Report { runs, out } => commands::report(&runs, out),
        Command::FinalTrain { run, index, genome, common } => {
            let pick = match (index, genome) {
                (Some(i), _) => Pick::Index(i),
                (None, Some(g)) => Pick::Genome(g),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let ov = Overrides { seed: common.seed, ..Overrides::default() };
            commands::final_train(run.as_deref(), &pick, common.config.as_deref(), &ov, common.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("robarch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
