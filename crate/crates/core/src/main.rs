use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ontosim::cli::{self, ExperimentArgs, Failure, SimArgs, TrainArgs};
use ontosim::{Dimension, Execution, Strategy, TrainingConfig};

#[derive(Parser)]
#[command(
    name = "ontosim",
    version,
    about = "Multi-dimensional ontology similarity with trainable weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TrainingOpts {
    /// Learning rate of the proportional update.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Shuffled repetitions averaged by `experiment`.
    #[arg(long, default_value_t = 300)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainingOpts {
    fn config(&self) -> TrainingConfig {
        TrainingConfig {
            alpha: self.alpha,
            repetitions: self.repetitions,
            seed: self.seed,
            ..TrainingConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load an ontology, report structural errors and per-dimension counts.
    Validate {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Global and per-dimension similarity of two concepts.
    Sim {
        #[arg(long)]
        ontology: PathBuf,
        concept1: String,
        concept2: String,
        /// Trained state; all-ones weights are used without it.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Pair id selecting a pair-oriented weight vector.
        #[arg(long)]
        pair_id: Option<u32>,
        /// User id selecting a user-oriented or hybrid weight vector.
        #[arg(long)]
        user_id: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Train weights once with one strategy and write the state and trace.
    Train {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_parser = parse_strategy)]
        method: Strategy,
        #[command(flatten)]
        training: TrainingOpts,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Where to write the trained state (defaults to OUT/state_METHOD.json).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Feature-oriented state for hybrid training.
        #[arg(long)]
        feature_state: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the full evaluation protocol, or one single-dimension baseline.
    Experiment {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        training: TrainingOpts,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_parser = parse_dimension)]
        dimension: Option<Dimension>,
        /// Run repetitions on one thread.
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        json: bool,
    },
    /// Synthesize a judgment dataset matching the published pair statistics.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = cli::DEFAULT_JUDGES)]
        users: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn parse_dimension(s: &str) -> Result<Dimension, String> {
    s.parse()
}

fn dispatch(command: Command) -> Result<String, Failure> {
    match command {
        Command::Validate { ontology, json } => cli::cmd_validate(&ontology, json),
        Command::Sim {
            ontology,
            concept1,
            concept2,
            weights,
            pair_id,
            user_id,
            json,
        } => cli::cmd_sim(&SimArgs {
            ontology: &ontology,
            c1: &concept1,
            c2: &concept2,
            weights: weights.as_deref(),
            pair_id,
            user_id,
            json,
        }),
        Command::Train {
            ontology,
            dataset,
            method,
            training,
            out,
            weights,
            feature_state,
            json,
        } => cli::cmd_train(&TrainArgs {
            ontology: &ontology,
            dataset: &dataset,
            method,
            config: training.config(),
            out: &out,
            weights: weights.as_deref(),
            feature_state: feature_state.as_deref(),
            json,
        }),
        Command::Experiment {
            ontology,
            dataset,
            training,
            out,
            dimension,
            sequential,
            json,
        } => cli::cmd_experiment(&ExperimentArgs {
            ontology: &ontology,
            dataset: &dataset,
            config: training.config(),
            out: &out,
            dimension,
            execution: if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
            json,
        }),
        Command::Synth { out, users, seed } => cli::cmd_synth(&out, users, seed),
    }
}

fn main() -> anyhow::Result<ExitCode> {
    let args = Cli::parse();
    match dispatch(args.command) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let written = stdout.write_all(text.as_bytes()).and_then(|()| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    writeln!(stdout)
                }
            });
            match written {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(ExitCode::SUCCESS),
                other => {
                    other.context("writing to stdout")?;
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            Ok(ExitCode::from(failure.exit_code() as u8))
        }
    }
}
