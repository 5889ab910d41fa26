//! Command-line entry points: `train`, `verify`, and `diagnose`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use dpo::policy::Learner;
use dpo::trainer::{diagnose, train, verify, RunConfig};

#[derive(Parser)]
#[command(
    name = "dpo",
    about = "Hybrid on/off-policy actor-critic training, verification, and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on a toy environment and write metrics plus checkpoints.
    Train {
        /// Environment name: pointmass | pendulum | lqr1d.
        #[arg(long)]
        env: Option<String>,
        /// On-policy learner: a2c | trpo | ppo.
        #[arg(long)]
        learner: Option<String>,
        /// Total environment steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Master seed (fans out to independent streams).
        #[arg(long)]
        seed: Option<u64>,
        /// Optional `key = value` config file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for metrics, checkpoints, and snapshots.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits nonzero on any failing check.
    Verify {
        /// estimators | baseline | critic | policy | theorems | all.
        suite: String,
    },
    /// Compute post-run diagnostics for a training output directory.
    Diagnose { dir: PathBuf },
}

fn run() -> dpo::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train {
            env,
            learner,
            steps,
            seed,
            config,
            out,
        } => {
            let mut run_config = match config {
                Some(path) => RunConfig::from_file(&path)?,
                None => RunConfig::defaults(
                    env.clone().unwrap_or_else(|| "pointmass".into()),
                    learner
                        .as_deref()
                        .map(Learner::from_str)
                        .transpose()?
                        .unwrap_or(Learner::Ppo),
                ),
            };
            if let Some(env) = env {
                run_config.env = env;
            }
            if let Some(learner) = learner {
                run_config.learner = Learner::from_str(&learner)?;
            }
            if let Some(steps) = steps {
                run_config.total_steps = steps;
            }
            if let Some(seed) = seed {
                run_config.seed = seed;
            }
            if let Some(out) = out {
                run_config.out_dir = out;
            }
            let report = train(&run_config)?;
            println!(
                "trained {} steps on {} ({}); final eval return {:.4} +- {:.4}",
                report.steps,
                run_config.env,
                run_config.learner,
                report.final_eval_mean,
                report.final_eval_std
            );
            println!("metrics: {}", report.metrics_path.display());
            Ok(true)
        }
        Command::Verify { suite } => {
            let reports = verify::run_suite(&suite)?;
            let mut passed = 0usize;
            for report in &reports {
                println!("{report}");
                if report.pass {
                    passed += 1;
                }
            }
            println!("suite '{suite}': {passed}/{} checks passed", reports.len());
            Ok(passed == reports.len())
        }
        Command::Diagnose { dir } => {
            let report = diagnose(&dir)?;
            print!("{}", report.to_csv());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
