use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vqccs_cli::config::{self, ExperimentConfig};
use vqccs_cli::error::{exit, CliError, CliResult};
use vqccs_cli::pipeline::{self, SweepAxis};

#[derive(Parser)]
#[command(name = "vqccs", version, about = "Grant-free activity detection and channel estimation experiments")]
struct Cli {
    /// TOML configuration; defaults describe the reference scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides scenario.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides out_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train, validation and test datasets.
    GenData,
    /// Train the VQC denoiser (and detector MLP) on the training set.
    Train {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run all enabled solvers on the test set and write metrics.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Measurement shots per expectation; 0 evaluates exactly.
        #[arg(long)]
        shots: Option<u32>,
    },
    /// Evaluate over a grid of one scenario parameter.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Train VQC-CS afresh at every grid point.
        #[arg(long)]
        retrain: bool,
    },
    /// Print a summary of the last evaluation.
    Report,
}

fn settings(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = config::load(cli.config.as_deref(), std::env::vars())?;
    if let Some(seed) = cli.seed {
        cfg.scenario.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    let mut cfg = settings(&cli)?;
    match cli.command {
        Command::GenData => {
            let manifest = pipeline::cmd_gen_data(&cfg)?;
            for f in &manifest.files {
                println!("{}  {} instances  sha256 {}", f.path.display(), f.count, f.sha256);
            }
        }
        Command::Train { checkpoint } => {
            let path = pipeline::checkpoint_path(&cfg, checkpoint.as_deref());
            let mut progress = |seed: u64, s: &vqccs::training::EpochStats| {
                eprintln!(
                    "seed {seed} epoch {:>4}  train {:.5}  val {:.5}",
                    s.epoch, s.train_loss, s.val_loss
                );
            };
            let ck = pipeline::cmd_train(&cfg, &path, Some(&mut progress))?;
            println!(
                "best epoch {} val loss {:.5}; checkpoint {}",
                ck.best_epoch,
                ck.best_val_loss,
                path.display()
            );
        }
        Command::Eval { checkpoint, shots } => {
            if let Some(s) = shots {
                cfg.solvers.shots = s;
            }
            let eval = pipeline::cmd_eval(&cfg, checkpoint.as_deref())?;
            print!("{}", pipeline::summary(&eval));
        }
        Command::Sweep {
            axis,
            values,
            checkpoint,
            retrain,
        } => {
            cfg.validate()?;
            let ck = if retrain || !cfg.solvers.enabled.contains(&vqccs_cli::SolverKind::VqcCs) {
                None
            } else {
                let path = pipeline::checkpoint_path(&cfg, checkpoint.as_deref());
                path.exists()
                    .then(|| pipeline::load_checkpoint(&cfg, &path))
                    .transpose()?
            };
            let rows = pipeline::sweep(&cfg, axis, &values, ck.as_ref(), retrain)?;
            let path = pipeline::write_sweep(&cfg, &rows)?;
            println!("{} rows written to {}", rows.len(), path.display());
        }
        Command::Report => print!("{}", pipeline::cmd_report(&cfg)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
