use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lanefree::experiment::{self, Config, EXIT_OK, EXIT_PARTIAL};
use lanefree::Result;

/// Lane-free highway simulation with tree-search and network-guided drivers.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// TOML configuration file (default: $LANEFREE_CONFIG, then built-in defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set mcts.iterations=500`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and print its metrics.
    Simulate {
        /// Also write every vehicle's trajectory to this CSV file.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
    /// Record self-play decisions of isotropic MCTS as a training dataset.
    Collect {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        out: PathBuf,
        /// Search iterations per decision.
        #[arg(long, default_value_t = 1000)]
        iterations: u32,
    },
    /// Train the policy network on a dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the reliability table of a model on a dataset.
    Calibrate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured experiment grid, resuming an existing results file.
    Experiment {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one episode logging only the given vehicle ids.
    Trajectories {
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = Config::load(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Simulate { trajectories } => {
            let m = experiment::simulate(&cfg, trajectories.as_deref())?;
            println!(
                "algorithm={} collisions={} speed_average={:.4} delay_average={:.4} entered={} exited={}",
                cfg.run.algorithm,
                m.collisions,
                m.speed_average,
                m.delay_average,
                m.vehicles_entered,
                m.vehicles_exited
            );
        }
        Command::Collect { rows, out, iterations } => {
            cfg.mcts.iterations = iterations;
            let mut last = 0;
            let n = experiment::collect(&cfg, rows, &out, |n| {
                if n / 1000 > last {
                    last = n / 1000;
                    eprintln!("{n} rows");
                }
            })?;
            println!("{n} rows written to {}", out.display());
        }
        Command::Train { dataset, out } => {
            experiment::train(&cfg, &dataset, &out, |r| {
                let val = r
                    .validation_accuracy
                    .map_or("-".to_string(), |a| format!("{a:.4}"));
                println!(
                    "epoch {:>3} lr {:.6} loss {:.5} train_acc {:.4} val_acc {val}",
                    r.epoch, r.learning_rate, r.train_loss, r.train_accuracy
                );
            })?;
            println!("model written to {}", out.display());
        }
        Command::Calibrate { model, dataset, out } => {
            let report = experiment::calibrate(&model, &dataset, out.as_deref())?;
            print!("{}", report.to_table());
        }
        Command::Experiment { out } => {
            let summary = experiment::experiment(&cfg, &out, |row| {
                let k = &row.key;
                let status = match &row.outcome {
                    Ok(m) => format!("collisions={} speed={:.3}", m.collisions, m.speed_average),
                    Err(e) => format!("failed: {e}"),
                };
                eprintln!("{} flow={} iterations={} seed={} {status}", k.algorithm, k.flow, k.iterations, k.seed);
            })?;
            println!(
                "completed={} failed={} skipped={}",
                summary.completed, summary.failed, summary.skipped
            );
            if summary.failed > 0 {
                return Ok(EXIT_PARTIAL);
            }
        }
        Command::Trajectories { ids, out } => {
            for id in experiment::trajectories(&cfg, &ids, &out)? {
                eprintln!("warning: vehicle {id} never appeared; skipped");
            }
            println!("trajectories written to {}", out.display());
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiment::exit_code(&e) as u8)
        }
    }
}
