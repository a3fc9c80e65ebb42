use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use oio_bench::sweep::{DEFAULT_GAMMA_MAX, DEFAULT_GAMMA_MIN, DEFAULT_POINTS};
use oio_bench::{growth_fit, log_grid, run_experiment, sweep_gamma, ExperimentConfig};

#[derive(Parser)]
#[command(name = "oio-bench", version, about = "Run online inventory experiments from JSON configs")]
struct Cli {
    /// Worker threads for replications and sweep cells.
    #[arg(long, global = true, default_value_t = default_jobs())]
    jobs: usize,
    /// Base seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of one experiment.
    Run { config: PathBuf },
    /// Repeat the experiment over a log-spaced grid of gamma values.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GAMMA_MIN)]
        gamma_min: f64,
        #[arg(long, default_value_t = DEFAULT_GAMMA_MAX)]
        gamma_max: f64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
    },
    /// Fit the log-log slope of mean regret against the horizon.
    Fit {
        config: PathBuf,
        /// Comma-separated horizons, e.g. 100,1000,10000,100000.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if cli.jobs == 0 {
        bail!("--jobs must be >= 1");
    }
    match cli.command {
        Command::Run { config } => {
            let config = load(&config, cli.seed)?;
            let outcome = run_experiment(&config, cli.jobs)?;
            let a = outcome.aggregate;
            println!(
                "mean regret {:.6} (stderr {:.6}) over {} runs, {} stopped early",
                a.mean, a.stderr, a.completed, a.failed
            );
            println!("results in {}", outcome.output_dir.display());
            if a.failed > 0 {
                bail!("{} replications violated feasibility", a.failed);
            }
        }
        Command::Sweep {
            config,
            gamma_min,
            gamma_max,
            points,
        } => {
            let config = load(&config, cli.seed)?;
            let grid = log_grid(gamma_min, gamma_max, points)?;
            let outcome = sweep_gamma(&config, &grid, cli.jobs)?;
            println!("gamma,mean,stderr");
            for row in &outcome.rows {
                println!("{},{},{}", row.gamma, row.mean, row.stderr);
            }
            println!(
                "{} cells run, {} reused; results in {}",
                outcome.computed,
                outcome.reused,
                outcome.output_dir.display()
            );
        }
        Command::Fit { config, horizons } => {
            let config = load(&config, cli.seed)?;
            let outcome = growth_fit(&config, &horizons, cli.jobs)?;
            for p in &outcome.points {
                println!("T = {:>8}: mean regret {:.6} (stderr {:.6})", p.horizon, p.mean, p.stderr);
            }
            match &outcome.fit {
                Some(f) => println!("slope {:.4}, residual {:.4}", f.slope, f.residual),
                None => println!("no slope: too few positive points"),
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}
