//! Regret as a function of the learning-rate parameter.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Resolved};
use crate::plot::{line_plot, Axes, Series};
use crate::runner::{aggregate, replicate, thread_pool, write_json, Plan, Replication};

pub const DEFAULT_GAMMA_MIN: f64 = 1e-5;
pub const DEFAULT_GAMMA_MAX: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 25;

/// `points` values evenly spaced in log scale from `min` to `max`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) {
        bail!("gamma range: need 0 < gamma_min <= gamma_max, got [{min}, {max}]");
    }
    if points == 0 {
        bail!("points: must be >= 1");
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.ln(), max.ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect();
    grid[0] = min;
    grid[points - 1] = max;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub mean: f64,
    pub stderr: f64,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Cells simulated by this call.
    pub computed: usize,
    /// Cells taken from an earlier, matching run.
    pub reused: usize,
    pub output_dir: PathBuf,
}

/// Stored result of one (γ, replication) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Cell {
    config_hash: String,
    gamma: f64,
    replication: Replication,
}

fn cell_path(dir: &Path, gamma_index: usize, replication: usize) -> PathBuf {
    dir.join(format!("g{gamma_index:03}_r{replication:04}.json"))
}

fn load_cell(path: &Path, hash: &str, gamma: f64, seed: u64) -> Option<Replication> {
    let text = fs::read_to_string(path).ok()?;
    let cell: Cell = serde_json::from_str(&text).ok()?;
    (cell.config_hash == hash && cell.gamma.to_bits() == gamma.to_bits() && cell.replication.seed == seed)
        .then_some(cell.replication)
}

/// Runs the experiment once per grid value, reusing cells already on disk.
///
/// Cells live under `output_dir/sweep/cells`; the table goes to
/// `sweep.csv` and the plot to `sweep.svg` next to them.
pub fn sweep_gamma(config: &ExperimentConfig, grid: &[f64], jobs: usize) -> Result<SweepOutcome> {
    if grid.is_empty() {
        bail!("gamma grid: must not be empty");
    }
    if let Some(g) = grid.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        bail!("gamma grid: every value must be positive, got {g}");
    }
    config.policy.with_gamma(grid[0])?;
    let hash = config.hash();
    let out = config.output_dir.join("sweep");
    let cells_dir = out.join("cells");
    fs::create_dir_all(&cells_dir).with_context(|| format!("cannot create {}", cells_dir.display()))?;

    let mut policies = Vec::with_capacity(grid.len());
    let mut resolved: Vec<Resolved> = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let mut c = config.clone();
        c.policy = config.policy.with_gamma(gamma)?;
        resolved.push(c.resolve()?);
        policies.push(c.policy);
    }
    let mut results: Vec<Vec<Option<Replication>>> = vec![vec![None; config.replications]; grid.len()];
    let mut pending = Vec::new();
    for (gi, (&gamma, slots)) in grid.iter().zip(results.iter_mut()).enumerate() {
        for (r, slot) in slots.iter_mut().enumerate() {
            let seed = config.seed.wrapping_add(r as u64);
            *slot = load_cell(&cell_path(&cells_dir, gi, r), &hash, gamma, seed);
            if slot.is_none() {
                pending.push((gi, r));
            }
        }
    }
    let reused = grid.len() * config.replications - pending.len();
    log::info!("sweep: {} cells to run, {reused} reused", pending.len());

    let pool = thread_pool(jobs)?;
    let (tx, rx) = mpsc::channel::<(usize, usize, Replication)>();
    let computed = std::thread::scope(|scope| -> Result<Vec<(usize, usize, Replication)>> {
        // single writer for every cell file
        let collector = scope.spawn(|| -> Result<Vec<(usize, usize, Replication)>> {
            let mut done = Vec::new();
            for (gi, r, rep) in rx {
                let cell = Cell {
                    config_hash: hash.clone(),
                    gamma: grid[gi],
                    replication: rep,
                };
                write_json(&cell_path(&cells_dir, gi, r), &cell)?;
                done.push((gi, r, cell.replication));
            }
            Ok(done)
        });
        let run = pool.install(|| {
            use rayon::prelude::*;
            pending.par_iter().try_for_each_with(tx, |tx, &(gi, r)| -> Result<()> {
                let plan = Plan {
                    resolved: &resolved[gi],
                    policy: &policies[gi],
                    horizon: config.horizon,
                    prefixes: &[],
                    trajectory_dir: None,
                };
                let rep = replicate(&plan, config.seed.wrapping_add(r as u64))?;
                // the collector only stops once every sender is gone
                let _ = tx.send((gi, r, rep));
                Ok(())
            })
        });
        let done = collector.join().expect("collector thread panicked")?;
        run?;
        Ok(done)
    })?;
    let computed_count = computed.len();
    for (gi, r, rep) in computed {
        results[gi][r] = Some(rep);
    }

    let rows: Vec<SweepRow> = grid
        .iter()
        .zip(&results)
        .map(|(&gamma, reps)| {
            let reps: Vec<Replication> = reps.iter().flatten().cloned().collect();
            let a = aggregate(&reps);
            SweepRow {
                gamma,
                mean: a.mean,
                stderr: a.stderr,
                completed: a.completed,
                failed: a.failed,
            }
        })
        .collect();

    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let series = Series {
        xs: rows.iter().map(|r| r.gamma).collect(),
        ys: rows.iter().map(|r| r.mean).collect(),
        errors: Some(rows.iter().map(|r| r.stderr).collect()),
    };
    let log_y = rows.iter().all(|r| r.mean > 0.0);
    let title = format!("{} on {}", config.policy.label(), resolved[0].manifest.problem);
    let svg = line_plot(
        &series,
        Axes {
            title: &title,
            x_label: "gamma",
            y_label: "mean regret",
            log_x: true,
            log_y,
        },
    );
    fs::write(out.join("sweep.svg"), svg)?;
    write_json(&out.join("manifest.json"), &resolved[0].manifest)?;

    Ok(SweepOutcome {
        rows,
        computed: computed_count,
        reused,
        output_dir: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = log_grid(DEFAULT_GAMMA_MIN, DEFAULT_GAMMA_MAX, DEFAULT_POINTS).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-5);
        assert_eq!(g[24], 10.0);
        let ratio = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-9));
        assert!((ratio.powi(24) - 1e6).abs() < 1e-3);
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert!(log_grid(1.0, 0.5, 3).is_err());
        assert!(log_grid(0.1, 1.0, 0).is_err());
        assert_eq!(log_grid(0.1, 0.1, 1).unwrap(), vec![0.1]);
    }
}
