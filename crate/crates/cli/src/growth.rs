//! Empirical growth rate of regret in the horizon.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use oio::simulator::{loglog_slope, mean_stderr, SlopeFit};

use crate::config::ExperimentConfig;
use crate::plot::{line_plot, Axes, Series};
use crate::runner::{replicate_all, write_json, Plan};

pub const MIN_HORIZONS: usize = 4;
pub const MIN_REPLICATIONS: usize = 10;
/// Smallest accepted `max(T) / min(T)`.
pub const MIN_SPAN: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub horizon: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthOutcome {
    pub points: Vec<GrowthPoint>,
    /// Least-squares fit of `log(mean regret)` on `log T` over the kept points.
    pub fit: Option<SlopeFit>,
    /// Horizons left out because their mean regret was not positive.
    pub excluded: Vec<usize>,
    pub failed_replications: usize,
    /// Full-horizon runs whose regret exceeded `DGT`.
    pub naive_violations: usize,
    pub warnings: Vec<String>,
    pub config_hash: String,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

/// Fits the exponent of regret growth across `horizons`.
///
/// Each replication runs once at the largest horizon and the shorter
/// horizons are read off its prefixes, which is exact because no policy
/// here depends on the horizon. Writes `growth.json` and `growth.svg`.
pub fn growth_fit(config: &ExperimentConfig, horizons: &[usize], jobs: usize) -> Result<GrowthOutcome> {
    let mut horizons = horizons.to_vec();
    horizons.sort_unstable();
    horizons.dedup();
    if horizons.len() < MIN_HORIZONS {
        bail!("horizons: need at least {MIN_HORIZONS} distinct values, got {}", horizons.len());
    }
    if horizons[0] == 0 {
        bail!("horizons: every value must be >= 1");
    }
    let longest = *horizons.last().expect("nonempty");
    if (longest as f64) < MIN_SPAN * horizons[0] as f64 {
        bail!("horizons: must span at least two decades, got {}..{longest}", horizons[0]);
    }
    if config.replications < MIN_REPLICATIONS {
        bail!("replications: growth fits need at least {MIN_REPLICATIONS}, got {}", config.replications);
    }
    let mut config = config.clone();
    config.horizon = longest;
    let resolved = config.resolve()?;
    let plan = Plan {
        resolved: &resolved,
        policy: &config.policy,
        horizon: longest,
        prefixes: &horizons,
        trajectory_dir: None,
    };
    let reps = replicate_all(&plan, config.seed, config.replications, jobs)?;
    let failed = reps.iter().filter(|r| r.failed()).count();
    let naive_violations = reps
        .iter()
        .flat_map(|r| &r.bound_checks)
        .filter(|c| c.name == "naive" && !c.satisfied)
        .count();
    let mut warnings = resolved.manifest.warnings.clone();
    if failed > 0 {
        warnings.push(format!("{failed} replications stopped early and are left out"));
    }

    let mut points = Vec::with_capacity(horizons.len());
    for (i, &h) in horizons.iter().enumerate() {
        let values: Vec<f64> = reps
            .iter()
            .filter(|r| !r.failed())
            .map(|r| r.prefix_regrets[i].1)
            .collect();
        let (mean, stderr) = if values.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            mean_stderr(&values)
        };
        points.push(GrowthPoint { horizon: h, mean, stderr });
    }
    let excluded: Vec<usize> = points.iter().filter(|p| !(p.mean > 0.0)).map(|p| p.horizon).collect();
    for h in &excluded {
        let w = format!("mean regret at T = {h} is not positive; point excluded from the fit");
        log::warn!("{w}");
        warnings.push(w);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.horizon as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let fit = loglog_slope(&xs, &ys);
    if fit.is_none() {
        warnings.push("fewer than two usable points; no slope".into());
    }

    let out = config.output_dir.join("growth");
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let outcome = GrowthOutcome {
        points,
        fit,
        excluded,
        failed_replications: failed,
        naive_violations,
        warnings,
        config_hash: config.hash(),
        output_dir: out.clone(),
    };
    write_json(&out.join("growth.json"), &outcome)?;
    write_json(&out.join("manifest.json"), &resolved.manifest)?;
    let title = match &outcome.fit {
        Some(f) => format!("{}: slope {:.3}", config.policy.label(), f.slope),
        None => config.policy.label(),
    };
    let svg = line_plot(
        &Series {
            xs,
            ys,
            errors: Some(outcome.points.iter().map(|p| p.stderr).collect()),
        },
        Axes {
            title: &title,
            x_label: "horizon T",
            y_label: "mean regret",
            log_x: true,
            log_y: true,
        },
    );
    fs::write(out.join("growth.svg"), svg)?;
    Ok(outcome)
}
