//! Replicated runs and their summary files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use oio::simulator::{
    mean_stderr, regret_from_parts, run_with_recorder, summarize_lengths, BoundCheck, CycleReport, PeriodRecord,
};
use oio::{Error, ProductVector};

use crate::config::{ExperimentConfig, PolicySpec, Resolved};

/// Cycle lengths are compared with the geometric tail up to this `m`.
pub const TAIL_POINTS: usize = 8;
const BOUND_TOLERANCE: f64 = 1e-9;

/// Outcome of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub seed: u64,
    /// `None` when the run stopped early, see `error`.
    #[serde(rename = "R_T")]
    pub regret: Option<f64>,
    pub cumulative_loss: Option<f64>,
    pub hindsight_level: Option<ProductVector>,
    pub bound_checks: Vec<BoundCheck>,
    /// Regret of the first `T'` periods, for each requested prefix.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub prefix_regrets: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip)]
    pub cycle_lengths: Vec<usize>,
    #[serde(skip)]
    pub cycle_residual: usize,
}

impl Replication {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// What to simulate, shared by all replications of one experiment.
pub struct Plan<'a> {
    pub resolved: &'a Resolved,
    pub policy: &'a PolicySpec,
    pub horizon: usize,
    pub prefixes: &'a [usize],
    pub trajectory_dir: Option<&'a Path>,
}

/// Runs one replication with the given seed.
///
/// A feasibility or protocol violation by the policy ends the run and is
/// reported in the result. Anything else is an error.
pub fn replicate(plan: &Plan, seed: u64) -> Result<Replication> {
    let problem = &plan.resolved.problem;
    let n = problem.dim();
    let mut policy = plan.policy.build(problem)?;
    let mut stream = plan.resolved.source.stream(seed)?;
    let mut writer = match plan.trajectory_dir {
        Some(dir) => {
            let path = dir.join(format!("seed_{seed}.csv"));
            let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot create {}", path.display()))?;
            w.write_record(trajectory_header(n))?;
            Some(w)
        }
        None => None,
    };
    let mut demands = Vec::with_capacity(plan.horizon);
    let mut losses = Vec::with_capacity(plan.horizon);
    let mut flags = Vec::with_capacity(plan.horizon);
    let mut write_error = None;
    let outcome = run_with_recorder(problem, &mut stream, policy.as_mut(), plan.horizon, |r| {
        demands.push(r.d.clone());
        losses.push(r.loss);
        flags.push(r.updated);
        if let (Some(w), None) = (writer.as_mut(), write_error.as_ref()) {
            if let Err(e) = w.write_record(trajectory_row(r)) {
                write_error = Some(e);
            }
        }
        Ok(())
    });
    if let Some(e) = write_error {
        return Err(e).context("writing trajectory");
    }
    if let Some(mut w) = writer {
        w.flush().context("writing trajectory")?;
    }

    match outcome {
        Ok(_) => {}
        Err(e @ (Error::Feasibility { .. } | Error::Protocol(_))) => {
            return Ok(Replication {
                seed,
                regret: None,
                cumulative_loss: None,
                hindsight_level: None,
                bound_checks: Vec::new(),
                prefix_regrets: Vec::new(),
                error: Some(e.to_string()),
                cycle_lengths: Vec::new(),
                cycle_residual: 0,
            });
        }
        Err(e) => return Err(e.into()),
    }

    let total: f64 = losses.iter().sum();
    let mut report = regret_from_parts(&demands, total, problem)?;
    for (name, bound) in plan.resolved.applicable_bounds(plan.policy, plan.horizon) {
        report.check(name, bound, BOUND_TOLERANCE);
    }
    let mut prefix_regrets = Vec::with_capacity(plan.prefixes.len());
    for &p in plan.prefixes.iter().filter(|&&p| p >= 1 && p <= plan.horizon) {
        let r = regret_from_parts(&demands[..p], losses[..p].iter().sum(), problem)?;
        prefix_regrets.push((p, r.regret));
    }
    let starts: Vec<usize> = (1..=flags.len()).filter(|&t| flags[t - 1]).collect();
    let cycle_lengths = starts.windows(2).map(|w| w[1] - w[0]).collect();
    let cycle_residual = starts.last().map_or(flags.len(), |&s| flags.len() + 1 - s);
    Ok(Replication {
        seed,
        regret: Some(report.regret),
        cumulative_loss: Some(report.cumulative_loss),
        hindsight_level: Some(report.hindsight_level),
        bound_checks: report.bound_checks,
        prefix_regrets,
        error: None,
        cycle_lengths,
        cycle_residual,
    })
}

fn trajectory_header(n: usize) -> Vec<String> {
    let mut header = vec!["t".to_string()];
    for name in ["x", "y", "d", "s", "g"] {
        header.extend((0..n).map(|i| format!("{name}[{i}]")));
    }
    header.extend(["loss", "cycle_k", "updated"].map(String::from));
    header
}

fn trajectory_row(r: &PeriodRecord) -> Vec<String> {
    let mut row = vec![r.t.to_string()];
    for v in [&r.x, &r.y, &r.d, &r.s, &r.g] {
        row.extend(v.iter().map(|x| x.to_string()));
    }
    row.push(r.loss.to_string());
    row.push(r.cycle.to_string());
    row.push(u8::from(r.updated).to_string());
    row
}

pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("cannot start worker pool")
}

/// Runs replications `0..count` with seeds `base_seed + r`, in seed order.
pub fn replicate_all(plan: &Plan, base_seed: u64, count: usize, jobs: usize) -> Result<Vec<Replication>> {
    use rayon::prelude::*;
    let pool = thread_pool(jobs)?;
    pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|r| replicate(plan, base_seed.wrapping_add(r as u64)))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub stderr: f64,
    pub completed: usize,
    pub failed: usize,
}

pub fn aggregate(reps: &[Replication]) -> Aggregate {
    let values: Vec<f64> = reps.iter().filter_map(|r| r.regret).collect();
    let (mean, stderr) = if values.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_stderr(&values)
    };
    Aggregate {
        mean,
        stderr,
        completed: values.len(),
        failed: reps.len() - values.len(),
    }
}

/// Cycle statistics pooled over replications; compliance needs a known `μ`.
pub fn pooled_cycles(reps: &[Replication], mu: Option<f64>) -> CycleReport {
    let lengths: Vec<usize> = reps.iter().flat_map(|r| r.cycle_lengths.iter().copied()).collect();
    let residual = reps.iter().map(|r| r.cycle_residual).sum();
    summarize_lengths(lengths, residual, mu.unwrap_or(1.0), 1.0, TAIL_POINTS)
}

fn cycle_json(report: &CycleReport, mu: Option<f64>) -> Value {
    let s = &report.stats;
    json!({
        "completed_cycles": s.lengths.len(),
        "open_periods": s.residual,
        "mean": s.mean,
        "stderr": s.stderr,
        "second_moment": s.second_moment,
        "tail": s.tail,
        "c_mu": 1.0,
        "compliance": mu.map(|_| &report.compliance),
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub replications: Vec<Replication>,
    pub aggregate: Aggregate,
    pub cycles: CycleReport,
    pub summary: Value,
    pub output_dir: PathBuf,
}

/// Runs every replication of `config` and writes `summary.json`,
/// `manifest.json` and, when enabled, one trajectory CSV per seed.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentOutcome> {
    let resolved = config.resolve()?;
    for w in &resolved.manifest.warnings {
        log::warn!("{w}");
    }
    let out = config.output_dir.clone();
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let trajectory_dir = out.join("trajectories");
    if config.write_trajectories {
        fs::create_dir_all(&trajectory_dir)?;
    }
    let plan = Plan {
        resolved: &resolved,
        policy: &config.policy,
        horizon: config.horizon,
        prefixes: &[],
        trajectory_dir: config.write_trajectories.then_some(trajectory_dir.as_path()),
    };
    log::info!(
        "{}: {} replications of {} periods",
        resolved.manifest.problem,
        config.replications,
        config.horizon
    );
    let replications = replicate_all(&plan, config.seed, config.replications, jobs)?;
    let agg = aggregate(&replications);
    let mu = resolved.manifest.mu;
    let cycles = pooled_cycles(&replications, mu);

    let mut experiment_checks = serde_json::Map::new();
    if let Some(bound) = resolved.expected_bound(&config.policy, config.horizon) {
        experiment_checks.insert(
            "expected".into(),
            json!({"bound": bound, "mean": agg.mean, "satisfied": agg.failed == 0 && agg.mean <= bound}),
        );
    }
    let hp: Vec<bool> = replications
        .iter()
        .filter_map(|r| r.bound_checks.iter().find(|c| c.name == "high_probability").map(|c| c.satisfied))
        .collect();
    if !hp.is_empty() {
        let exceed = hp.iter().filter(|s| !**s).count();
        let fraction = exceed as f64 / hp.len() as f64;
        let delta = config.delta;
        let limit = delta + 3.0 * (delta * (1.0 - delta) / hp.len() as f64).sqrt();
        experiment_checks.insert(
            "high_probability".into(),
            json!({"exceedances": exceed, "fraction": fraction, "delta": delta, "limit": limit, "satisfied": fraction <= limit}),
        );
    }

    let manifest = serde_json::to_value(&resolved.manifest)?;
    let summary = json!({
        "config_hash": config.hash(),
        "per_replication": replications,
        "aggregate": agg,
        "experiment_checks": experiment_checks,
        "cycle_stats": cycle_json(&cycles, mu),
        "manifest": manifest,
    });
    write_json(&out.join("summary.json"), &summary)?;
    write_json(&out.join("manifest.json"), &manifest)?;
    if agg.failed > 0 {
        log::warn!("{} of {} replications stopped early", agg.failed, replications.len());
    }
    Ok(ExperimentOutcome {
        replications,
        aggregate: agg,
        cycles,
        summary,
        output_dir: out,
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
