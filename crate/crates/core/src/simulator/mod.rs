//! The interaction loop and everything computed from its output.
//!
//! Each period: observe `x_t`, take the policy's level `y_t`, check
//! `y_t ⪰ x_t`, draw `d_t`, charge `ℓ_t(y_t)`, reveal `g_t`, and advance the
//! inventory dynamic to `x_{t+1}`.

mod cycles;
mod hindsight;
mod regret;
mod stats;

pub use cycles::{cycle_stats, cycle_stats_from_flags, summarize_lengths, CycleCompliance, CycleReport, CycleStats, TailCheck};
pub use hindsight::{hindsight_best, hindsight_subgradient, Hindsight};
pub use regret::{prefix_regrets, regret, regret_from_parts, theoretical_bounds, BoundCheck, RegretReport, TheoreticalBounds};
pub use stats::{loglog_slope, mean_stderr, SlopeFit};

use serde::{Deserialize, Serialize};

use crate::demand::{DemandSource, DemandStream};
use crate::dynamics::{self, DynamicKind};
use crate::error::{check_dim, Error, Result};
use crate::feasible::FeasibleSet;
use crate::loss::{Feedback, Loss};
use crate::policies::Policy;
use crate::vector::ProductVector;

/// Everything about a run except the demand and the policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub dynamic: DynamicKind,
    pub loss: Loss,
    pub set: FeasibleSet,
    #[serde(default)]
    pub feedback: Feedback,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.dynamic.validate()?;
        self.loss.validate()?;
        self.set.validate()?;
        check_dim(self.set.dim(), self.loss.dim())
    }

    /// Upper bound `G` on subgradient norms.
    pub fn gradient_bound(&self) -> f64 {
        self.loss.gradient_bound()
    }

    pub fn diameter(&self) -> f64 {
        self.set.diameter()
    }
}

/// One period of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub x: ProductVector,
    pub y: ProductVector,
    pub d: ProductVector,
    /// Sales `min(y_t, d_t)`.
    pub s: ProductVector,
    pub g: ProductVector,
    pub loss: f64,
    pub cycle: usize,
    pub updated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<PeriodRecord>,
    /// `x_{T+1}`
    pub final_state: ProductVector,
    pub seed: u64,
    pub config_hash: String,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn demands(&self) -> Vec<ProductVector> {
        self.records.iter().map(|r| r.d.clone()).collect()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.records.iter().map(|r| r.loss).sum()
    }

    /// State that followed period `t` (1-based): `x_{t+1}`.
    pub fn next_state(&self, t: usize) -> &ProductVector {
        if t < self.records.len() {
            &self.records[t].x
        } else {
            &self.final_state
        }
    }
}

/// Totals of a run whose per-period records were handed to a callback.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub periods: usize,
    pub cumulative_loss: f64,
    pub final_state: ProductVector,
}

/// Runs `horizon` periods against demands drawn from `source` under `seed`.
pub fn run(
    problem: &Problem,
    source: &DemandSource,
    policy: &mut dyn Policy,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    let mut stream = source.stream(seed)?;
    run_stream(problem, &mut stream, policy, horizon, seed)
}

/// Like [`run`] with a caller-owned demand stream.
pub fn run_stream(
    problem: &Problem,
    stream: &mut DemandStream,
    policy: &mut dyn Policy,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    let mut records = Vec::with_capacity(horizon);
    let summary = run_with_recorder(problem, stream, policy, horizon, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        records,
        final_state: summary.final_state,
        seed,
        config_hash: String::new(),
    })
}

/// The protocol loop. `record` sees every period as soon as it completes.
///
/// Stops with [`Error::Feasibility`] at the first period whose level does
/// not dominate the state, and with [`Error::EndOfData`] if the demand
/// source runs out before `horizon`.
pub fn run_with_recorder<F>(
    problem: &Problem,
    stream: &mut DemandStream,
    policy: &mut dyn Policy,
    horizon: usize,
    mut record: F,
) -> Result<RunSummary>
where
    F: FnMut(&PeriodRecord) -> Result<()>,
{
    problem.validate()?;
    if horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    let n = problem.dim();
    let set_tol = 1e-9 * problem.diameter().max(1.0);
    let (mut x, mut state) = dynamics::initial_state(&problem.dynamic, n);
    let mut cumulative_loss = 0.0;

    for t in 1..=horizon {
        let y = policy.propose().clone();
        y.check_len(n)?;
        if !x.dominated_by(&y) {
            return Err(Error::Feasibility { t, level: y, state: x });
        }
        if !problem.set.contains(&y, set_tol) {
            return Err(Error::Protocol(format!(
                "period {t}: level {:?} lies outside the feasible set",
                y.as_slice()
            )));
        }
        let mark = policy.cycle_mark();
        let d = stream.next_demand()?;
        check_dim(n, d.len())?;
        let s = y.componentwise_min(&d);
        let loss = problem.loss.evaluate(&y, &d)?;
        let g = problem.loss.subgradient(&y, &d, problem.feedback)?;
        let (x_next, next_state) = dynamics::step(&problem.dynamic, &state, &y, &d).map_err(|e| match e {
            Error::Feasibility { level, state, .. } => Error::Feasibility { t, level, state },
            Error::Dynamics { .. } => Error::Dynamics { t },
            other => other,
        })?;
        policy.observe(&g, &x_next)?;
        cumulative_loss += loss;
        record(&PeriodRecord {
            t,
            x,
            y,
            d,
            s,
            g,
            loss,
            cycle: mark.cycle,
            updated: mark.updated,
        })?;
        x = x_next;
        state = next_state;
    }
    Ok(RunSummary {
        periods: horizon,
        cumulative_loss,
        final_state: x,
    })
}

/// Result of scanning a trajectory for a protocol constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Audit {
    Pass,
    Violation {
        t: usize,
        level: ProductVector,
        state: ProductVector,
    },
}

impl Audit {
    pub fn passed(&self) -> bool {
        matches!(self, Audit::Pass)
    }
}

/// First period with `y_t ⋡ x_t`, compared exactly.
pub fn feasibility_audit(traj: &Trajectory) -> Audit {
    traj.records
        .iter()
        .find(|r| !r.x.dominated_by(&r.y))
        .map_or(Audit::Pass, |r| Audit::Violation {
            t: r.t,
            level: r.y.clone(),
            state: r.x.clone(),
        })
}

/// First period with `x_{t+1} ⋠ [y_t − d_t]^+`, compared exactly.
///
/// In a violation, `level` is the leftover stock and `state` the recorded `x_{t+1}`.
pub fn dynamics_audit(traj: &Trajectory) -> Audit {
    for (i, r) in traj.records.iter().enumerate() {
        let leftover = r.y.sub(&r.d).positive_part();
        let next = traj.next_state(i + 1);
        if !next.dominated_by(&leftover) {
            return Audit::Violation {
                t: r.t,
                level: leftover,
                state: next.clone(),
            };
        }
    }
    Audit::Pass
}
