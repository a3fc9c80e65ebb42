use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::hindsight::hindsight_best;
use crate::simulator::{Problem, Trajectory};
use crate::vector::ProductVector;

/// A named upper bound and whether the measured regret respects it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub regret: f64,
    pub hindsight_level: ProductVector,
    pub hindsight_value: f64,
    pub cumulative_loss: f64,
    pub bound_checks: Vec<BoundCheck>,
}

impl RegretReport {
    /// Records `regret ≤ bound` up to a relative tolerance.
    pub fn check(&mut self, name: impl Into<String>, bound: f64, rel_tol: f64) -> bool {
        let satisfied = self.regret <= bound + rel_tol * bound.abs().max(1.0);
        self.bound_checks.push(BoundCheck {
            name: name.into(),
            value: bound,
            satisfied,
        });
        satisfied
    }

    pub fn all_satisfied(&self) -> bool {
        self.bound_checks.iter().all(|c| c.satisfied)
    }
}

/// Exact regret of a run against the best constant level, with the
/// `R_T ≤ DGT` check attached.
pub fn regret(traj: &Trajectory, problem: &Problem) -> Result<RegretReport> {
    regret_of_prefix(traj, problem, traj.horizon())
}

fn regret_of_prefix(traj: &Trajectory, problem: &Problem, horizon: usize) -> Result<RegretReport> {
    if horizon == 0 || horizon > traj.horizon() {
        return Err(Error::Config(format!(
            "prefix {horizon} is outside 1..={}",
            traj.horizon()
        )));
    }
    let records = &traj.records[..horizon];
    let demands: Vec<ProductVector> = records.iter().map(|r| r.d.clone()).collect();
    let cumulative_loss: f64 = records.iter().map(|r| r.loss).sum();
    regret_from_parts(&demands, cumulative_loss, problem)
}

/// Regret of a run known only through its demands and total loss.
pub fn regret_from_parts(demands: &[ProductVector], cumulative_loss: f64, problem: &Problem) -> Result<RegretReport> {
    let horizon = demands.len();
    let best = hindsight_best(demands, &problem.loss, &problem.set)?;
    let mut report = RegretReport {
        regret: cumulative_loss - best.value,
        hindsight_level: best.level,
        hindsight_value: best.value,
        cumulative_loss,
        bound_checks: Vec::new(),
    };
    let naive = problem.diameter() * problem.gradient_bound() * horizon as f64;
    report.check("naive", naive, 1e-9);
    Ok(report)
}

/// Regret of the first `T'` periods for each requested `T'`.
///
/// The policies here never look at the horizon, so a prefix is distributed
/// exactly like a standalone run of that length.
pub fn prefix_regrets(traj: &Trajectory, problem: &Problem, horizons: &[usize]) -> Result<Vec<RegretReport>> {
    horizons.iter().map(|&h| regret_of_prefix(traj, problem, h)).collect()
}

/// Closed-form regret bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalBounds {
    /// `(√2 GD/μ)(1/(2γ) + γ + 1)√T`, on expected regret of the cyclic method.
    pub expected: f64,
    /// `GD(1/(2γ) + γ + 1)(1 + log(T/δ)/μ)√T`, holding with probability `1 − δ`.
    pub high_probability: f64,
    /// `(1/(2γ) + γ) GD√T` for descent on stateless problems.
    pub osd_deterministic: f64,
    /// `(1 + 2γ)/(2γ) · GD√T` for descent when demand is at least `ρ` and `γ ≤ ρ/D`.
    pub osd_uniform_positive: f64,
    /// `DGT`
    pub naive: f64,
}

impl TheoreticalBounds {
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("expected", self.expected),
            ("high_probability", self.high_probability),
            ("osd_deterministic", self.osd_deterministic),
            ("osd_uniform_positive", self.osd_uniform_positive),
            ("naive", self.naive),
        ]
    }
}

pub fn theoretical_bounds(
    horizon: usize,
    gradient_bound: f64,
    diameter: f64,
    gamma: f64,
    mu: f64,
    delta: f64,
) -> Result<TheoreticalBounds> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    if !(gradient_bound > 0.0 && diameter > 0.0 && gamma > 0.0) {
        return Err(Error::Config("G, D and gamma must be > 0".into()));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Config(format!("mu must lie in (0, 1], got {mu}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1), got {delta}")));
    }
    let t = horizon as f64;
    let gd = gradient_bound * diameter;
    let root_t = t.sqrt();
    let cyclic = 1.0 / (2.0 * gamma) + gamma + 1.0;
    Ok(TheoreticalBounds {
        expected: std::f64::consts::SQRT_2 * gd / mu * cyclic * root_t,
        high_probability: gd * cyclic * (1.0 + (t / delta).ln() / mu) * root_t,
        osd_deterministic: (1.0 / (2.0 * gamma) + gamma) * gd * root_t,
        osd_uniform_positive: (1.0 + 2.0 * gamma) / (2.0 * gamma) * gd * root_t,
        naive: gd * t,
    })
}
