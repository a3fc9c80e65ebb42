use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::stats::mean_stderr;
use crate::simulator::Trajectory;

/// Fewer completed cycles than this and the compliance flags are not computed.
pub const MIN_COMPLETED_CYCLES: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleStats {
    /// `t_{k+1} − t_k` for every completed cycle.
    pub lengths: Vec<usize>,
    /// Periods of the last, still open cycle.
    pub residual: usize,
    pub mean: f64,
    pub stderr: f64,
    pub second_moment: f64,
    /// `P̂(len > m)` for `m = 1..=m_max`.
    pub tail: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub m: usize,
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CycleCompliance {
    Insufficient {
        completed: usize,
    },
    Checked {
        mean_limit: f64,
        mean_satisfied: bool,
        tail: Vec<TailCheck>,
    },
}

impl CycleCompliance {
    pub fn all_satisfied(&self) -> Option<bool> {
        match self {
            CycleCompliance::Insufficient { .. } => None,
            CycleCompliance::Checked {
                mean_satisfied, tail, ..
            } => Some(*mean_satisfied && tail.iter().all(|c| c.satisfied)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub stats: CycleStats,
    pub compliance: CycleCompliance,
}

/// Empirical cycle lengths against the geometric tail `C_μ(1 − μ)^m`.
///
/// The mean is compared with `C_μ/μ + 3·stderr`. Each tail point gets slack
/// `3√(p(1 − p)/K)` where `p` is the bound itself, clipped to 1, and `K` the
/// number of completed cycles.
pub fn cycle_stats(traj: &Trajectory, mu: f64, c_mu: f64, m_max: usize) -> Result<CycleReport> {
    let flags: Vec<bool> = traj.records.iter().map(|r| r.updated).collect();
    cycle_stats_from_flags(&flags, mu, c_mu, m_max)
}

/// Same as [`cycle_stats`] from the per-period update flags alone.
pub fn cycle_stats_from_flags(updated: &[bool], mu: f64, c_mu: f64, m_max: usize) -> Result<CycleReport> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Config(format!("mu must lie in (0, 1], got {mu}")));
    }
    if !(c_mu > 0.0) {
        return Err(Error::Config(format!("C_mu must be > 0, got {c_mu}")));
    }
    let starts: Vec<usize> = (1..=updated.len()).filter(|&t| updated[t - 1]).collect();
    if starts.first() != Some(&1) {
        return Err(Error::Config("trajectory does not open a cycle at t = 1".into()));
    }
    let lengths: Vec<usize> = starts.windows(2).map(|w| w[1] - w[0]).collect();
    let residual = updated.len() + 1 - starts[starts.len() - 1];
    Ok(summarize_lengths(lengths, residual, mu, c_mu, m_max))
}

/// Statistics and compliance flags for a list of completed cycle lengths.
pub fn summarize_lengths(lengths: Vec<usize>, residual: usize, mu: f64, c_mu: f64, m_max: usize) -> CycleReport {
    let k = lengths.len();
    let as_f64: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let (mean, stderr) = mean_stderr(&as_f64);
    let second_moment = if k == 0 {
        f64::NAN
    } else {
        as_f64.iter().map(|l| l * l).sum::<f64>() / k as f64
    };
    let tail: Vec<f64> = (1..=m_max)
        .map(|m| {
            if k == 0 {
                f64::NAN
            } else {
                lengths.iter().filter(|&&l| l > m).count() as f64 / k as f64
            }
        })
        .collect();

    let compliance = if k < MIN_COMPLETED_CYCLES {
        CycleCompliance::Insufficient { completed: k }
    } else {
        let mean_limit = c_mu / mu + 3.0 * stderr;
        let checks = tail
            .iter()
            .enumerate()
            .map(|(i, &empirical)| {
                let m = i + 1;
                let bound = c_mu * (1.0 - mu).powi(m as i32);
                let p0 = bound.min(1.0);
                let slack = 3.0 * (p0 * (1.0 - p0) / k as f64).sqrt();
                TailCheck {
                    m,
                    empirical,
                    bound,
                    slack,
                    satisfied: empirical <= bound + slack,
                }
            })
            .collect();
        CycleCompliance::Checked {
            mean_limit,
            mean_satisfied: mean <= mean_limit,
            tail: checks,
        }
    };

    CycleReport {
        stats: CycleStats {
            lengths,
            residual,
            mean,
            stderr,
            second_moment,
            tail,
        },
        compliance,
    }
}
