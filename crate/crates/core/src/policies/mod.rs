//! Ordering policies.
//!
//! A policy holds the current order-up-to level `y_t`, and after each period
//! observes the revealed subgradient `g_t` together with the next inventory
//! state `x_{t+1}`; it then moves to `y_{t+1}`.

mod cosd;
mod osd;
mod simple;

pub use cosd::{adaptive_eta, held_level_rule, Cosd, CycleState, UpdateStrategy};
pub use osd::Osd;
pub use simple::{ConstantPolicy, FeasibilityClamp, PerProduct};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::feasible::FeasibleSet;
use crate::vector::ProductVector;

/// Where the current level sits in the update-cycle structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleMark {
    /// 1-based index `k` of the cycle containing the current period.
    pub cycle: usize,
    /// Whether the current period opened that cycle (`t = t_k`).
    pub updated: bool,
}

pub trait Policy: Send {
    fn name(&self) -> String;

    /// The order-up-to level for the current period.
    fn propose(&self) -> &ProductVector;

    /// Feeds `g_t` and `x_{t+1}`, advancing to the next period.
    fn observe(&mut self, subgradient: &ProductVector, next_state: &ProductVector) -> Result<()>;

    fn cycle_mark(&self) -> CycleMark;

    /// Whether the level sequence is a fixed function of the observation history.
    fn is_deterministic(&self) -> bool {
        true
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn propose(&self) -> &ProductVector {
        (**self).propose()
    }
    fn observe(&mut self, subgradient: &ProductVector, next_state: &ProductVector) -> Result<()> {
        (**self).observe(subgradient, next_state)
    }
    fn cycle_mark(&self) -> CycleMark {
        (**self).cycle_mark()
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
}

/// Learning-rate schedule `η_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSize {
    Constant { eta: f64 },
    /// `η_t = scale / √t`
    InverseSqrt { scale: f64 },
    /// `η_t = γD / √(accumulated squared gradient norms)`; for cyclic policies
    /// the accumulation is over per-cycle gradient sums.
    Adaptive { gamma: f64, diameter: f64 },
}

impl StepSize {
    /// `η_t = γD / (G√t)`
    pub fn gamma_schedule(gamma: f64, diameter: f64, gradient_bound: f64) -> Self {
        StepSize::InverseSqrt {
            scale: gamma * diameter / gradient_bound,
        }
    }

    /// Rate at period `t` for the non-adaptive schedules.
    pub(crate) fn at(&self, t: usize) -> f64 {
        match *self {
            StepSize::Constant { eta } => eta,
            StepSize::InverseSqrt { scale } => scale / (t as f64).sqrt(),
            StepSize::Adaptive { .. } => unreachable!("adaptive rates depend on gradient history"),
        }
    }
}

pub(crate) fn check_initial_level(set: &FeasibleSet, y1: &ProductVector) -> Result<()> {
    set.validate()?;
    y1.check_len(set.dim())?;
    if !set.contains(y1, 1e-9) {
        return Err(crate::Error::Config(format!(
            "initial level {:?} lies outside the feasible set",
            y1.as_slice()
        )));
    }
    Ok(())
}
