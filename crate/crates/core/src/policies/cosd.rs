use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::policies::{check_initial_level, CycleMark, Policy, StepSize};
use crate::vector::ProductVector;

/// Rule deciding which periods open a new update cycle.
///
/// Every rule opens cycle 1 at `t = 1` and decides about period `t + 1` from
/// `g_1, x_2, …, g_t, x_{t+1}` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpdateStrategy {
    EveryPeriod,
    /// `t_k = 1 + (k − 1)τ`
    Minibatch { size: usize },
    /// Update when the inventory is empty, `x_{t+1} ⪯ 0`.
    Cup,
    /// Update when the candidate level is feasible, `x_{t+1} ⪯ ŷ_{t+1}`.
    MaxCosd,
}

/// Bookkeeping for the current update cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleState {
    /// Cycle index `k ≥ 1`.
    pub index: usize,
    /// First period `t_k` of the cycle.
    pub start: usize,
    /// Level `ŷ_{t_k}` committed when the cycle opened.
    pub anchor: ProductVector,
    /// `Σ_{s = t_k}^{t} g_s`
    pub gradient_sum: ProductVector,
    /// `Σ_{m < k} ‖Σ_{s ∈ 𝒯_m} g_s‖²`
    pub past_norms_sq: f64,
}

impl CycleState {
    pub fn new(anchor: ProductVector) -> Self {
        let n = anchor.len();
        CycleState {
            index: 1,
            start: 1,
            anchor,
            gradient_sum: ProductVector::zeros(n),
            past_norms_sq: 0.0,
        }
    }
}

/// Adaptive rate `γD / √(‖Σ_{s=t_k}^{t} g_s‖² + Σ_{m<k} ‖Σ_{s∈𝒯_m} g_s‖²)`, or 0
/// when no gradient has been nonzero yet.
pub fn adaptive_eta(cs: &CycleState, gamma: f64, diameter: f64) -> f64 {
    let denom = cs.gradient_sum.norm_sq() + cs.past_norms_sq;
    if denom > 0.0 {
        gamma * diameter / denom.sqrt()
    } else {
        0.0
    }
}

/// Level kept when a period does not open a new cycle.
///
/// It stays feasible because `y_t ⪰ [y_t − d_t]^+ ⪰ x_{t+1}`.
pub fn held_level_rule(previous: &ProductVector) -> ProductVector {
    previous.clone()
}

/// Cyclic online subgradient descent.
///
/// Within a cycle the level is held; at an update period `t + 1` it becomes
/// `Proj(ŷ_{t_k} − η_t Σ_{s=t_k}^{t} g_s)`.
#[derive(Debug, Clone)]
pub struct Cosd {
    set: FeasibleSet,
    strategy: UpdateStrategy,
    rates: StepSize,
    level: ProductVector,
    cycle: CycleState,
    t: usize,
    updated: bool,
    last_eta: f64,
    last_candidate: Option<ProductVector>,
}

impl Cosd {
    pub fn new(set: FeasibleSet, y1: ProductVector, strategy: UpdateStrategy, rates: StepSize) -> Result<Self> {
        check_initial_level(&set, &y1)?;
        if let UpdateStrategy::Minibatch { size: 0 } = strategy {
            return Err(Error::Config("minibatch size must be >= 1".into()));
        }
        Ok(Cosd {
            set,
            strategy,
            rates,
            cycle: CycleState::new(y1.clone()),
            level: y1,
            t: 1,
            updated: true,
            last_eta: 0.0,
            last_candidate: None,
        })
    }

    /// MaxCOSD: feasibility-triggered updates with adaptive rates, `D` from the set.
    pub fn maxcosd(set: FeasibleSet, y1: ProductVector, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be > 0, got {gamma}")));
        }
        let diameter = set.diameter();
        Cosd::new(set, y1, UpdateStrategy::MaxCosd, StepSize::Adaptive { gamma, diameter })
    }

    pub fn strategy(&self) -> UpdateStrategy {
        self.strategy
    }

    pub fn cycle_state(&self) -> &CycleState {
        &self.cycle
    }

    /// Rate `η_t` used at the most recent observation.
    pub fn last_eta(&self) -> f64 {
        self.last_eta
    }

    /// Candidate `ŷ_{t+1}` from the most recent observation, if one was computed.
    pub fn last_candidate(&self) -> Option<&ProductVector> {
        self.last_candidate.as_ref()
    }

    fn eta(&self) -> f64 {
        match self.rates {
            StepSize::Adaptive { gamma, diameter } => adaptive_eta(&self.cycle, gamma, diameter),
            other => other.at(self.t),
        }
    }

    fn candidate(&self, eta: f64) -> Result<ProductVector> {
        self.set.project(&self.cycle.anchor.sub_scaled(eta, &self.cycle.gradient_sum))
    }
}

impl Policy for Cosd {
    fn name(&self) -> String {
        match self.strategy {
            UpdateStrategy::EveryPeriod => "cosd(every_period)".into(),
            UpdateStrategy::Minibatch { size } => format!("cosd(minibatch={size})"),
            UpdateStrategy::Cup => "cosd(cup)".into(),
            UpdateStrategy::MaxCosd => "maxcosd".into(),
        }
    }

    fn propose(&self) -> &ProductVector {
        &self.level
    }

    fn observe(&mut self, g: &ProductVector, next_state: &ProductVector) -> Result<()> {
        let n = self.level.len();
        g.check_len(n)?;
        next_state.check_len(n)?;
        self.cycle.gradient_sum.add_assign(g);
        let eta = self.eta();
        self.last_eta = eta;

        let (trigger, candidate) = match self.strategy {
            UpdateStrategy::EveryPeriod => (true, None),
            UpdateStrategy::Minibatch { size } => (self.t.is_multiple_of(size), None),
            UpdateStrategy::Cup => (next_state.iter().all(|&x| x <= 0.0), None),
            UpdateStrategy::MaxCosd => {
                let c = self.candidate(eta)?;
                (next_state.dominated_by(&c), Some(c))
            }
        };

        if trigger {
            let next = match candidate {
                Some(c) => c,
                None => self.candidate(eta)?,
            };
            self.last_candidate = Some(next.clone());
            self.cycle.past_norms_sq += self.cycle.gradient_sum.norm_sq();
            self.cycle.gradient_sum = ProductVector::zeros(n);
            self.cycle.anchor = next.clone();
            self.cycle.index += 1;
            self.cycle.start = self.t + 1;
            self.level = next;
            self.updated = true;
        } else {
            self.last_candidate = candidate;
            self.level = held_level_rule(&self.level);
            self.updated = false;
        }
        self.t += 1;
        Ok(())
    }

    fn cycle_mark(&self) -> CycleMark {
        CycleMark {
            cycle: self.cycle.index,
            updated: self.updated,
        }
    }
}
