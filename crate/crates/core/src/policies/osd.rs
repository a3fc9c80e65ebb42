use crate::error::Result;
use crate::feasible::FeasibleSet;
use crate::policies::{check_initial_level, CycleMark, Policy, StepSize};
use crate::vector::ProductVector;

/// Online subgradient descent: `y_{t+1} = Proj(y_t − η_t g_t)`.
///
/// OSD never looks at the inventory state, so nothing stops it from
/// proposing an infeasible level; the simulator catches that.
#[derive(Debug, Clone)]
pub struct Osd {
    set: FeasibleSet,
    rates: StepSize,
    level: ProductVector,
    t: usize,
    sum_sq: f64,
}

impl Osd {
    pub fn new(set: FeasibleSet, y1: ProductVector, rates: StepSize) -> Result<Self> {
        check_initial_level(&set, &y1)?;
        Ok(Osd {
            set,
            rates,
            level: y1,
            t: 1,
            sum_sq: 0.0,
        })
    }

    /// OSD with `η_t = γD / (G√t)`, `D` taken from the set.
    pub fn with_gamma(set: FeasibleSet, y1: ProductVector, gamma: f64, gradient_bound: f64) -> Result<Self> {
        let rates = StepSize::gamma_schedule(gamma, set.diameter(), gradient_bound);
        Osd::new(set, y1, rates)
    }

    /// OSD with AdaGrad-norm rates `η_t = γD / √(Σ_{s≤t} ‖g_s‖²)`.
    pub fn adaptive(set: FeasibleSet, y1: ProductVector, gamma: f64) -> Result<Self> {
        let diameter = set.diameter();
        Osd::new(set, y1, StepSize::Adaptive { gamma, diameter })
    }

    pub fn period(&self) -> usize {
        self.t
    }
}

impl Policy for Osd {
    fn name(&self) -> String {
        "osd".into()
    }

    fn propose(&self) -> &ProductVector {
        &self.level
    }

    fn observe(&mut self, g: &ProductVector, _next_state: &ProductVector) -> Result<()> {
        g.check_len(self.level.len())?;
        let eta = match self.rates {
            StepSize::Adaptive { gamma, diameter } => {
                let g_sq = g.norm_sq();
                let denom = g_sq + self.sum_sq;
                self.sum_sq += g_sq;
                if denom > 0.0 {
                    gamma * diameter / denom.sqrt()
                } else {
                    0.0
                }
            }
            other => other.at(self.t),
        };
        self.level = self.set.project(&self.level.sub_scaled(eta, g))?;
        self.t += 1;
        Ok(())
    }

    fn cycle_mark(&self) -> CycleMark {
        CycleMark {
            cycle: self.t,
            updated: true,
        }
    }
}
