//! Demand sequences that force linear regret when demand may vanish.

use crate::demand::DemandSource;
use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::loss::{full_info_subgradient, Loss, NewsvendorLoss};
use crate::policies::Policy;
use crate::vector::ProductVector;

/// Output of [`adversary_prop1`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Construction {
    pub demands: Vec<ProductVector>,
    /// First period `T₀` at which the policy ordered a positive level under
    /// the constant probe demand; `None` if it never did within the horizon.
    pub switch_period: Option<usize>,
}

impl Prop1Construction {
    pub fn source(&self) -> DemandSource {
        DemandSource::Deterministic {
            sequence: self.demands.clone(),
        }
    }
}

/// Adversary against a deterministic single-product lost-sales policy on `[0, D]`.
///
/// The policy is replayed against the constant demand `probe`. If it never
/// orders, the constant sequence is returned (the policy then pays `p·probe`
/// every period). Otherwise demand is `probe` before the first positive level
/// `T₀` and zero from `T₀` on, so the policy is stuck holding stock that the
/// zero level avoids. `factory` must build a fresh policy on each call.
pub fn adversary_prop1<F>(
    factory: F,
    probe: f64,
    horizon: usize,
    loss: &NewsvendorLoss,
    set: &FeasibleSet,
) -> Result<Prop1Construction>
where
    F: Fn() -> Result<Box<dyn Policy>>,
{
    loss.validate()?;
    set.validate()?;
    if loss.dim() != 1 || set.dim() != 1 {
        return Err(Error::Config("the probe adversary is single-product".into()));
    }
    let upper = match set {
        FeasibleSet::Box { lower, upper } if lower[0] == 0.0 => upper[0],
        _ => return Err(Error::Config("the probe adversary needs a set of the form [0, D]".into())),
    };
    if !(probe > 0.0 && probe <= upper) {
        return Err(Error::Config(format!("probe demand {probe} is outside (0, {upper}]")));
    }
    if horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }

    let first = probe_levels(&factory, probe, horizon, loss)?;
    let second = probe_levels(&factory, probe, horizon, loss)?;
    if first != second {
        return Err(Error::Refused("policy responses differ between replays".into()));
    }

    let switch_period = first.iter().position(|&y| y > 0.0).map(|i| i + 1);
    let d = ProductVector::from([probe]);
    let zero = ProductVector::from([0.0]);
    let demands = (1..=horizon)
        .map(|t| match switch_period {
            Some(t0) if t >= t0 => zero.clone(),
            _ => d.clone(),
        })
        .collect();
    Ok(Prop1Construction {
        demands,
        switch_period,
    })
}

/// Levels played against constant demand, stopping at the first positive one.
fn probe_levels<F>(factory: &F, probe: f64, horizon: usize, loss: &NewsvendorLoss) -> Result<Vec<f64>>
where
    F: Fn() -> Result<Box<dyn Policy>>,
{
    let mut policy = factory()?;
    if !policy.is_deterministic() {
        return Err(Error::Refused("the probe adversary requires a deterministic policy".into()));
    }
    let d = ProductVector::from([probe]);
    let mut x = ProductVector::from([0.0]);
    let mut levels = Vec::new();
    for _ in 0..horizon {
        let y = policy.propose().clone();
        if !x.dominated_by(&y) {
            return Err(Error::Refused("policy is not feasible under the probe demand".into()));
        }
        levels.push(y[0]);
        if y[0] > 0.0 {
            break;
        }
        let g = full_info_subgradient(&y, &d, loss)?;
        x = y.sub(&d).positive_part();
        policy.observe(&g, &x)?;
    }
    Ok(levels)
}

/// Output of [`adversary_prop2`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prop2Construction {
    pub source: DemandSource,
    pub loss: Loss,
    /// `C = y₁ − Σ_t d_t`; every feasible run has `R_T ≥ C·T`.
    pub regret_rate: f64,
}

/// Positive demands summing to less than `y₁`, paired with the loss `ℓ(y) = y`.
///
/// Demands are `d_t = budget_ratio · y₁ · 2^{−t}`, whose total is
/// `budget_ratio · y₁`; lost-sales feasibility then keeps every level above
/// `C = y₁ (1 − budget_ratio)`.
pub fn adversary_prop2(initial_level: f64, budget_ratio: f64) -> Result<Prop2Construction> {
    let source = DemandSource::AdversaryProp2 {
        initial_level,
        budget_ratio,
    };
    source.validate()?;
    Ok(Prop2Construction {
        source,
        loss: Loss::Linear { n: 1 },
        regret_rate: initial_level * (1.0 - budget_ratio),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{ConstantPolicy, Cosd, CycleMark};

    fn setup() -> (NewsvendorLoss, FeasibleSet) {
        (NewsvendorLoss::uniform(1, 1.0, 200.0), FeasibleSet::uniform_box(1, 10.0))
    }

    #[test]
    fn never_ordering_policy_gets_constant_demand() {
        let (loss, set) = setup();
        let c = adversary_prop1(
            || Ok(Box::new(ConstantPolicy::zero(&FeasibleSet::uniform_box(1, 10.0))?) as Box<dyn Policy>),
            1.0,
            50,
            &loss,
            &set,
        )
        .unwrap();
        assert_eq!(c.switch_period, None);
        assert!(c.demands.iter().all(|d| d[0] == 1.0));
    }

    #[test]
    fn immediate_order_gets_zero_demand() {
        let (loss, set) = setup();
        let c = adversary_prop1(
            || Ok(Box::new(ConstantPolicy::new(&FeasibleSet::uniform_box(1, 10.0), [10.0].into())?) as Box<dyn Policy>),
            1.0,
            20,
            &loss,
            &set,
        )
        .unwrap();
        assert_eq!(c.switch_period, Some(1));
        assert!(c.demands.iter().all(|d| d[0] == 0.0));
    }

    #[test]
    fn maxcosd_switches_at_second_period() {
        let (loss, set) = setup();
        let c = adversary_prop1(
            || Ok(Box::new(Cosd::maxcosd(FeasibleSet::uniform_box(1, 10.0), [0.0].into(), 0.01)?) as Box<dyn Policy>),
            1.0,
            100,
            &loss,
            &set,
        )
        .unwrap();
        assert_eq!(c.switch_period, Some(2));
        assert_eq!(c.demands[0][0], 1.0);
        assert!(c.demands[1..].iter().all(|d| d[0] == 0.0));
    }

    struct Coin(ProductVector);

    impl Policy for Coin {
        fn name(&self) -> String {
            "coin".into()
        }
        fn propose(&self) -> &ProductVector {
            &self.0
        }
        fn observe(&mut self, _: &ProductVector, _: &ProductVector) -> Result<()> {
            Ok(())
        }
        fn cycle_mark(&self) -> CycleMark {
            CycleMark { cycle: 1, updated: false }
        }
        fn is_deterministic(&self) -> bool {
            false
        }
    }

    #[test]
    fn randomized_policy_is_refused() {
        let (loss, set) = setup();
        let err = adversary_prop1(
            || Ok(Box::new(Coin([0.0].into())) as Box<dyn Policy>),
            1.0,
            10,
            &loss,
            &set,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
    }

    #[test]
    fn prop2_rate_and_budget() {
        let c = adversary_prop2(1.0, 0.4).unwrap();
        assert!((c.regret_rate - 0.6).abs() < 1e-15);
        let demands = c.source.stream(0).unwrap().take(60).unwrap();
        let mut partial = 0.0;
        for d in &demands {
            assert!(d[0] > 0.0);
            partial += d[0];
            assert!(partial <= 0.4);
        }
        let tiny = adversary_prop2(1.0, 1e-12).unwrap();
        assert!((tiny.regret_rate - 1.0).abs() < 1e-11);
        assert!(adversary_prop2(1.0, 1.0).is_err());
        assert!(adversary_prop2(1.0, 0.0).is_err());
    }
}
