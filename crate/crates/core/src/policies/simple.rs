use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::policies::{check_initial_level, Cosd, CycleMark, Policy};
use crate::vector::ProductVector;

/// Base-stock policy: the same level every period.
#[derive(Debug, Clone)]
pub struct ConstantPolicy {
    level: ProductVector,
    t: usize,
}

impl ConstantPolicy {
    pub fn new(set: &FeasibleSet, level: ProductVector) -> Result<Self> {
        check_initial_level(set, &level)?;
        Ok(ConstantPolicy { level, t: 1 })
    }

    /// Orders nothing, ever.
    pub fn zero(set: &FeasibleSet) -> Result<Self> {
        ConstantPolicy::new(set, ProductVector::zeros(set.dim()))
    }
}

impl Policy for ConstantPolicy {
    fn name(&self) -> String {
        "constant".into()
    }

    fn propose(&self) -> &ProductVector {
        &self.level
    }

    fn observe(&mut self, g: &ProductVector, _next_state: &ProductVector) -> Result<()> {
        g.check_len(self.level.len())?;
        self.t += 1;
        Ok(())
    }

    fn cycle_mark(&self) -> CycleMark {
        CycleMark {
            cycle: 1,
            updated: self.t == 1,
        }
    }
}

/// Raises an inner policy's level to the observed state, `max(y_t, x_t)`.
///
/// This turns any deterministic policy into a feasible one over a box set.
/// The inner policy keeps its own iterate and sees the subgradients of the
/// levels actually played.
#[derive(Debug, Clone)]
pub struct FeasibilityClamp<P> {
    inner: P,
    level: ProductVector,
}

impl<P: Policy> FeasibilityClamp<P> {
    pub fn new(set: &FeasibleSet, inner: P) -> Result<Self> {
        if !matches!(set, FeasibleSet::Box { .. }) {
            return Err(Error::Config("feasibility clamp requires a box set".into()));
        }
        let level = inner.propose().clone();
        Ok(FeasibilityClamp { inner, level })
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: Policy> Policy for FeasibilityClamp<P> {
    fn name(&self) -> String {
        format!("clamped({})", self.inner.name())
    }

    fn propose(&self) -> &ProductVector {
        &self.level
    }

    fn observe(&mut self, g: &ProductVector, next_state: &ProductVector) -> Result<()> {
        self.inner.observe(g, next_state)?;
        self.level = self.inner.propose().componentwise_max(next_state);
        Ok(())
    }

    fn cycle_mark(&self) -> CycleMark {
        self.inner.cycle_mark()
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }
}

/// Independent single-product policies, one per coordinate of a box set.
///
/// A period counts as an update when at least one product commits a new level.
pub struct PerProduct {
    parts: Vec<Box<dyn Policy>>,
    level: ProductVector,
    cycle: usize,
    updated: bool,
}

impl PerProduct {
    pub fn new(parts: Vec<Box<dyn Policy>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Config("per-product policy needs at least one product".into()));
        }
        let mut level = Vec::with_capacity(parts.len());
        for p in &parts {
            let y = p.propose();
            y.check_len(1)?;
            level.push(y[0]);
        }
        Ok(PerProduct {
            parts,
            level: level.into(),
            cycle: 1,
            updated: true,
        })
    }

    /// One MaxCOSD instance per product, each on its own interval.
    pub fn maxcosd(set: &FeasibleSet, y1: &ProductVector, gamma: f64) -> Result<Self> {
        check_initial_level(set, y1)?;
        let FeasibleSet::Box { lower, upper } = set else {
            return Err(Error::Config("per-product policies require a box set".into()));
        };
        let parts = (0..set.dim())
            .map(|i| {
                let interval = FeasibleSet::Box {
                    lower: [lower[i]].into(),
                    upper: [upper[i]].into(),
                };
                Cosd::maxcosd(interval, [y1[i]].into(), gamma).map(|p| Box::new(p) as Box<dyn Policy>)
            })
            .collect::<Result<Vec<_>>>()?;
        PerProduct::new(parts)
    }
}

impl Policy for PerProduct {
    fn name(&self) -> String {
        format!("per_product({})", self.parts[0].name())
    }

    fn propose(&self) -> &ProductVector {
        &self.level
    }

    fn observe(&mut self, g: &ProductVector, next_state: &ProductVector) -> Result<()> {
        let n = self.parts.len();
        g.check_len(n)?;
        next_state.check_len(n)?;
        let mut any = false;
        for (i, part) in self.parts.iter_mut().enumerate() {
            part.observe(&[g[i]].into(), &[next_state[i]].into())?;
            self.level.as_mut_slice()[i] = part.propose()[0];
            any |= part.cycle_mark().updated;
        }
        self.updated = any;
        if any {
            self.cycle += 1;
        }
        Ok(())
    }

    fn cycle_mark(&self) -> CycleMark {
        CycleMark {
            cycle: self.cycle,
            updated: self.updated,
        }
    }

    fn is_deterministic(&self) -> bool {
        self.parts.iter().all(|p| p.is_deterministic())
    }
}
