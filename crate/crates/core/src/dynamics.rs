//! Inventory state transitions `x_{t+1}` from `(y_t, d_t)`.
//!
//! Every rule here satisfies the dynamical constraint `x_{t+1} ⪯ [y_t − d_t]^+`,
//! and [`step`] rejects a custom rule that does not.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vector::ProductVector;

/// Maps `(y_t, d_t)` to `x_{t+1}`.
pub type TransitionRule = Arc<dyn Fn(&ProductVector, &ProductVector) -> ProductVector + Send + Sync>;

/// User-supplied transition `x_{t+1} = f(y_t, d_t)`.
#[derive(Clone)]
pub struct CustomDynamic {
    pub name: String,
    pub rule: TransitionRule,
}

impl fmt::Debug for CustomDynamic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomDynamic({})", self.name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DynamicKind {
    /// Nothing carries over: `x_{t+1} = 0`.
    Stateless,
    /// Unmet demand stays on the books: `x_{t+1} = y_t − d_t`.
    Backlogging,
    /// Unmet demand is lost: `x_{t+1} = [y_t − d_t]^+`.
    LostSales,
    /// Fixed-lifetime stock, issued oldest first, lost-sales stockouts.
    PerishableFifo { lifetime: usize },
    #[serde(skip)]
    Custom(CustomDynamic),
}

impl PartialEq for DynamicKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (DynamicKind::Stateless, DynamicKind::Stateless)
            | (DynamicKind::Backlogging, DynamicKind::Backlogging)
            | (DynamicKind::LostSales, DynamicKind::LostSales) => true,
            (DynamicKind::PerishableFifo { lifetime: a }, DynamicKind::PerishableFifo { lifetime: b }) => a == b,
            (DynamicKind::Custom(a), DynamicKind::Custom(b)) => Arc::ptr_eq(&a.rule, &b.rule),
            _ => false,
        }
    }
}

impl DynamicKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            DynamicKind::PerishableFifo { lifetime: 0 } => {
                Err(Error::Config("perishable lifetime must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DynamicKind::Stateless => "stateless".into(),
            DynamicKind::Backlogging => "backlogging".into(),
            DynamicKind::LostSales => "lost_sales".into(),
            DynamicKind::PerishableFifo { lifetime } => format!("perishable_fifo(m={lifetime})"),
            DynamicKind::Custom(c) => format!("custom({})", c.name),
        }
    }
}

/// Age distribution of on-hand stock, per product.
///
/// `buckets[i][j]` holds the units of product `i` that are `j` periods old at
/// the start of a period; bucket 0 receives this period's order.
#[derive(Debug, Clone, PartialEq)]
pub struct PerishableState {
    lifetime: usize,
    buckets: Vec<Vec<f64>>,
}

impl PerishableState {
    pub fn empty(n: usize, lifetime: usize) -> Self {
        PerishableState {
            lifetime,
            buckets: vec![vec![0.0; lifetime]; n],
        }
    }

    pub fn lifetime(&self) -> usize {
        self.lifetime
    }

    pub fn buckets(&self, product: usize) -> &[f64] {
        &self.buckets[product]
    }

    pub fn total(&self) -> ProductVector {
        self.buckets.iter().map(|b| b.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicState {
    Level(ProductVector),
    Perishable(PerishableState),
}

impl DynamicState {
    /// Current inventory state `x_t`.
    pub fn on_hand(&self) -> ProductVector {
        match self {
            DynamicState::Level(x) => x.clone(),
            DynamicState::Perishable(p) => p.total(),
        }
    }
}

/// Per-product bookkeeping of one perishable transition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerishableFlows {
    pub fresh: f64,
    pub consumed: f64,
    pub perished: f64,
}

/// `x_1 = 0` and the matching empty state.
pub fn initial_state(kind: &DynamicKind, n: usize) -> (ProductVector, DynamicState) {
    let state = match kind {
        DynamicKind::PerishableFifo { lifetime } => DynamicState::Perishable(PerishableState::empty(n, *lifetime)),
        _ => DynamicState::Level(ProductVector::zeros(n)),
    };
    (ProductVector::zeros(n), state)
}

/// One transition. Fails if `y` does not dominate the current on-hand stock.
pub fn step(
    kind: &DynamicKind,
    state: &DynamicState,
    y: &ProductVector,
    d: &ProductVector,
) -> Result<(ProductVector, DynamicState)> {
    step_with_flows(kind, state, y, d).map(|(x, s, _)| (x, s))
}

/// Like [`step`], also reporting perishable inflow/consumption/outdating per product.
pub fn step_with_flows(
    kind: &DynamicKind,
    state: &DynamicState,
    y: &ProductVector,
    d: &ProductVector,
) -> Result<(ProductVector, DynamicState, Vec<PerishableFlows>)> {
    kind.validate()?;
    let on_hand = state.on_hand();
    check_dim(on_hand.len(), y.len())?;
    check_dim(on_hand.len(), d.len())?;
    if !d.is_nonnegative() {
        return Err(Error::Protocol(format!("negative demand {:?}", d.as_slice())));
    }
    if !on_hand.dominated_by(y) {
        return Err(Error::Feasibility {
            t: 0,
            level: y.clone(),
            state: on_hand,
        });
    }
    let n = y.len();
    let leftover = y.sub(d).positive_part();

    let (x_next, next_state, flows) = match (kind, state) {
        (DynamicKind::Stateless, _) => {
            let x = ProductVector::zeros(n);
            (x.clone(), DynamicState::Level(x), Vec::new())
        }
        (DynamicKind::Backlogging, _) => {
            let x = y.sub(d);
            (x.clone(), DynamicState::Level(x), Vec::new())
        }
        (DynamicKind::LostSales, _) => (leftover.clone(), DynamicState::Level(leftover.clone()), Vec::new()),
        (DynamicKind::PerishableFifo { lifetime }, DynamicState::Perishable(ps)) => {
            if ps.lifetime != *lifetime || ps.buckets.len() != n {
                return Err(Error::Config("perishable state does not match dynamic".into()));
            }
            let mut buckets = Vec::with_capacity(n);
            let mut flows = Vec::with_capacity(n);
            for i in 0..n {
                let (b, f) = perishable_product_step(&ps.buckets[i], on_hand[i], y[i], d[i], leftover[i]);
                buckets.push(b);
                flows.push(f);
            }
            let next = PerishableState {
                lifetime: *lifetime,
                buckets,
            };
            (next.total(), DynamicState::Perishable(next), flows)
        }
        (DynamicKind::PerishableFifo { .. }, DynamicState::Level(_)) => {
            return Err(Error::Config("perishable dynamic needs an age-bucket state".into()));
        }
        (DynamicKind::Custom(custom), _) => {
            let x = (custom.rule)(y, d);
            check_dim(n, x.len())?;
            (x.clone(), DynamicState::Level(x), Vec::new())
        }
    };

    if !x_next.dominated_by(&leftover) {
        return Err(Error::Dynamics { t: 0 });
    }
    Ok((x_next, next_state, flows))
}

fn perishable_product_step(
    prior: &[f64],
    on_hand: f64,
    level: f64,
    demand: f64,
    leftover: f64,
) -> (Vec<f64>, PerishableFlows) {
    let m = prior.len();
    let mut b = prior.to_vec();
    let fresh = level - on_hand;
    b[0] += fresh;

    // oldest first
    let mut remaining = demand;
    let mut consumed = 0.0;
    for j in (0..m).rev() {
        let take = b[j].min(remaining);
        b[j] -= take;
        remaining -= take;
        consumed += take;
    }

    let perished = b[m - 1];
    let mut aged = vec![0.0; m];
    aged[1..m].copy_from_slice(&b[..m - 1]);

    // Rounding in the bucket sums can leave the survivors an ulp above
    // [y - d]^+; shave the excess off the youngest stock.
    for _ in 0..4 {
        let total: f64 = aged.iter().sum();
        let excess = total - leftover;
        if excess <= 0.0 {
            break;
        }
        let mut to_remove = excess;
        for v in aged.iter_mut().skip(1) {
            let cut = v.min(to_remove);
            *v -= cut;
            to_remove -= cut;
            if to_remove <= 0.0 {
                break;
            }
        }
    }
    if aged.iter().sum::<f64>() > leftover {
        aged.iter_mut().for_each(|v| *v = 0.0);
        if m > 1 {
            aged[1] = leftover;
        }
    }

    (
        aged,
        PerishableFlows {
            fresh,
            consumed,
            perished,
        },
    )
}
