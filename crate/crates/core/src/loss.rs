//! Per-period losses and their deterministic subgradient selections.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vector::ProductVector;

/// Newsvendor cost parameters: unit holding cost `h` and unit lost-sales penalty `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsvendorLoss {
    pub h: ProductVector,
    pub p: ProductVector,
}

impl NewsvendorLoss {
    pub fn new(h: ProductVector, p: ProductVector) -> Result<Self> {
        let loss = NewsvendorLoss { h, p };
        loss.validate()?;
        Ok(loss)
    }

    /// Same `h`, `p` for every product.
    pub fn uniform(n: usize, h: f64, p: f64) -> Self {
        NewsvendorLoss {
            h: ProductVector::filled(n, h),
            p: ProductVector::filled(n, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.h.len(), self.p.len())?;
        if self.h.is_empty() {
            return Err(Error::Config("newsvendor loss needs at least one product".into()));
        }
        if !self.h.is_nonnegative() || !self.p.is_nonnegative() || !self.h.is_finite() || !self.p.is_finite() {
            return Err(Error::Config("holding and penalty costs must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// `G = √n · max_i max{h_i, p_i}`
    pub fn gradient_bound(&self) -> f64 {
        let worst = self
            .h
            .iter()
            .chain(self.p.iter())
            .copied()
            .fold(0.0, f64::max);
        (self.dim() as f64).sqrt() * worst
    }
}

/// `c(y, d) = Σ h_i [y_i − d_i]^+ + p_i [d_i − y_i]^+`
pub fn newsvendor_cost(y: &ProductVector, d: &ProductVector, loss: &NewsvendorLoss) -> Result<f64> {
    let n = loss.dim();
    y.check_len(n)?;
    d.check_len(n)?;
    Ok(newsvendor_cost_unchecked(y, d, loss))
}

pub(crate) fn newsvendor_cost_unchecked(y: &[f64], d: &[f64], loss: &NewsvendorLoss) -> f64 {
    let mut total = 0.0;
    for i in 0..y.len() {
        total += loss.h[i] * (y[i] - d[i]).max(0.0) + loss.p[i] * (d[i] - y[i]).max(0.0);
    }
    total
}

/// Subgradient computable from sales alone: `g_i = h_i·1{y_i > s_i} − p_i·1{y_i = s_i}`.
pub fn censored_subgradient(
    y: &ProductVector,
    s: &ProductVector,
    loss: &NewsvendorLoss,
) -> Result<ProductVector> {
    let n = loss.dim();
    y.check_len(n)?;
    s.check_len(n)?;
    (0..n)
        .map(|i| {
            if s[i] > y[i] {
                Err(Error::Protocol(format!(
                    "sale {} exceeds order-up-to level {} for product {i}",
                    s[i], y[i]
                )))
            } else if y[i] > s[i] {
                Ok(loss.h[i])
            } else {
                Ok(-loss.p[i])
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(ProductVector::new)
}

/// Full-information subgradient; at kinks `y_i = d_i` it selects `−p_i`, the
/// same value the censored formula yields.
pub fn full_info_subgradient(
    y: &ProductVector,
    d: &ProductVector,
    loss: &NewsvendorLoss,
) -> Result<ProductVector> {
    y.check_len(loss.dim())?;
    d.check_len(loss.dim())?;
    censored_subgradient(y, &y.componentwise_min(d), loss)
}

/// What the manager sees after each period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// Only sales `min(y, d)` are revealed.
    #[default]
    Censored,
    /// The demand itself is revealed.
    FullInfo,
}

/// Loss family used by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Loss {
    Newsvendor(NewsvendorLoss),
    /// `ℓ(y) = Σ_i y_i`, independent of demand.
    Linear { n: usize },
}

impl Loss {
    pub fn dim(&self) -> usize {
        match self {
            Loss::Newsvendor(l) => l.dim(),
            Loss::Linear { n } => *n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Loss::Newsvendor(l) => l.validate(),
            Loss::Linear { n } if *n == 0 => Err(Error::Config("linear loss needs n >= 1".into())),
            Loss::Linear { .. } => Ok(()),
        }
    }

    pub fn gradient_bound(&self) -> f64 {
        match self {
            Loss::Newsvendor(l) => l.gradient_bound(),
            Loss::Linear { n } => (*n as f64).sqrt(),
        }
    }

    pub fn evaluate(&self, y: &ProductVector, d: &ProductVector) -> Result<f64> {
        match self {
            Loss::Newsvendor(l) => newsvendor_cost(y, d, l),
            Loss::Linear { n } => {
                y.check_len(*n)?;
                Ok(y.sum())
            }
        }
    }

    /// Deterministic subgradient at `y` under the given feedback mode.
    pub fn subgradient(&self, y: &ProductVector, d: &ProductVector, feedback: Feedback) -> Result<ProductVector> {
        match self {
            Loss::Newsvendor(l) => match feedback {
                Feedback::Censored => censored_subgradient(y, &y.componentwise_min(d), l),
                Feedback::FullInfo => full_info_subgradient(y, d, l),
            },
            Loss::Linear { n } => {
                y.check_len(*n)?;
                Ok(ProductVector::filled(*n, 1.0))
            }
        }
    }
}
