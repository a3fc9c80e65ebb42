//! Feasible sets for order-up-to levels.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vector::ProductVector;

/// Closed convex region of the nonnegative orthant that order-up-to levels live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    /// `lower ⪯ y ⪯ upper`
    Box {
        lower: ProductVector,
        upper: ProductVector,
    },
    /// `{ y ⪰ 0, Σ y_i ≤ cap }` over `n` products.
    Capacity { n: usize, cap: f64 },
}

impl FeasibleSet {
    /// `[0, upper]^n`
    pub fn uniform_box(n: usize, upper: f64) -> Self {
        FeasibleSet::Box {
            lower: ProductVector::zeros(n),
            upper: ProductVector::filled(n, upper),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Capacity { n, .. } => *n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleSet::Box { lower, upper } => {
                check_dim(lower.len(), upper.len())?;
                if lower.is_empty() {
                    return Err(Error::Config("box set needs at least one product".into()));
                }
                if !lower.is_finite() || !upper.is_finite() {
                    return Err(Error::Config("box bounds must be finite".into()));
                }
                if !lower.is_nonnegative() {
                    return Err(Error::Config("box lower bound must be nonnegative".into()));
                }
                if !lower.dominated_by(upper) {
                    return Err(Error::Config("box lower bound exceeds upper bound".into()));
                }
                Ok(())
            }
            FeasibleSet::Capacity { n, cap } => {
                if *n == 0 {
                    return Err(Error::Config("capacity set needs at least one product".into()));
                }
                if !(cap.is_finite() && *cap >= 0.0) {
                    return Err(Error::Config(format!("capacity must be finite and >= 0, got {cap}")));
                }
                Ok(())
            }
        }
    }

    /// Membership up to an absolute tolerance.
    pub fn contains(&self, v: &ProductVector, tol: f64) -> bool {
        if v.len() != self.dim() {
            return false;
        }
        match self {
            FeasibleSet::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(&x, (&lo, &hi))| x >= lo - tol && x <= hi + tol),
            FeasibleSet::Capacity { cap, .. } => {
                v.iter().all(|&x| x >= -tol) && v.sum() <= cap + tol
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, v: &ProductVector) -> Result<ProductVector> {
        self.validate()?;
        check_dim(self.dim(), v.len())?;
        Ok(match self {
            FeasibleSet::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(&x, (&lo, &hi))| x.clamp(lo, hi))
                .collect(),
            FeasibleSet::Capacity { cap, .. } => project_capped_simplex(v, *cap),
        })
    }

    /// Exact Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Box { lower, upper } => upper.distance(lower),
            FeasibleSet::Capacity { n, cap } => {
                if *n >= 2 {
                    cap * std::f64::consts::SQRT_2
                } else {
                    *cap
                }
            }
        }
    }
}

/// Projection onto `{ y ⪰ 0, Σ y ≤ cap }`.
///
/// When the positive part already fits under the cap it is the answer;
/// otherwise the capacity binds and we project onto the scaled simplex
/// `{ y ⪰ 0, Σ y = cap }` by the sorted-threshold rule.
fn project_capped_simplex(v: &ProductVector, cap: f64) -> ProductVector {
    let positive = v.positive_part();
    if positive.sum() <= cap {
        return positive;
    }
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut running = 0.0;
    let mut theta = f64::INFINITY;
    for (j, &u) in sorted.iter().enumerate() {
        running += u;
        let candidate = (running - cap) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    if !theta.is_finite() {
        return ProductVector::zeros(v.len());
    }
    v.map(|x| (x - theta).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_projection_clamps() {
        let set = FeasibleSet::uniform_box(1, 10.0);
        assert_eq!(set.project(&[-3.0].into()).unwrap(), ProductVector::from([0.0]));
        assert_eq!(set.project(&[12.0].into()).unwrap(), ProductVector::from([10.0]));
        assert_eq!(set.project(&[4.5].into()).unwrap(), ProductVector::from([4.5]));
    }

    #[test]
    fn capacity_projection_examples() {
        let set = FeasibleSet::Capacity { n: 2, cap: 1.0 };
        assert_eq!(set.project(&[1.0, 1.0].into()).unwrap(), ProductVector::from([0.5, 0.5]));
        assert_eq!(set.project(&[2.0, -1.0].into()).unwrap(), ProductVector::from([1.0, 0.0]));
        // slack: positive part returned unchanged
        assert_eq!(set.project(&[0.25, -1.0].into()).unwrap(), ProductVector::from([0.25, 0.0]));
    }

    #[test]
    fn zero_capacity_projects_to_origin() {
        let set = FeasibleSet::Capacity { n: 3, cap: 0.0 };
        assert_eq!(set.project(&[1.0, 2.0, -1.0].into()).unwrap(), ProductVector::zeros(3));
    }

    #[test]
    fn diameters() {
        assert_eq!(FeasibleSet::uniform_box(1, 10.0).diameter(), 10.0);
        let d = FeasibleSet::Capacity { n: 2, cap: 5.0 }.diameter();
        assert!((d - 7.0710678118654755).abs() < 1e-12);
        assert_eq!(FeasibleSet::Capacity { n: 1, cap: 5.0 }.diameter(), 5.0);
        let b = FeasibleSet::Box { lower: [1.0, 0.0].into(), upper: [4.0, 4.0].into() };
        assert_eq!(b.diameter(), 5.0);
    }

    #[test]
    fn invalid_sets_are_rejected() {
        let inverted = FeasibleSet::Box { lower: [2.0].into(), upper: [1.0].into() };
        assert!(matches!(inverted.project(&[0.0].into()), Err(Error::Config(_))));
        let negative = FeasibleSet::Box { lower: [-1.0].into(), upper: [1.0].into() };
        assert!(negative.validate().is_err());
        let bad_cap = FeasibleSet::Capacity { n: 2, cap: -1.0 };
        assert!(bad_cap.validate().is_err());
        let set = FeasibleSet::uniform_box(2, 1.0);
        assert!(matches!(
            set.project(&[0.0].into()),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }
}
