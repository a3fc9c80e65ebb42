//! Per-product real vectors: demands, levels, states and subgradients.

use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// A length-`n` vector indexed by product.
///
/// Entries are nonnegative when the vector holds a demand or an order-up-to
/// level; backlog states and subgradients may be negative.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductVector(Vec<f64>);

impl ProductVector {
    pub fn new(values: Vec<f64>) -> Self {
        ProductVector(values)
    }

    pub fn zeros(n: usize) -> Self {
        ProductVector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        ProductVector(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Componentwise `self ⪯ other`, exact comparison.
    pub fn dominated_by(&self, other: &ProductVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &ProductVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sub(&self, other: &ProductVector) -> ProductVector {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &ProductVector) -> ProductVector {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn add_assign(&mut self, other: &ProductVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    /// `self - scale * other`
    pub fn sub_scaled(&self, scale: f64, other: &ProductVector) -> ProductVector {
        self.zip_with(other, |a, b| a - scale * b)
    }

    pub fn componentwise_min(&self, other: &ProductVector) -> ProductVector {
        self.zip_with(other, f64::min)
    }

    pub fn componentwise_max(&self, other: &ProductVector) -> ProductVector {
        self.zip_with(other, f64::max)
    }

    /// `[self]^+`
    pub fn positive_part(&self) -> ProductVector {
        self.map(|v| v.max(0.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ProductVector {
        ProductVector(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn distance(&self, other: &ProductVector) -> f64 {
        self.sub(other).norm()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        check_dim(n, self.0.len())
    }

    fn zip_with(&self, other: &ProductVector, f: impl Fn(f64, f64) -> f64) -> ProductVector {
        debug_assert_eq!(self.0.len(), other.0.len());
        ProductVector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl Deref for ProductVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for ProductVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for ProductVector {
    fn from(values: Vec<f64>) -> Self {
        ProductVector(values)
    }
}

impl From<&[f64]> for ProductVector {
    fn from(values: &[f64]) -> Self {
        ProductVector(values.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for ProductVector {
    fn from(values: [f64; N]) -> Self {
        ProductVector(values.to_vec())
    }
}

impl FromIterator<f64> for ProductVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        ProductVector(iter.into_iter().collect())
    }
}
