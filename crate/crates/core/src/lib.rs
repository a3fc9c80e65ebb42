//! Online inventory optimization under feasibility constraints.
//!
//! A manager repeatedly picks an order-up-to level `y_t` that must dominate
//! the current stock `x_t`, pays a newsvendor cost on the realized demand and
//! sees only a subgradient (by default computed from censored sales). The
//! crate provides the inventory dynamics, demand processes, the cyclic
//! subgradient policies and a simulator that measures exact regret.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demand;
pub mod dynamics;
mod error;
pub mod feasible;
pub mod loss;
pub mod policies;
pub mod simulator;
mod vector;

pub use error::{Error, Result};
pub use feasible::FeasibleSet;
pub use loss::{Feedback, Loss, NewsvendorLoss};
pub use vector::ProductVector;
