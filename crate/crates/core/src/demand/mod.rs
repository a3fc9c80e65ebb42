//! Demand processes: synthetic generators, recorded datasets and the
//! lower-bound adversaries.
//!
//! A [`DemandSource`] is a declarative description; [`DemandSource::stream`]
//! turns it into a stateful [`DemandStream`] bound to one seed. Randomness
//! comes from ChaCha8 with one independent stream per product, so a
//! `(source, seed)` pair yields the same sequence on every platform.

mod adversary;
mod dataset;

pub use adversary::{adversary_prop1, adversary_prop2, Prop1Construction, Prop2Construction};
pub use dataset::{load_csv, parse_csv, CsvDataset};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::ProductVector;

/// Name of the generator behind every random source.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Poisson intensities up to this value are sampled by inversion.
const INVERSION_MAX_INTENSITY: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemandSource {
    /// Fixed sequence, repeated periodically once exhausted.
    Deterministic { sequence: Vec<ProductVector> },
    IidPoisson { intensities: ProductVector },
    /// Poisson demands whose intensities are drawn once from `Uniform[low, high]`
    /// using `meta_seed`, independently of the replication seed.
    UniformIntensityPoisson { n: usize, low: f64, high: f64, meta_seed: u64 },
    /// `d_t = max(0, mean + φ (d_{t−1} − mean) + σ ε_t)`, started at `d_0 = mean`.
    ClippedAr1 {
        coefficient: f64,
        noise_scale: f64,
        mean: ProductVector,
    },
    Csv(CsvDataset),
    /// Placeholder resolved by [`adversary_prop1`] into a deterministic sequence.
    AdversaryProp1 { probe: f64 },
    /// `d_t = budget_ratio · initial_level · 2^{−t}`.
    AdversaryProp2 { initial_level: f64, budget_ratio: f64 },
}

/// Uniformly probably positive demand: `P(∀i, d_{t,i} ≥ ρ | past) ≥ μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonDegeneracyParams {
    pub rho: f64,
    pub mu: f64,
}

impl DemandSource {
    /// Product count, when the source fixes it.
    pub fn dim(&self) -> Option<usize> {
        match self {
            DemandSource::Deterministic { sequence } => sequence.first().map(|d| d.len()),
            DemandSource::IidPoisson { intensities } => Some(intensities.len()),
            DemandSource::UniformIntensityPoisson { n, .. } => Some(*n),
            DemandSource::ClippedAr1 { mean, .. } => Some(mean.len()),
            DemandSource::Csv(data) => Some(data.products()),
            DemandSource::AdversaryProp1 { .. } | DemandSource::AdversaryProp2 { .. } => Some(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DemandSource::Deterministic { sequence } => {
                let n = sequence
                    .first()
                    .ok_or_else(|| Error::Config("deterministic sequence is empty".into()))?
                    .len();
                for d in sequence {
                    d.check_len(n)?;
                    if !d.is_nonnegative() || !d.is_finite() {
                        return Err(Error::Config("deterministic demands must be finite and >= 0".into()));
                    }
                }
                Ok(())
            }
            DemandSource::IidPoisson { intensities } => {
                if intensities.is_empty() || !intensities.is_nonnegative() || !intensities.is_finite() {
                    return Err(Error::Config("Poisson intensities must be finite and >= 0".into()));
                }
                Ok(())
            }
            DemandSource::UniformIntensityPoisson { n, low, high, .. } => {
                if *n == 0 || !(*low >= 0.0 && low <= high && high.is_finite()) {
                    return Err(Error::Config(format!(
                        "intensity range [{low}, {high}] over {n} products is invalid"
                    )));
                }
                Ok(())
            }
            DemandSource::ClippedAr1 {
                coefficient,
                noise_scale,
                mean,
            } => {
                if !coefficient.is_finite() || !(*noise_scale >= 0.0) || mean.is_empty() || !mean.is_finite() {
                    return Err(Error::Config("AR(1) parameters are invalid".into()));
                }
                Ok(())
            }
            DemandSource::Csv(data) => {
                if data.periods() == 0 {
                    return Err(Error::Ingestion {
                        row: 0,
                        message: "no periods".into(),
                    });
                }
                Ok(())
            }
            DemandSource::AdversaryProp1 { probe } => {
                if !(*probe > 0.0) {
                    return Err(Error::Config("probe demand must be > 0".into()));
                }
                Ok(())
            }
            DemandSource::AdversaryProp2 {
                initial_level,
                budget_ratio,
            } => {
                if !(*initial_level > 0.0) {
                    return Err(Error::Config("initial level must be > 0".into()));
                }
                if !(*budget_ratio > 0.0 && *budget_ratio < 1.0) {
                    return Err(Error::Config(format!("budget ratio {budget_ratio} is outside (0, 1)")));
                }
                Ok(())
            }
        }
    }

    /// Poisson intensities, for the sources that have them.
    pub fn intensities(&self) -> Option<ProductVector> {
        match self {
            DemandSource::IidPoisson { intensities } => Some(intensities.clone()),
            DemandSource::UniformIntensityPoisson {
                n,
                low,
                high,
                meta_seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*meta_seed);
                Some((0..*n).map(|_| low + (high - low) * rng.random::<f64>()).collect())
            }
            _ => None,
        }
    }

    /// Stateful generator for one replication.
    pub fn stream(&self, seed: u64) -> Result<DemandStream> {
        self.validate()?;
        let n = self.dim().unwrap_or(1);
        let kind = match self {
            DemandSource::Deterministic { sequence } => StreamKind::Sequence {
                rows: sequence.clone(),
                periodic: true,
            },
            DemandSource::Csv(data) => StreamKind::Sequence {
                rows: data.rows().to_vec(),
                periodic: false,
            },
            DemandSource::IidPoisson { .. } | DemandSource::UniformIntensityPoisson { .. } => {
                StreamKind::Poisson(self.intensities().expect("Poisson source"))
            }
            DemandSource::ClippedAr1 {
                coefficient,
                noise_scale,
                mean,
            } => StreamKind::Ar1 {
                coefficient: *coefficient,
                noise_scale: *noise_scale,
                mean: mean.clone(),
                previous: mean.clone(),
            },
            DemandSource::AdversaryProp1 { .. } => {
                return Err(Error::Config(
                    "the constant-probe adversary must be resolved against a policy first".into(),
                ))
            }
            DemandSource::AdversaryProp2 {
                initial_level,
                budget_ratio,
            } => StreamKind::Halving {
                first: initial_level * budget_ratio,
            },
        };
        let rngs = (0..n)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                rng
            })
            .collect();
        Ok(DemandStream {
            kind,
            rngs,
            period: 0,
        })
    }
}

#[derive(Debug, Clone)]
enum StreamKind {
    Sequence { rows: Vec<ProductVector>, periodic: bool },
    Poisson(ProductVector),
    Ar1 {
        coefficient: f64,
        noise_scale: f64,
        mean: ProductVector,
        previous: ProductVector,
    },
    Halving { first: f64 },
}

/// Demand generator owned by a single run.
#[derive(Debug, Clone)]
pub struct DemandStream {
    kind: StreamKind,
    rngs: Vec<ChaCha8Rng>,
    period: usize,
}

impl DemandStream {
    /// Number of demands emitted so far.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Demand `d_t` for the next period `t = period() + 1`.
    pub fn next_demand(&mut self) -> Result<ProductVector> {
        let t = self.period + 1;
        let d = match &mut self.kind {
            StreamKind::Sequence { rows, periodic } => {
                if t > rows.len() && !*periodic {
                    return Err(Error::EndOfData { t });
                }
                rows[(t - 1) % rows.len()].clone()
            }
            StreamKind::Poisson(intensities) => intensities
                .iter()
                .zip(self.rngs.iter_mut())
                .map(|(&lambda, rng)| sample_poisson(lambda, rng))
                .collect(),
            StreamKind::Ar1 {
                coefficient,
                noise_scale,
                mean,
                previous,
            } => {
                let next: ProductVector = (0..mean.len())
                    .map(|i| {
                        let eps: f64 = if *noise_scale > 0.0 {
                            StandardNormal.sample(&mut self.rngs[i])
                        } else {
                            0.0
                        };
                        (mean[i] + *coefficient * (previous[i] - mean[i]) + *noise_scale * eps).max(0.0)
                    })
                    .collect();
                *previous = next.clone();
                next
            }
            StreamKind::Halving { first } => {
                let exponent = i32::try_from(t).unwrap_or(i32::MAX);
                ProductVector::from([*first * 0.5f64.powi(exponent)])
            }
        };
        self.period = t;
        Ok(d)
    }

    /// Next `count` demands.
    pub fn take(&mut self, count: usize) -> Result<Vec<ProductVector>> {
        (0..count).map(|_| self.next_demand()).collect()
    }
}

/// Poisson draw; inversion of the CDF for small intensities.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda > INVERSION_MAX_INTENSITY {
        return Poisson::new(lambda).map(|p| p.sample(rng)).unwrap_or(lambda);
    }
    let u: f64 = rng.random();
    let mut k = 0u32;
    let mut mass = (-lambda).exp();
    let mut cdf = mass;
    let limit = (lambda + 40.0 * lambda.sqrt() + 100.0) as u32;
    while u > cdf && k < limit {
        k += 1;
        mass *= lambda / f64::from(k);
        cdf += mass;
    }
    f64::from(k)
}

/// Closed-form non-degeneracy parameters, when the source admits them.
///
/// Poisson sources are integer valued so `ρ = 1` and `μ = Π_i (1 − e^{−λ_i})`.
/// A deterministic sequence bounded below by `c > 0` gives `ρ = c, μ = 1`.
pub fn uppd_params(source: &DemandSource) -> Option<NonDegeneracyParams> {
    match source {
        DemandSource::IidPoisson { .. } | DemandSource::UniformIntensityPoisson { .. } => {
            let intensities = source.intensities()?;
            let mu: f64 = intensities.iter().map(|&l| -(-l).exp_m1()).product();
            (mu > 0.0).then_some(NonDegeneracyParams { rho: 1.0, mu })
        }
        DemandSource::Deterministic { sequence } => {
            let floor = sequence.iter().map(|d| d.min_entry()).fold(f64::INFINITY, f64::min);
            (floor > 0.0 && floor.is_finite()).then_some(NonDegeneracyParams { rho: floor, mu: 1.0 })
        }
        _ => None,
    }
}
