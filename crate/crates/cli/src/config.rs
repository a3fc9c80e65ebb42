//! Experiment configuration and its resolution into a runnable problem.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use oio::demand::{adversary_prop1, load_csv, uppd_params, DemandSource, NonDegeneracyParams, RNG_ALGORITHM};
use oio::dynamics::DynamicKind;
use oio::policies::{ConstantPolicy, Cosd, FeasibilityClamp, Osd, PerProduct, Policy, StepSize, UpdateStrategy};
use oio::simulator::{theoretical_bounds, Problem, TheoreticalBounds};
use oio::{FeasibleSet, Feedback, Loss, NewsvendorLoss, ProductVector};

pub const DEFAULT_DELTA: f64 = 0.1;
pub const AGGREGATION: &str = "mean with standard error over replications";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setting: Option<SettingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomProblem>,
    pub policy: PolicySpec,
    pub horizon: usize,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Confidence level of the high-probability regret bound.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "yes")]
    pub write_trajectories: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

/// One of the five reference problems, with optional overrides.
///
/// 1: single product, lost sales, Poisson(1). 2: as 1 with perishable stock.
/// 3: 100 products under a capacity, Poisson intensities from Uniform[1, 2].
/// 4: recorded demands under a capacity. 5: recorded demands in per-product boxes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingConfig {
    pub id: u8,
    /// Upper end of `[0, D]` for settings 1 and 2 (default 10).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_upper: Option<f64>,
    /// Shelf life for setting 2 (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<usize>,
    /// Product count for setting 3 (default 100).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub products: Option<usize>,
    /// Seed for drawing the setting-3 intensities (default 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity_seed: Option<u64>,
    /// Explicit capacity for settings 3 and 4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    /// Capacity as a multiple of total mean demand when `capacity` is unset (default 1.5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_factor: Option<f64>,
    /// Demand CSV for settings 4 and 5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    /// Average selling price per product, settings 4 and 5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prices: Option<Vec<f64>>,
    /// Box upper bound quantile for setting 5 (default 0.95).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_quantile: Option<f64>,
    /// `h_i = cost_scale · price_i` for settings 4 and 5 (default 0.005).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_scale: Option<f64>,
    /// `p_i / h_i` (default 200).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<Feedback>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub dynamic: DynamicKind,
    pub demand: DemandSpec,
    pub loss: LossSpec,
    pub set: FeasibleSet,
    #[serde(default)]
    pub feedback: Feedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemandSpec {
    /// Demands read from a CSV file at resolution time.
    CsvFile { path: PathBuf },
    #[serde(untagged)]
    Source(DemandSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Newsvendor { h: ProductVector, p: ProductVector },
    /// Same `h` for all products and `p = ratio · h`.
    Ratio { h: f64, ratio: f64 },
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSpec {
    /// `η_t = γD / (G√t)`
    Gamma { gamma: f64 },
    /// `γD / √(accumulated squared gradient norms)`
    Adaptive { gamma: f64 },
    Constant { eta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Maxcosd {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_level: Option<ProductVector>,
    },
    /// One MaxCOSD instance per product (box sets only).
    MaxcosdPerProduct {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_level: Option<ProductVector>,
    },
    /// Subgradient descent with `η_t = γD/(G√t)`. `clamped` raises each level
    /// to the current state, which keeps it feasible on box sets.
    Osd {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_level: Option<ProductVector>,
        #[serde(default)]
        clamped: bool,
    },
    AdaptiveOsd {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_level: Option<ProductVector>,
    },
    Cosd {
        strategy: UpdateStrategy,
        rates: RateSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_level: Option<ProductVector>,
    },
    Constant {
        level: ProductVector,
    },
    /// Never orders.
    Zero,
}

impl PolicySpec {
    pub fn gamma(&self) -> Option<f64> {
        match self {
            PolicySpec::Maxcosd { gamma, .. }
            | PolicySpec::MaxcosdPerProduct { gamma, .. }
            | PolicySpec::Osd { gamma, .. }
            | PolicySpec::AdaptiveOsd { gamma, .. } => Some(*gamma),
            PolicySpec::Cosd {
                rates: RateSpec::Gamma { gamma } | RateSpec::Adaptive { gamma },
                ..
            } => Some(*gamma),
            _ => None,
        }
    }

    /// Copy with a different learning-rate parameter.
    pub fn with_gamma(&self, value: f64) -> Result<PolicySpec> {
        let mut updated = self.clone();
        match &mut updated {
            PolicySpec::Maxcosd { gamma, .. }
            | PolicySpec::MaxcosdPerProduct { gamma, .. }
            | PolicySpec::Osd { gamma, .. }
            | PolicySpec::AdaptiveOsd { gamma, .. } => *gamma = value,
            PolicySpec::Cosd {
                rates: RateSpec::Gamma { gamma } | RateSpec::Adaptive { gamma },
                ..
            } => *gamma = value,
            _ => bail!("policy: {} has no learning-rate parameter gamma", self.label()),
        }
        Ok(updated)
    }

    pub fn label(&self) -> String {
        match self {
            PolicySpec::Maxcosd { .. } => "maxcosd".into(),
            PolicySpec::MaxcosdPerProduct { .. } => "maxcosd_per_product".into(),
            PolicySpec::Osd { clamped: false, .. } => "osd".into(),
            PolicySpec::Osd { clamped: true, .. } => "osd_clamped".into(),
            PolicySpec::AdaptiveOsd { .. } => "adaptive_osd".into(),
            PolicySpec::Cosd { strategy, .. } => format!("cosd({strategy:?})").to_lowercase(),
            PolicySpec::Constant { .. } => "constant".into(),
            PolicySpec::Zero => "zero".into(),
        }
    }

    /// Whether the policy is feasible by construction, whatever the demand.
    pub fn self_feasible(&self) -> bool {
        matches!(
            self,
            PolicySpec::Maxcosd { .. } | PolicySpec::MaxcosdPerProduct { .. } | PolicySpec::Osd { clamped: true, .. }
        ) || matches!(
            self,
            PolicySpec::Cosd {
                strategy: UpdateStrategy::MaxCosd,
                ..
            }
        )
    }

    fn is_maxcosd(&self) -> bool {
        matches!(
            self,
            PolicySpec::Maxcosd { .. }
                | PolicySpec::Cosd {
                    strategy: UpdateStrategy::MaxCosd,
                    rates: RateSpec::Adaptive { .. },
                    ..
                }
        )
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Some(gamma) = self.gamma() {
            if !(gamma > 0.0 && gamma.is_finite()) {
                bail!("policy.gamma: must be a positive number, got {gamma}");
            }
        }
        let level = match self {
            PolicySpec::Maxcosd { initial_level, .. }
            | PolicySpec::MaxcosdPerProduct { initial_level, .. }
            | PolicySpec::Osd { initial_level, .. }
            | PolicySpec::AdaptiveOsd { initial_level, .. }
            | PolicySpec::Cosd { initial_level, .. } => initial_level.as_ref(),
            PolicySpec::Constant { level } => Some(level),
            PolicySpec::Zero => None,
        };
        if let Some(level) = level {
            if level.len() != n {
                bail!("policy.initial_level: expected {n} entries, got {}", level.len());
            }
        }
        if let PolicySpec::Cosd {
            rates: RateSpec::Constant { eta },
            ..
        } = self
        {
            if !(*eta >= 0.0 && eta.is_finite()) {
                bail!("policy.rates.eta: must be finite and >= 0, got {eta}");
            }
        }
        Ok(())
    }

    /// Fresh policy instance for one replication.
    pub fn build(&self, problem: &Problem) -> Result<Box<dyn Policy>> {
        let set = problem.set.clone();
        let n = set.dim();
        let start = |level: &Option<ProductVector>| level.clone().unwrap_or_else(|| ProductVector::zeros(n));
        let g = problem.gradient_bound();
        let policy: Box<dyn Policy> = match self {
            PolicySpec::Maxcosd { gamma, initial_level } => Box::new(Cosd::maxcosd(set, start(initial_level), *gamma)?),
            PolicySpec::MaxcosdPerProduct { gamma, initial_level } => {
                Box::new(PerProduct::maxcosd(&set, &start(initial_level), *gamma)?)
            }
            PolicySpec::Osd {
                gamma,
                initial_level,
                clamped,
            } => {
                let osd = Osd::with_gamma(set.clone(), start(initial_level), *gamma, g)?;
                if *clamped {
                    Box::new(FeasibilityClamp::new(&set, osd)?)
                } else {
                    Box::new(osd)
                }
            }
            PolicySpec::AdaptiveOsd { gamma, initial_level } => {
                Box::new(Osd::adaptive(set, start(initial_level), *gamma)?)
            }
            PolicySpec::Cosd {
                strategy,
                rates,
                initial_level,
            } => {
                let d = set.diameter();
                let rates = match *rates {
                    RateSpec::Gamma { gamma } => StepSize::gamma_schedule(gamma, d, g),
                    RateSpec::Adaptive { gamma } => StepSize::Adaptive { gamma, diameter: d },
                    RateSpec::Constant { eta } => StepSize::Constant { eta },
                };
                Box::new(Cosd::new(set, start(initial_level), *strategy, rates)?)
            }
            PolicySpec::Constant { level } => Box::new(ConstantPolicy::new(&set, level.clone())?),
            PolicySpec::Zero => Box::new(ConstantPolicy::zero(&set)?),
        };
        Ok(policy)
    }
}

/// Everything derived from a config that a run or a bound check needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub problem: String,
    pub products: usize,
    pub dynamic: String,
    pub feedback: Feedback,
    pub policy: String,
    /// Subgradient bound `G`.
    #[serde(rename = "G")]
    pub gradient_bound: f64,
    /// Diameter `D` of the feasible set.
    #[serde(rename = "D")]
    pub diameter: f64,
    pub rho: Option<f64>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: f64,
    pub horizon: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub rng: String,
    pub aggregation: String,
    /// Unstated constants filled in by default, with their values.
    pub defaults: BTreeMap<String, Value>,
    pub bounds: Option<TheoreticalBounds>,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: Problem,
    pub source: DemandSource,
    pub uppd: Option<NonDegeneracyParams>,
    pub manifest: Manifest,
}

impl Resolved {
    /// Regret bounds that the configured policy is known to satisfy, for a
    /// run of `horizon` periods.
    pub fn applicable_bounds(&self, policy: &PolicySpec, horizon: usize) -> Vec<(&'static str, f64)> {
        let m = &self.manifest;
        let (Some(gamma), true) = (policy.gamma(), m.gradient_bound > 0.0 && m.diameter > 0.0) else {
            return Vec::new();
        };
        let mu = self.uppd.map_or(1.0, |u| u.mu);
        let Ok(b) = theoretical_bounds(horizon, m.gradient_bound, m.diameter, gamma, mu, m.delta) else {
            return Vec::new();
        };
        let in_range = self.uppd.is_some_and(|u| gamma <= u.rho / m.diameter);
        let mut out = Vec::new();
        if policy.is_maxcosd() && in_range {
            out.push(("high_probability", b.high_probability));
        }
        let osd_rates = matches!(policy, PolicySpec::Osd { clamped: false, .. })
            || matches!(
                policy,
                PolicySpec::Cosd {
                    strategy: UpdateStrategy::EveryPeriod,
                    rates: RateSpec::Gamma { .. },
                    ..
                }
            );
        if osd_rates && self.problem.dynamic == DynamicKind::Stateless {
            out.push(("osd_deterministic", b.osd_deterministic));
        }
        if osd_rates && in_range && self.uppd.is_some_and(|u| u.mu == 1.0) {
            out.push(("osd_uniform_positive", b.osd_uniform_positive));
        }
        out
    }

    /// Bound on the mean regret across replications, if one applies.
    pub fn expected_bound(&self, policy: &PolicySpec, horizon: usize) -> Option<f64> {
        let m = &self.manifest;
        let u = self.uppd?;
        let gamma = policy.gamma()?;
        if !policy.is_maxcosd() || gamma > u.rho / m.diameter {
            return None;
        }
        theoretical_bounds(horizon, m.gradient_bound, m.diameter, gamma, u.mu, m.delta)
            .ok()
            .map(|b| b.expected)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).context("invalid config")?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.setting, &self.custom) {
            (Some(_), Some(_)) => bail!("setting, custom: give exactly one of the two"),
            (None, None) => bail!("setting, custom: one of the two is required"),
            _ => {}
        }
        if self.horizon == 0 {
            bail!("horizon: must be >= 1");
        }
        if self.replications == 0 {
            bail!("replications: must be >= 1");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("delta: must lie in (0, 1), got {}", self.delta);
        }
        Ok(())
    }

    /// Builds the problem and demand source and fills in the manifest.
    pub fn resolve(&self) -> Result<Resolved> {
        self.validate()?;
        let mut defaults = BTreeMap::new();
        let (label, problem, source) = match (&self.setting, &self.custom) {
            (Some(s), None) => {
                let (problem, source) = resolve_setting(s, &mut defaults)?;
                (format!("setting {}", s.id), problem, source)
            }
            (None, Some(c)) => {
                let (problem, source) = resolve_custom(c)?;
                ("custom".to_string(), problem, source)
            }
            _ => unreachable!("checked by validate"),
        };
        problem.validate().context("problem")?;
        let n = problem.dim();
        if let Some(dim) = source.dim() {
            if dim != n {
                bail!("demand: source has {dim} products but the feasible set has {n}");
            }
        }
        self.policy.validate(n)?;

        let source = match source {
            DemandSource::AdversaryProp1 { probe } => {
                let Loss::Newsvendor(nv) = &problem.loss else {
                    bail!("loss: the probe adversary needs a newsvendor loss");
                };
                let construction = adversary_prop1(
                    || self.policy.build(&problem).map_err(|e| oio::Error::Config(e.to_string())),
                    probe,
                    self.horizon,
                    nv,
                    &problem.set,
                )
                .context("demand")?;
                defaults.insert(
                    "adversary_switch_period".into(),
                    json!(construction.switch_period),
                );
                construction.source()
            }
            other => other,
        };

        let uppd = uppd_params(&source);
        let gamma = self.policy.gamma();
        let g = problem.gradient_bound();
        let d = problem.diameter();
        let mut warnings = Vec::new();
        if let (Some(u), Some(gamma)) = (uppd, gamma) {
            if d > 0.0 && gamma > u.rho / d {
                warnings.push(format!(
                    "gamma = {gamma} exceeds rho/D = {}; the regret bounds do not apply",
                    u.rho / d
                ));
            }
        }
        if !self.policy.self_feasible() && problem.dynamic != DynamicKind::Stateless {
            warnings.push(format!(
                "{} does not enforce feasibility; runs may stop with a feasibility violation",
                self.policy.label()
            ));
        }
        let bounds = match (gamma, uppd) {
            (Some(gamma), Some(u)) if g > 0.0 && d > 0.0 => {
                theoretical_bounds(self.horizon, g, d, gamma, u.mu, self.delta).ok()
            }
            _ => None,
        };
        let manifest = Manifest {
            problem: label,
            products: n,
            dynamic: problem.dynamic.label(),
            feedback: problem.feedback,
            policy: self.policy.label(),
            gradient_bound: g,
            diameter: d,
            rho: uppd.map(|u| u.rho),
            mu: uppd.map(|u| u.mu),
            gamma,
            delta: self.delta,
            horizon: self.horizon,
            replications: self.replications,
            base_seed: self.seed,
            rng: RNG_ALGORITHM.into(),
            aggregation: AGGREGATION.into(),
            defaults,
            bounds,
            warnings,
            config: self.clone(),
        };
        Ok(Resolved {
            problem,
            source,
            uppd,
            manifest,
        })
    }
}

fn resolve_custom(c: &CustomProblem) -> Result<(Problem, DemandSource)> {
    let n = c.set.dim();
    let loss = match &c.loss {
        LossSpec::Newsvendor { h, p } => Loss::Newsvendor(NewsvendorLoss::new(h.clone(), p.clone()).context("loss")?),
        LossSpec::Ratio { h, ratio } => {
            if !(*h >= 0.0 && *ratio >= 0.0) {
                bail!("loss: h and ratio must be >= 0");
            }
            Loss::Newsvendor(NewsvendorLoss::uniform(n, *h, h * ratio))
        }
        LossSpec::Linear => Loss::Linear { n },
    };
    let source = match &c.demand {
        DemandSpec::CsvFile { path } => DemandSource::Csv(load_csv(path).context("demand.path")?),
        DemandSpec::Source(s) => s.clone(),
    };
    source.validate().context("demand")?;
    Ok((
        Problem {
            dynamic: c.dynamic.clone(),
            loss,
            set: c.set.clone(),
            feedback: c.feedback,
        },
        source,
    ))
}

fn default_of<T: Copy + Serialize>(value: Option<T>, fallback: T, key: &str, defaults: &mut BTreeMap<String, Value>) -> T {
    value.unwrap_or_else(|| {
        defaults.insert(key.to_string(), json!(fallback));
        fallback
    })
}

fn resolve_setting(s: &SettingConfig, defaults: &mut BTreeMap<String, Value>) -> Result<(Problem, DemandSource)> {
    let ratio = default_of(s.penalty_ratio, 200.0, "penalty_ratio", defaults);
    if !(ratio > 0.0) {
        bail!("setting.penalty_ratio: must be > 0");
    }
    let feedback = s.feedback.unwrap_or_default();
    match s.id {
        1 | 2 => {
            let upper = default_of(s.box_upper, 10.0, "box_upper", defaults);
            if !(upper > 0.0) {
                bail!("setting.box_upper: must be > 0");
            }
            let dynamic = if s.id == 1 {
                DynamicKind::LostSales
            } else {
                let lifetime = default_of(s.lifetime, 2, "lifetime", defaults);
                DynamicKind::PerishableFifo { lifetime }
            };
            let problem = Problem {
                dynamic,
                loss: Loss::Newsvendor(NewsvendorLoss::uniform(1, 1.0, ratio)),
                set: FeasibleSet::uniform_box(1, upper),
                feedback,
            };
            Ok((problem, DemandSource::IidPoisson { intensities: [1.0].into() }))
        }
        3 => {
            let n = default_of(s.products, 100, "products", defaults);
            let meta_seed = default_of(s.intensity_seed, 0, "intensity_seed", defaults);
            let source = DemandSource::UniformIntensityPoisson {
                n,
                low: 1.0,
                high: 2.0,
                meta_seed,
            };
            let total: f64 = source
                .intensities()
                .ok_or_else(|| anyhow!("setting.products: must be >= 1"))?
                .sum();
            let cap = capacity(s, total, defaults)?;
            let problem = Problem {
                dynamic: DynamicKind::LostSales,
                loss: Loss::Newsvendor(NewsvendorLoss::uniform(n, 1.0, ratio)),
                set: FeasibleSet::Capacity { n, cap },
                feedback,
            };
            Ok((problem, source))
        }
        4 | 5 => {
            let path = s
                .dataset
                .as_ref()
                .ok_or_else(|| anyhow!("setting.dataset: required for setting {}", s.id))?;
            let data = load_csv(path).with_context(|| format!("setting.dataset: {}", path.display()))?;
            let n = data.products();
            let prices = s
                .prices
                .as_ref()
                .ok_or_else(|| anyhow!("setting.prices: required for setting {}", s.id))?;
            if prices.len() != n {
                bail!("setting.prices: expected {n} entries, one per dataset column, got {}", prices.len());
            }
            if prices.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
                bail!("setting.prices: every price must be a positive number");
            }
            let scale = default_of(s.cost_scale, 0.005, "cost_scale", defaults);
            if !(scale > 0.0) {
                bail!("setting.cost_scale: must be > 0");
            }
            let h: ProductVector = prices.iter().map(|p| scale * p).collect();
            let p = h.map(|v| v * ratio);
            let set = if s.id == 4 {
                FeasibleSet::Capacity {
                    n,
                    cap: capacity(s, data.mean().sum(), defaults)?,
                }
            } else {
                let q = default_of(s.upper_quantile, 0.95, "upper_quantile", defaults);
                if !(q > 0.0 && q <= 1.0) {
                    bail!("setting.upper_quantile: must lie in (0, 1]");
                }
                FeasibleSet::Box {
                    lower: ProductVector::zeros(n),
                    upper: data.quantile(q),
                }
            };
            let problem = Problem {
                dynamic: DynamicKind::LostSales,
                loss: Loss::Newsvendor(NewsvendorLoss::new(h, p)?),
                set,
                feedback,
            };
            Ok((problem, DemandSource::Csv(data)))
        }
        other => bail!("setting.id: expected 1 to 5, got {other}"),
    }
}

fn capacity(s: &SettingConfig, total_mean: f64, defaults: &mut BTreeMap<String, Value>) -> Result<f64> {
    if let Some(cap) = s.capacity {
        if !(cap >= 0.0 && cap.is_finite()) {
            bail!("setting.capacity: must be finite and >= 0");
        }
        return Ok(cap);
    }
    let factor = default_of(s.capacity_factor, 1.5, "capacity_factor", defaults);
    if !(factor > 0.0) {
        bail!("setting.capacity_factor: must be > 0");
    }
    let cap = factor * total_mean;
    defaults.insert("capacity".into(), json!(cap));
    Ok(cap)
}
