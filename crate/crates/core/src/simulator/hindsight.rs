//! Best constant level in hindsight, `argmin_{y ∈ 𝒴} Σ_t ℓ_t(y)`.

use crate::error::{check_dim, Error, Result};
use crate::feasible::FeasibleSet;
use crate::loss::{newsvendor_cost_unchecked, Loss, NewsvendorLoss};
use crate::vector::ProductVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Hindsight {
    pub level: ProductVector,
    pub value: f64,
}

/// Exact minimizer of the cumulative loss over the feasible set.
///
/// Newsvendor losses separate across products into convex piecewise-linear
/// functions with breakpoints at the demands. On a box each product takes
/// the smallest `p/(h+p)` empirical quantile, clamped to its bounds. Under a
/// capacity the negative-slope pieces of all products are bought cheapest
/// first until the capacity runs out. Either way the returned level is the
/// smallest minimizer, and the value is re-evaluated from the demands.
pub fn hindsight_best(demands: &[ProductVector], loss: &Loss, set: &FeasibleSet) -> Result<Hindsight> {
    set.validate()?;
    loss.validate()?;
    let n = set.dim();
    check_dim(n, loss.dim())?;
    if demands.is_empty() {
        return Err(Error::Config("hindsight needs at least one period".into()));
    }
    for d in demands {
        d.check_len(n)?;
    }
    let level = match loss {
        Loss::Linear { .. } => match set {
            FeasibleSet::Box { lower, .. } => lower.clone(),
            FeasibleSet::Capacity { .. } => ProductVector::zeros(n),
        },
        Loss::Newsvendor(nv) => {
            let columns = sorted_columns(demands, n);
            match set {
                FeasibleSet::Box { lower, upper } => (0..n)
                    .map(|i| smallest_quantile(&columns[i], nv.h[i], nv.p[i]).clamp(lower[i], upper[i]))
                    .collect(),
                FeasibleSet::Capacity { cap, .. } => greedy_capacity(&columns, nv, *cap),
            }
        }
    };
    let value = cumulative(demands, loss, &level)?;
    Ok(Hindsight { level, value })
}

fn cumulative(demands: &[ProductVector], loss: &Loss, y: &ProductVector) -> Result<f64> {
    match loss {
        Loss::Newsvendor(nv) => Ok(demands.iter().map(|d| newsvendor_cost_unchecked(y, d, nv)).sum()),
        Loss::Linear { .. } => Ok(y.sum() * demands.len() as f64),
    }
}

fn sorted_columns(demands: &[ProductVector], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut col: Vec<f64> = demands.iter().map(|d| d[i]).collect();
            col.sort_by(f64::total_cmp);
            col
        })
        .collect()
}

/// Smallest `d_(j)` with `h·j ≥ p·(T − j)`, or `−∞` when `p = 0`.
fn smallest_quantile(sorted: &[f64], h: f64, p: f64) -> f64 {
    let total = sorted.len();
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    // h·j − p·(T − j) is increasing in j
    let j = (1..=total)
        .find(|&j| h * j as f64 >= p * (total - j) as f64)
        .unwrap_or(total);
    sorted[j - 1]
}

/// Greedy allocation of the capacity to the steepest descending pieces.
fn greedy_capacity(columns: &[Vec<f64>], nv: &NewsvendorLoss, cap: f64) -> ProductVector {
    // (slope, product, start, end) for every piece with negative slope
    let mut pieces = Vec::new();
    for (i, col) in columns.iter().enumerate() {
        let total = col.len();
        let (h, p) = (nv.h[i], nv.p[i]);
        let mut start = 0.0;
        let mut below = col.partition_point(|&d| d <= 0.0);
        while below < total {
            let end = col[below];
            let slope = h * below as f64 - p * (total - below) as f64;
            if slope >= 0.0 {
                break;
            }
            if end > start {
                pieces.push((slope, i, start, end));
            }
            start = end;
            below = col.partition_point(|&d| d <= end);
        }
    }
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));

    let mut level = ProductVector::zeros(columns.len());
    let mut remaining = cap;
    for (_, i, start, end) in pieces {
        if remaining <= 0.0 {
            break;
        }
        let width = end - start;
        if width <= remaining {
            level.as_mut_slice()[i] = end;
            remaining -= width;
        } else {
            level.as_mut_slice()[i] = start + remaining;
            remaining = 0.0;
        }
    }
    level
}

/// Offline projected subgradient with iterate averaging on the cumulative
/// newsvendor loss, step `D / (G_F √j)` where `G_F = T·G`.
///
/// Stops once the averaged iterate moves less than `1e-8·D` or after
/// `max_iterations`. Slower and less precise than [`hindsight_best`]; kept
/// as an independent cross-check.
pub fn hindsight_subgradient(
    demands: &[ProductVector],
    loss: &NewsvendorLoss,
    set: &FeasibleSet,
    max_iterations: usize,
) -> Result<Hindsight> {
    set.validate()?;
    loss.validate()?;
    let n = set.dim();
    check_dim(n, loss.dim())?;
    if demands.is_empty() {
        return Err(Error::Config("hindsight needs at least one period".into()));
    }
    for d in demands {
        d.check_len(n)?;
    }
    let columns = sorted_columns(demands, n);
    let total = demands.len() as f64;
    let diameter = set.diameter();
    let scale = loss.gradient_bound() * total;
    if diameter == 0.0 || scale == 0.0 {
        let level = set.project(&ProductVector::zeros(n))?;
        let value = demands.iter().map(|d| newsvendor_cost_unchecked(&level, d, loss)).sum();
        return Ok(Hindsight { level, value });
    }

    let mut y = set.project(&ProductVector::zeros(n))?;
    let mut avg = y.clone();
    for j in 1..=max_iterations {
        // Σ_t (h·1{y > d_t} − p·1{y ≤ d_t})
        let g: ProductVector = (0..n)
            .map(|i| {
                let above = columns[i].partition_point(|&d| d < y[i]) as f64;
                loss.h[i] * above - loss.p[i] * (total - above)
            })
            .collect();
        y = set.project(&y.sub_scaled(diameter / (scale * (j as f64).sqrt()), &g))?;
        let weight = 1.0 / (j as f64 + 1.0);
        let next_avg: ProductVector = avg.iter().zip(y.iter()).map(|(&a, &b)| a + weight * (b - a)).collect();
        let moved = next_avg.distance(&avg);
        avg = next_avg;
        if moved < 1e-8 * diameter {
            break;
        }
    }
    let value = demands.iter().map(|d| newsvendor_cost_unchecked(&avg, d, loss)).sum();
    Ok(Hindsight { level: avg, value })
}
