//! Elite ranking and the parameter update.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EliteMode {
    /// Rank directions by `max(R+, R-)`.
    Ars,
    /// Rank directions by the reward differential `|R+ - R-|`.
    Bgs,
}

/// Indices of the top-`k` directions, descending by the mode's key; ties
/// break toward the lower direction index.
pub fn rank_elites(mean_pos: &[f64], mean_neg: &[f64], k: usize, mode: EliteMode) -> Vec<usize> {
    assert_eq!(mean_pos.len(), mean_neg.len());
    assert!(k <= mean_pos.len());
    let key = |i: usize| match mode {
        EliteMode::Ars => mean_pos[i].max(mean_neg[i]),
        EliteMode::Bgs => (mean_pos[i] - mean_neg[i]).abs(),
    };
    let mut idx: Vec<usize> = (0..mean_pos.len()).collect();
    idx.sort_by(|a, b| key(*b).partial_cmp(&key(*a)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b)));
    idx.truncate(k);
    idx
}

/// Population standard deviation of the `2k` elite mean-returns, floored at
/// 1e-8.
pub fn elite_return_std(mean_pos: &[f64], mean_neg: &[f64], elites: &[usize]) -> f64 {
    let mut values = Vec::with_capacity(2 * elites.len());
    for &i in elites {
        values.push(mean_pos[i]);
        values.push(mean_neg[i]);
    }
    if values.is_empty() {
        return 1e-8;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt().max(1e-8)
}

#[derive(Debug, Error)]
#[error("non-finite policy update (sigma_r={sigma_r}, step_size={step_size})")]
pub struct UpdateError {
    pub sigma_r: f64,
    pub step_size: f64,
}

/// ES parameter update along the elite directions:
/// `theta' = theta + (alpha / sigma_r) * sum_i (meanR+_i - meanR-_i) * delta_i`.
pub fn update_policy(
    theta: &DVector<f64>,
    elites: &[usize],
    deltas: &[DVector<f64>],
    mean_pos: &[f64],
    mean_neg: &[f64],
    step_size: f64,
    sigma_r: f64,
) -> Result<DVector<f64>, UpdateError> {
    let mut step = DVector::zeros(theta.len());
    for &i in elites {
        step.axpy(mean_pos[i] - mean_neg[i], &deltas[i], 1.0);
    }
    let out = theta + step * (step_size / sigma_r);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(UpdateError { sigma_r, step_size });
    }
    Ok(out)
}
