//! Streaming observation normalization (Welford/Chan accumulation).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Running mean/variance over observation vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub count: f64,
    pub mean: DVector<f64>,
    /// Sum of squared deviations from the mean.
    pub m2: DVector<f64>,
}

impl RunningNorm {
    pub fn new(dim: usize) -> Self {
        Self { count: 0.0, mean: DVector::zeros(dim), m2: DVector::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim());
        self.count += 1.0;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / self.count;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    /// Chan's parallel combination; exact regardless of how the stream was
    /// split, so deterministic merging only requires a fixed merge order.
    pub fn merge(&mut self, other: &RunningNorm) {
        if other.count == 0.0 {
            return;
        }
        if self.count == 0.0 {
            *self = other.clone();
            return;
        }
        let total = self.count + other.count;
        for i in 0..self.dim() {
            let delta = other.mean[i] - self.mean[i];
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / total;
            self.mean[i] += delta * other.count / total;
        }
        self.count = total;
    }

    pub fn variance(&self) -> DVector<f64> {
        if self.count < 1.0 {
            return DVector::from_element(self.dim(), 1.0);
        }
        self.m2.map(|m| m / self.count)
    }

    /// Per-channel standard deviation with a floor: near-constant channels
    /// must not amplify micro-jitter into saturating inputs.
    fn channel_std(&self, i: usize) -> f64 {
        (self.m2[i] / self.count).sqrt().max(1e-3)
    }

    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        if self.count < 2.0 {
            out.copy_from_slice(x);
            return;
        }
        for i in 0..x.len() {
            out[i] = (x[i] - self.mean[i]) / self.channel_std(i);
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.normalize_into(x, &mut out);
        out
    }

    pub fn denormalize(&self, y: &[f64]) -> Vec<f64> {
        if self.count < 2.0 {
            return y.to_vec();
        }
        (0..y.len()).map(|i| y[i] * self.channel_std(i) + self.mean[i]).collect()
    }
}
