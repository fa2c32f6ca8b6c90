//! Ball observation noise: per-axis uniform jitter plus an optional bias.

use crate::Vec3;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Uniform noise on the observed ball position.
///
/// Each axis receives `uniform(-half_width, +half_width) + bias`. The default
/// half-width of 4cm (one ball diameter either way) matches the measured
/// jitter level used for training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub half_width: [f64; 3],
    pub bias: [f64; 3],
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { half_width: [0.04; 3], bias: [0.0; 3] }
    }
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { half_width: [0.0; 3], bias: [0.0; 3] }
    }

    pub fn uniform(half_width: f64) -> Self {
        Self { half_width: [half_width; 3], bias: [0.0; 3] }
    }

    pub fn apply<R: Rng>(&self, ball_pos: &Vec3, rng: &mut R) -> Vec3 {
        let mut out = *ball_pos;
        for axis in 0..3 {
            let hw = self.half_width[axis];
            let jitter = if hw > 0.0 { rng.gen_range(-hw..=hw) } else { 0.0 };
            out[axis] += jitter + self.bias[axis];
        }
        out
    }
}
