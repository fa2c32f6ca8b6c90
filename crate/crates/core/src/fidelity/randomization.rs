//! Per-episode domain randomization of physical parameters.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// `center ± half_range`, drawn uniformly once per episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomRange {
    pub center: f64,
    pub half_range: f64,
}

impl RandomRange {
    pub fn fixed(center: f64) -> Self {
        Self { center, half_range: 0.0 }
    }

    pub fn new(center: f64, half_range: f64) -> Self {
        Self { center, half_range }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.half_range <= 0.0 {
            self.center
        } else {
            rng.gen_range(self.center - self.half_range..=self.center + self.half_range)
        }
    }

    pub fn min(&self) -> f64 {
        self.center - self.half_range.max(0.0)
    }

    pub fn max(&self) -> f64 {
        self.center + self.half_range.max(0.0)
    }
}

/// Which physical parameters get randomized each episode and over what range.
/// Paddle and table restitution are randomized by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizationSpec {
    pub table_restitution: RandomRange,
    pub paddle_restitution: RandomRange,
}

impl Default for RandomizationSpec {
    fn default() -> Self {
        Self {
            table_restitution: RandomRange::new(0.9, 0.15),
            paddle_restitution: RandomRange::new(0.7, 0.15),
        }
    }
}

/// Per-episode surface parameter values produced by [`RandomizationSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceOverrides {
    pub table_restitution: f64,
    pub paddle_restitution: f64,
}

impl RandomizationSpec {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> SurfaceOverrides {
        SurfaceOverrides {
            table_restitution: self.table_restitution.sample(rng),
            paddle_restitution: self.paddle_restitution.sample(rng),
        }
    }
}
