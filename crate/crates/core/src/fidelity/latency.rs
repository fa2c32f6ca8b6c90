//! Per-component latency model.
//!
//! Each of the five pipeline components carries its own Gaussian latency
//! distribution, measured on the physical system. One value per component is
//! drawn at the start of each episode and held fixed for that episode.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyComponent {
    BallObs,
    ArmObs,
    GantryObs,
    ArmAction,
    GantryAction,
}

pub const LATENCY_COMPONENTS: [LatencyComponent; 5] = [
    LatencyComponent::BallObs,
    LatencyComponent::ArmObs,
    LatencyComponent::GantryObs,
    LatencyComponent::ArmAction,
    LatencyComponent::GantryAction,
];

/// Gaussian latency in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyDist {
    pub mean_ms: f64,
    pub std_ms: f64,
}

/// Latency distributions for the five components plus a global scale factor.
///
/// Scaling by `s` multiplies the mean by `s` and the standard deviation by
/// `sqrt(s)`, reproducing the published study grid (e.g. 50% of a 40ms/8.2ms
/// component is 20ms/5.8ms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyModel {
    pub ball_obs: LatencyDist,
    pub arm_obs: LatencyDist,
    pub gantry_obs: LatencyDist,
    pub arm_action: LatencyDist,
    pub gantry_action: LatencyDist,
    /// Global scale factor; 1.0 is the measured baseline, 0.0 disables latency.
    pub scale: f64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            ball_obs: LatencyDist { mean_ms: 40.0, std_ms: 8.2 },
            arm_obs: LatencyDist { mean_ms: 29.0, std_ms: 8.2 },
            gantry_obs: LatencyDist { mean_ms: 33.0, std_ms: 9.0 },
            arm_action: LatencyDist { mean_ms: 71.0, std_ms: 5.7 },
            gantry_action: LatencyDist { mean_ms: 64.5, std_ms: 11.5 },
            scale: 1.0,
        }
    }
}

impl LatencyModel {
    pub fn zero() -> Self {
        Self { scale: 0.0, ..Self::default() }
    }

    pub fn with_scale(scale: f64) -> Self {
        Self { scale, ..Self::default() }
    }

    pub fn component(&self, c: LatencyComponent) -> LatencyDist {
        match c {
            LatencyComponent::BallObs => self.ball_obs,
            LatencyComponent::ArmObs => self.arm_obs,
            LatencyComponent::GantryObs => self.gantry_obs,
            LatencyComponent::ArmAction => self.arm_action,
            LatencyComponent::GantryAction => self.gantry_action,
        }
    }

    /// Scaled distribution for a component in seconds.
    pub fn scaled_seconds(&self, c: LatencyComponent) -> (f64, f64) {
        let d = self.component(c);
        (d.mean_ms * self.scale * 1e-3, d.std_ms * self.scale.sqrt() * 1e-3)
    }

    /// Draw the per-episode latency values, clamped at zero.
    pub fn sample_episode<R: Rng>(&self, rng: &mut R) -> EpisodeLatencies {
        let mut draw = |c: LatencyComponent| {
            let (mean, std) = self.scaled_seconds(c);
            if std <= 0.0 {
                return mean.max(0.0);
            }
            let n = Normal::new(mean, std).expect("finite latency parameters");
            n.sample(rng).max(0.0)
        };
        EpisodeLatencies {
            ball_obs: draw(LatencyComponent::BallObs),
            arm_obs: draw(LatencyComponent::ArmObs),
            gantry_obs: draw(LatencyComponent::GantryObs),
            arm_action: draw(LatencyComponent::ArmAction),
            gantry_action: draw(LatencyComponent::GantryAction),
        }
    }
}

/// Latency values (seconds) held fixed for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLatencies {
    pub ball_obs: f64,
    pub arm_obs: f64,
    pub gantry_obs: f64,
    pub arm_action: f64,
    pub gantry_action: f64,
}

impl EpisodeLatencies {
    pub fn zero() -> Self {
        Self { ball_obs: 0.0, arm_obs: 0.0, gantry_obs: 0.0, arm_action: 0.0, gantry_action: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_scale_gives_zero_latency() {
        let model = LatencyModel::zero();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lat = model.sample_episode(&mut rng);
        assert_eq!(lat, EpisodeLatencies::zero());
    }

    #[test]
    fn half_scale_matches_published_grid() {
        let model = LatencyModel::with_scale(0.5);
        let (mean, std) = model.scaled_seconds(LatencyComponent::BallObs);
        assert_abs_diff_eq!(mean, 0.020, epsilon = 1e-12);
        assert_abs_diff_eq!(std, 0.0058, epsilon = 1e-4);
    }

    #[test]
    fn sample_mean_converges_to_component_mean() {
        let model = LatencyModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mean = (0..n).map(|_| model.sample_episode(&mut rng).ball_obs).sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean, 0.040, epsilon = 1e-4);
    }

    #[test]
    fn draws_never_negative() {
        // Large sigma relative to mean forces the clamp path.
        let model = LatencyModel {
            ball_obs: LatencyDist { mean_ms: 1.0, std_ms: 30.0 },
            ..LatencyModel::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            assert!(model.sample_episode(&mut rng).ball_obs >= 0.0);
        }
    }
}
