//! Rollout tasks the trainer optimizes.

use super::norm::RunningNorm;
use super::policy::{Architecture, PolicySpec};
use crate::env::{Env, EnvConfig, EnvError, OBS_HISTORY};
use nalgebra::DVector;

/// Anything the ES trainer can optimize: a parameter vector is rolled out for
/// one episode under a seed and yields a return.
pub trait RolloutTask: Send + Sync {
    /// Dimension of the parameter vector.
    fn dim(&self) -> usize;
    /// Observation dimension; zero disables state normalization.
    fn obs_dim(&self) -> usize;
    /// One training episode. When `stats` is given, raw observations are
    /// accumulated into it for the normalization update.
    fn rollout(
        &self,
        theta: &[f64],
        norm: &RunningNorm,
        seed: u64,
        stats: Option<&mut RunningNorm>,
    ) -> f64;
    /// One evaluation-protocol episode (reward shaping disabled where the
    /// task distinguishes the two); normalization statistics stay frozen.
    fn eval_rollout(&self, theta: &[f64], norm: &RunningNorm, seed: u64) -> f64 {
        self.rollout(theta, norm, seed, None)
    }
}

/// The table-tennis environment as a rollout task.
pub struct TableTennisTask {
    train_env: Env,
    eval_env: Env,
    spec: PolicySpec,
}

impl TableTennisTask {
    pub fn new(cfg: &EnvConfig, architecture: Architecture) -> Result<Self, EnvError> {
        let train_env = Env::new(cfg.clone())?;
        let eval_env = Env::new(cfg.evaluation_variant())?;
        let (lo, hi) = train_env.action_bounds();
        let spec = PolicySpec {
            architecture,
            per_step: cfg.per_step_obs_dim(),
            history: OBS_HISTORY,
            action_dim: cfg.action_dim(),
            action_lo: lo,
            action_hi: hi,
        };
        Ok(Self { train_env, eval_env, spec })
    }

    pub fn policy_spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn env_config(&self) -> &EnvConfig {
        self.train_env.config()
    }

    /// Maximum achievable shaped return of the training reward spec.
    pub fn max_training_return(&self) -> f64 {
        self.train_env.config().rewards.max_possible_return()
    }

    fn run(&self, env: &Env, theta: &[f64], norm: &RunningNorm, seed: u64, mut stats: Option<&mut RunningNorm>) -> f64 {
        let mut env = env.clone();
        let mut obs = match env.reset_with_seed(seed) {
            Ok(o) => o,
            Err(_) => return f64::NEG_INFINITY,
        };
        let mut total = 0.0;
        let mut scratch = vec![0.0; obs.data.len()];
        loop {
            if let Some(st) = stats.as_deref_mut() {
                st.push(&obs.data);
            }
            norm.normalize_into(&obs.data, &mut scratch);
            let action = self.spec.act(theta, &scratch);
            match env.step(&action) {
                Ok(r) => {
                    total += r.reward;
                    obs = r.observation;
                    if r.done {
                        break;
                    }
                }
                Err(_) => break,
            }
        }
        total
    }
}

impl RolloutTask for TableTennisTask {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn obs_dim(&self) -> usize {
        self.spec.obs_dim()
    }

    fn rollout(&self, theta: &[f64], norm: &RunningNorm, seed: u64, stats: Option<&mut RunningNorm>) -> f64 {
        self.run(&self.train_env, theta, norm, seed, stats)
    }

    fn eval_rollout(&self, theta: &[f64], norm: &RunningNorm, seed: u64) -> f64 {
        self.run(&self.eval_env, theta, norm, seed, None)
    }
}

/// Deterministic quadratic bandit `f(theta) = -|theta - target|^2`; the
/// standard smoke test for ES machinery.
#[derive(Debug, Clone)]
pub struct QuadraticBandit {
    pub target: DVector<f64>,
}

impl QuadraticBandit {
    pub fn new(target: DVector<f64>) -> Self {
        Self { target }
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        -theta
            .iter()
            .zip(self.target.iter())
            .map(|(t, g)| (t - g) * (t - g))
            .sum::<f64>()
    }
}

impl RolloutTask for QuadraticBandit {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn obs_dim(&self) -> usize {
        0
    }

    fn rollout(&self, theta: &[f64], _norm: &RunningNorm, _seed: u64, _stats: Option<&mut RunningNorm>) -> f64 {
        self.value(theta)
    }
}
