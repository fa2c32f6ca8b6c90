//! Environment configuration.

use super::launch::BallDistribution;
use super::rewards::RewardSpec;
use super::state_machine::StateMachineSpec;
use crate::dynamics::{default_chain, BallPhysicalParams, KinematicChain, SurfaceParams, TaskSpaceParams};
use crate::fidelity::{LatencyModel, NoiseModel, RandomizationSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Eight joint velocities.
    JointVelocity,
    /// Absolute 5-DOF paddle pose target (x, y, z, roll, yaw).
    TaskPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    /// Joint positions (8) + ball position (3) per step.
    Joint,
    /// Paddle pose (5) + ball position (3) per step.
    Task,
}

/// Sim-fidelity settings grouped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FidelityConfig {
    pub latency: LatencyModel,
    pub noise: NoiseModel,
    pub randomization: RandomizationSpec,
}

/// Episode termination settings beyond the state machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DoneSpec {
    pub play_volume_min: [f64; 3],
    pub play_volume_max: [f64; 3],
}

impl Default for DoneSpec {
    fn default() -> Self {
        Self { play_volume_min: [-3.0, -3.2, -0.9], play_volume_max: [3.0, 3.0, 3.0] }
    }
}

/// Complete declarative description of one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub control_hz: u32,
    pub max_episode_steps: u32,
    pub action_mode: ActionMode,
    /// Defaults to the mode matching `action_mode`.
    pub observation_mode: Option<ObservationMode>,
    pub ball: BallPhysicalParams,
    pub surface: SurfaceParams,
    pub chain: KinematicChain,
    pub distribution: BallDistribution,
    pub state_machine: StateMachineSpec,
    pub rewards: RewardSpec,
    pub dones: DoneSpec,
    pub fidelity: FidelityConfig,
    pub task_space: TaskSpaceParams,
    /// Half-width of the uniform home-pose perturbation at reset (rad or m).
    pub home_perturbation: f64,
    /// Bounds on the roll component of task actions (rad).
    pub task_roll_range: [f64; 2],
    /// Bounds on the yaw component of task actions (rad).
    pub task_yaw_range: [f64; 2],
    /// When false the ball is parked away from play and never launched.
    pub launch_enabled: bool,
    /// y-plane behind which the paddle counts as hitting the stand.
    pub stand_y: f64,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            control_hz: 100,
            max_episode_steps: 200,
            action_mode: ActionMode::JointVelocity,
            observation_mode: None,
            ball: BallPhysicalParams::default(),
            surface: SurfaceParams::default(),
            chain: default_chain(),
            distribution: BallDistribution::baseline(),
            state_machine: StateMachineSpec::ball_return(),
            rewards: RewardSpec::default(),
            dones: DoneSpec::default(),
            fidelity: FidelityConfig::default(),
            task_space: TaskSpaceParams::default(),
            home_perturbation: 0.01,
            task_roll_range: [-1.2, 1.2],
            task_yaw_range: [-1.2, 1.2],
            launch_enabled: true,
            stand_y: -2.45,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("control_hz {0} outside 20..=100")]
    ControlHz(u32),
    #[error("max_episode_steps must be >= 1")]
    MaxSteps,
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    StateMachine(#[from] super::state_machine::StateMachineError),
    #[error(transparent)]
    Reward(#[from] super::rewards::RewardError),
    #[error(transparent)]
    Launch(#[from] super::launch::LaunchError),
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(20..=100).contains(&self.control_hz) {
            return Err(ConfigError::ControlHz(self.control_hz));
        }
        if self.max_episode_steps == 0 {
            return Err(ConfigError::MaxSteps);
        }
        self.ball.validate()?;
        self.surface.validate()?;
        self.chain.validate()?;
        self.distribution.validate()?;
        super::state_machine::StateMachine::compile(&self.state_machine)?;
        super::rewards::RewardManager::new(&self.rewards)?;
        Ok(())
    }

    pub fn observation_mode(&self) -> ObservationMode {
        self.observation_mode.unwrap_or(match self.action_mode {
            ActionMode::JointVelocity => ObservationMode::Joint,
            ActionMode::TaskPosition => ObservationMode::Task,
        })
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.control_hz as f64
    }

    pub fn action_dim(&self) -> usize {
        match self.action_mode {
            ActionMode::JointVelocity => crate::dynamics::DOF,
            ActionMode::TaskPosition => 5,
        }
    }

    pub fn per_step_obs_dim(&self) -> usize {
        match self.observation_mode() {
            ObservationMode::Joint => crate::dynamics::DOF + 3,
            ObservationMode::Task => 5 + 3,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.per_step_obs_dim() * super::OBS_HISTORY
    }

    /// Same environment with the evaluation reward (hit + land, max 2.0).
    pub fn evaluation_variant(&self) -> Self {
        Self { rewards: RewardSpec::evaluation(), ..self.clone() }
    }
}
