//! Per-step episode log records, serialized as JSON lines.

use super::state_machine::{GameEvent, Outcome};
use super::DoneReason;
use serde::{Deserialize, Serialize};

pub const LOG_VERSION: u32 = 1;

/// One environment step. Every field is a deterministic function of
/// `(config, seed)`: identical runs serialize to identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Log schema version.
    pub v: u32,
    pub episode_seed: u64,
    pub step: u32,
    /// Simulated clock (s).
    pub t: f64,
    pub sm_state: String,
    pub events: Vec<GameEvent>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub reward_components: Vec<(String, f64)>,
    pub ball_position: [f64; 3],
    pub joint_positions: Vec<f64>,
    pub paddle_position: [f64; 3],
    pub done: bool,
    pub outcome: Option<Outcome>,
    pub done_reason: Option<DoneReason>,
    /// Simulated-clock latency trace: (stage, time or age in seconds).
    pub stages: Vec<(String, f64)>,
}
