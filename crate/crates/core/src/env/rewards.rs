//! Configurable reward components.
//!
//! Reward terms and their weights are listed by name in the config; the
//! manager computes and sums each component per step and reports the
//! per-component breakdown. Smoothness terms (velocity/acceleration/jerk,
//! joint angle) are fractions of non-violating `(timestep, joint)` points and
//! are granted on the terminal step; hit/land are granted at most once per
//! episode.

use super::state_machine::EventKind;
use crate::dynamics::{JointVec, DOF};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub name: String,
    pub weight: f64,
}

/// Reward configuration: weighted components plus the limit tables the
/// smoothness terms check against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardSpec {
    pub components: Vec<ComponentSpec>,
    /// Per-joint velocity limits for the velocity penalty. Seven entries,
    /// applied to joints 2..=8; the first gantry joint is unlimited.
    pub velocity_limits: Vec<f64>,
    /// Per-joint acceleration limits, eight entries.
    pub acceleration_limits: Vec<f64>,
    /// Per-joint jerk limits, eight entries.
    pub jerk_limits: Vec<f64>,
    /// Buffer inside the position limits for the joint-angle term (rad or m).
    pub joint_angle_buffer: f64,
    /// Base arm joint index and threshold for the rotate-backwards penalty.
    pub base_joint_index: usize,
    pub base_rotate_threshold: f64,
    /// Minimum paddle-center height above the table (m).
    pub paddle_min_height: f64,
    /// Distance scale (m) of the near-net bonus on failed returns.
    pub near_net_scale: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self {
            components: vec![
                ComponentSpec { name: "hit_ball".into(), weight: 1.0 },
                ComponentSpec { name: "land_ball".into(), weight: 1.0 },
                ComponentSpec { name: "velocity_penalty".into(), weight: 0.4 },
                ComponentSpec { name: "acceleration_penalty".into(), weight: 0.3 },
                ComponentSpec { name: "jerk_penalty".into(), weight: 0.3 },
                ComponentSpec { name: "joint_angle".into(), weight: 1.0 },
                ComponentSpec { name: "bad_collision".into(), weight: 1.0 },
                ComponentSpec { name: "base_rotate_backwards".into(), weight: 1.0 },
                ComponentSpec { name: "paddle_height".into(), weight: 1.0 },
            ],
            velocity_limits: vec![1.0, 2.0, 4.5, 4.5, 7.6, 10.7, 14.5],
            acceleration_limits: vec![0.2, 0.2, 1.0, 1.0, 1.0, 1.5, 2.5, 3.0],
            jerk_limits: vec![0.92, 0.92, 1.76, 0.9, 0.95, 0.65, 1.5, 1.0],
            joint_angle_buffer: 0.05,
            base_joint_index: 2,
            base_rotate_threshold: -2.0,
            paddle_min_height: 0.125,
            near_net_scale: 2.0,
        }
    }
}

impl RewardSpec {
    /// Hit and land only; the evaluation protocol (maximum return 2.0).
    pub fn evaluation() -> Self {
        Self {
            components: vec![
                ComponentSpec { name: "hit_ball".into(), weight: 1.0 },
                ComponentSpec { name: "land_ball".into(), weight: 1.0 },
            ],
            ..Self::default()
        }
    }

    /// Largest achievable episode return: the sum of the positive-component
    /// weights (penalty terms contribute at most zero, and the near-net bonus
    /// is only paid on failed returns).
    pub fn max_possible_return(&self) -> f64 {
        self.components
            .iter()
            .filter(|c| {
                matches!(
                    c.name.as_str(),
                    "hit_ball"
                        | "land_ball"
                        | "velocity_penalty"
                        | "acceleration_penalty"
                        | "jerk_penalty"
                        | "joint_angle"
                )
            })
            .map(|c| c.weight)
            .sum()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("unknown reward component `{0}`")]
    UnknownComponent(String),
    #[error("reward weight for `{0}` is not finite")]
    NonFiniteWeight(String),
    #[error("duplicate reward component `{0}`")]
    DuplicateComponent(String),
    #[error("{0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    HitBall,
    LandBall,
    VelocityPenalty,
    AccelerationPenalty,
    JerkPenalty,
    JointAngle,
    BadCollision,
    BaseRotateBackwards,
    PaddleHeight,
    NearNetBonus,
}

fn kind_of(name: &str) -> Option<Kind> {
    Some(match name {
        "hit_ball" => Kind::HitBall,
        "land_ball" => Kind::LandBall,
        "velocity_penalty" => Kind::VelocityPenalty,
        "acceleration_penalty" => Kind::AccelerationPenalty,
        "jerk_penalty" => Kind::JerkPenalty,
        "joint_angle" => Kind::JointAngle,
        "bad_collision" => Kind::BadCollision,
        "base_rotate_backwards" => Kind::BaseRotateBackwards,
        "paddle_height" => Kind::PaddleHeight,
        "near_net_bonus" => Kind::NearNetBonus,
        _ => return None,
    })
}

/// Violation tallies over `(timestep, joint)` points, maintained by the
/// environment and consumed by the smoothness terms at episode end.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationCounters {
    pub velocity_points: u64,
    pub velocity_total: u64,
    pub acceleration_points: u64,
    pub acceleration_total: u64,
    pub jerk_points: u64,
    pub jerk_total: u64,
    pub angle_points: u64,
    pub angle_total: u64,
}

impl ViolationCounters {
    fn fraction_ok(points: u64, total: u64) -> f64 {
        if total == 0 {
            1.0
        } else {
            1.0 - points as f64 / total as f64
        }
    }
}

/// Per-step facts the reward components look at.
#[derive(Debug, Clone)]
pub struct StepContext<'a> {
    pub events: &'a [super::state_machine::GameEvent],
    /// Paddle made first contact with the ball this step.
    pub hit_event: bool,
    /// The return landed on the opponent side this step.
    pub land_event: bool,
    pub joint_positions: &'a JointVec,
    pub paddle_height: f64,
    pub terminal: bool,
    pub violations: &'a ViolationCounters,
    /// Whether the paddle hit the ball at any point this episode.
    pub hit_occurred: bool,
    /// Whether the return landed at any point this episode.
    pub land_occurred: bool,
    /// Closest approach of the ball to the net plane after the hit (m).
    pub min_net_distance_after_hit: f64,
}

/// Runtime reward manager holding the per-episode component state.
#[derive(Debug, Clone)]
pub struct RewardManager {
    spec: RewardSpec,
    compiled: Vec<(String, Kind, f64)>,
    hit_granted: bool,
    land_granted: bool,
    net_bonus_granted: bool,
}

impl RewardManager {
    pub fn new(spec: &RewardSpec) -> Result<Self, RewardError> {
        let mut compiled = Vec::with_capacity(spec.components.len());
        let mut seen = std::collections::HashSet::new();
        for c in &spec.components {
            let kind = kind_of(&c.name).ok_or_else(|| RewardError::UnknownComponent(c.name.clone()))?;
            if !c.weight.is_finite() {
                return Err(RewardError::NonFiniteWeight(c.name.clone()));
            }
            if !seen.insert(c.name.clone()) {
                return Err(RewardError::DuplicateComponent(c.name.clone()));
            }
            compiled.push((c.name.clone(), kind, c.weight));
        }
        if spec.velocity_limits.len() != DOF - 1 {
            return Err(RewardError::InvalidSpec(format!(
                "velocity limit list must have {} entries",
                DOF - 1
            )));
        }
        if spec.acceleration_limits.len() != DOF || spec.jerk_limits.len() != DOF {
            return Err(RewardError::InvalidSpec(format!(
                "acceleration/jerk limit lists must have {DOF} entries"
            )));
        }
        Ok(Self { spec: spec.clone(), compiled, hit_granted: false, land_granted: false, net_bonus_granted: false })
    }

    pub fn spec(&self) -> &RewardSpec {
        &self.spec
    }

    pub fn reset(&mut self) {
        self.hit_granted = false;
        self.land_granted = false;
        self.net_bonus_granted = false;
    }

    /// Weighted per-step reward plus the per-component breakdown.
    pub fn step(&mut self, ctx: &StepContext) -> (f64, Vec<(String, f64)>) {
        let mut breakdown = Vec::with_capacity(self.compiled.len());
        for (name, kind, weight) in &self.compiled {
            let raw = match kind {
                Kind::HitBall => {
                    if ctx.hit_event && !self.hit_granted {
                        self.hit_granted = true;
                        1.0
                    } else {
                        0.0
                    }
                }
                Kind::LandBall => {
                    if ctx.land_event && !self.land_granted {
                        self.land_granted = true;
                        1.0
                    } else {
                        0.0
                    }
                }
                Kind::VelocityPenalty => {
                    if ctx.terminal {
                        ViolationCounters::fraction_ok(
                            ctx.violations.velocity_points,
                            ctx.violations.velocity_total,
                        )
                    } else {
                        0.0
                    }
                }
                Kind::AccelerationPenalty => {
                    if ctx.terminal {
                        ViolationCounters::fraction_ok(
                            ctx.violations.acceleration_points,
                            ctx.violations.acceleration_total,
                        )
                    } else {
                        0.0
                    }
                }
                Kind::JerkPenalty => {
                    if ctx.terminal {
                        ViolationCounters::fraction_ok(ctx.violations.jerk_points, ctx.violations.jerk_total)
                    } else {
                        0.0
                    }
                }
                Kind::JointAngle => {
                    if ctx.terminal {
                        ViolationCounters::fraction_ok(ctx.violations.angle_points, ctx.violations.angle_total)
                    } else {
                        0.0
                    }
                }
                Kind::BadCollision => {
                    let collided = ctx
                        .events
                        .iter()
                        .any(|e| matches!(e.kind, EventKind::Table | EventKind::Stand));
                    if collided {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Kind::BaseRotateBackwards => {
                    if ctx.joint_positions[self.spec.base_joint_index] < self.spec.base_rotate_threshold {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Kind::PaddleHeight => {
                    if ctx.paddle_height < self.spec.paddle_min_height {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Kind::NearNetBonus => {
                    if ctx.terminal
                        && ctx.hit_occurred
                        && !ctx.land_occurred
                        && !self.net_bonus_granted
                        && ctx.min_net_distance_after_hit.is_finite()
                    {
                        self.net_bonus_granted = true;
                        (1.0 - ctx.min_net_distance_after_hit / self.spec.near_net_scale).max(0.0)
                    } else {
                        0.0
                    }
                }
            };
            breakdown.push((name.clone(), weight * raw));
        }
        let total = breakdown.iter().map(|(_, v)| v).sum();
        (total, breakdown)
    }
}
