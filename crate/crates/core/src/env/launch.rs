//! Ball launch sampling.
//!
//! Initial conditions are drawn uniformly per axis from a parameterized box,
//! then rejection-sampled so that a robot-free ballistic rollout of the draw
//! first bounces inside the configured landing bounds.

use crate::dynamics::{step_ball_flight, BallPhysicalParams, BallState, SurfaceParams};
use crate::Vec3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const MAX_ATTEMPTS: usize = 100;

/// Per-axis bounds for initial velocity and position, plus the landing box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BallDistribution {
    pub velocity_min: [f64; 3],
    pub velocity_max: [f64; 3],
    pub position_min: [f64; 3],
    pub position_max: [f64; 3],
    pub landing_x: [f64; 2],
    pub landing_y: [f64; 2],
}

impl Default for BallDistribution {
    fn default() -> Self {
        Self::baseline()
    }
}

impl BallDistribution {
    /// The stock thrower distribution.
    pub fn baseline() -> Self {
        Self {
            velocity_min: [-0.44, -7.25, -0.24],
            velocity_max: [0.44, -6.47, 0.46],
            position_min: [0.30, 1.47, 0.55],
            position_max: [0.41, 1.94, 0.61],
            landing_x: [0.18, 0.42],
            landing_y: [-0.73, -0.37],
        }
    }

    /// 25% larger than baseline.
    pub fn medium() -> Self {
        Self {
            velocity_min: [-0.55, -7.45, -0.42],
            velocity_max: [0.55, -6.27, 0.63],
            position_min: [0.28, 1.35, 0.54],
            position_max: [0.43, 2.05, 0.63],
            landing_x: [0.12, 0.48],
            landing_y: [-0.82, -0.28],
        }
    }

    /// 100% larger than baseline.
    pub fn wide() -> Self {
        Self {
            velocity_min: [-0.87, -8.04, -0.95],
            velocity_max: [0.87, -5.68, 1.16],
            position_min: [0.20, 1.00, 0.50],
            position_max: [0.51, 2.40, 0.67],
            landing_x: [-0.26, 0.66],
            landing_y: [-1.09, 0.0],
        }
    }

    /// Nearly repeatable throws.
    pub fn tiny() -> Self {
        Self {
            velocity_min: [-0.05, -6.90, 0.41],
            velocity_max: [0.05, -6.80, 0.42],
            position_min: [0.30, 1.78, 0.57],
            position_max: [0.31, 1.79, 0.58],
            landing_x: [0.18, 0.42],
            landing_y: [-0.73, -0.37],
        }
    }

    /// A different physical thrower; larger and offset from baseline.
    pub fn thrower2() -> Self {
        Self {
            velocity_min: [-0.9, -9.4, -1.2],
            velocity_max: [0.9, -5.0, 1.5],
            position_min: [0.15, 1.01, 0.25],
            position_max: [0.55, 1.57, 0.64],
            landing_x: [0.18, 0.62],
            landing_y: [-1.26, -0.33],
        }
    }

    /// Baseline shifted so the y-velocity range is disjoint from baseline's.
    pub fn velocity_offset() -> Self {
        Self {
            velocity_min: [-0.44, -6.33, -0.24],
            velocity_max: [0.44, -5.55, 0.46],
            ..Self::baseline()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "baseline" => Self::baseline(),
            "medium" => Self::medium(),
            "wide" => Self::wide(),
            "tiny" => Self::tiny(),
            "thrower2" => Self::thrower2(),
            "velocity_offset" => Self::velocity_offset(),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), LaunchError> {
        for axis in 0..3 {
            if self.velocity_min[axis] > self.velocity_max[axis]
                || self.position_min[axis] > self.position_max[axis]
            {
                return Err(LaunchError::InvalidBounds);
            }
        }
        if self.landing_x[0] > self.landing_x[1] || self.landing_y[0] > self.landing_y[1] {
            return Err(LaunchError::InvalidBounds);
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LaunchError {
    #[error("distribution bounds have min > max")]
    InvalidBounds,
    #[error("infeasible distribution: no draw landed in bounds after {MAX_ATTEMPTS} attempts")]
    InfeasibleDistribution,
}

fn draw_axis<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// First table-plane crossing of a robot-free ballistic rollout, if any.
pub fn robot_free_landing(
    launch: &BallState,
    ball: &BallPhysicalParams,
    surface: &SurfaceParams,
) -> Option<(f64, Vec3)> {
    let mut s = *launch;
    let h = 1e-3;
    for _ in 0..4000 {
        let next = step_ball_flight(&s, ball, h).ok()?;
        if s.position.z > 0.0 && next.position.z <= 0.0 && next.velocity.z < 0.0 {
            let f = (s.position.z / (s.position.z - next.position.z)).clamp(0.0, 1.0);
            let pos = s.position + (next.position - s.position) * f;
            if pos.x.abs() <= surface.table_half_width && pos.y.abs() <= surface.table_half_length {
                return Some((s.time + f * h, pos));
            }
            return None;
        }
        if next.position.z < surface.floor_z() {
            return None;
        }
        s = next;
    }
    None
}

/// Draw a launch whose robot-free rollout lands inside the landing bounds.
pub fn sample_launch<R: Rng>(
    dist: &BallDistribution,
    ball: &BallPhysicalParams,
    surface: &SurfaceParams,
    rng: &mut R,
) -> Result<BallState, LaunchError> {
    dist.validate()?;
    for _ in 0..MAX_ATTEMPTS {
        let position = Vec3::new(
            draw_axis(rng, dist.position_min[0], dist.position_max[0]),
            draw_axis(rng, dist.position_min[1], dist.position_max[1]),
            draw_axis(rng, dist.position_min[2], dist.position_max[2]),
        );
        let velocity = Vec3::new(
            draw_axis(rng, dist.velocity_min[0], dist.velocity_max[0]),
            draw_axis(rng, dist.velocity_min[1], dist.velocity_max[1]),
            draw_axis(rng, dist.velocity_min[2], dist.velocity_max[2]),
        );
        let state = BallState { position, velocity, angular_velocity: Vec3::zeros(), time: 0.0 };
        if let Some((_, land)) = robot_free_landing(&state, ball, surface) {
            if land.x >= dist.landing_x[0]
                && land.x <= dist.landing_x[1]
                && land.y >= dist.landing_y[0]
                && land.y <= dist.landing_y[1]
            {
                return Ok(state);
            }
        }
    }
    Err(LaunchError::InfeasibleDistribution)
}
