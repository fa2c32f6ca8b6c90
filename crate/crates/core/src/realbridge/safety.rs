//! Predictive command safety filter.
//!
//! Velocity commands are capped so the position predicted over a lookahead
//! window never exceeds a joint limit, then the resulting paddle motion is
//! projected to keep the paddle inside its bounding region and above the
//! table plane. The filter converts every velocity action into the
//! position-plus-velocity pair the robot interface expects.

use crate::dynamics::{JointState, JointVec, KinematicChain, DOF};
use crate::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SafetyLimits {
    pub cube_min: [f64; 3],
    pub cube_max: [f64; 3],
    /// Paddle center must stay at or above this z (the table plane).
    pub min_paddle_height: f64,
    /// Prediction window (s).
    pub lookahead: f64,
    /// Soft margin inside the cube faces the predictive cap aims for,
    /// absorbing the curvature of revolute motion between control steps.
    pub margin: f64,
}

impl Default for SafetyLimits {
    fn default() -> Self {
        Self {
            cube_min: [-0.9, -2.3, 0.0],
            cube_max: [0.9, -1.1, 0.95],
            min_paddle_height: 0.0,
            lookahead: 0.25,
            margin: 1e-3,
        }
    }
}

impl SafetyLimits {
    fn effective_min(&self) -> [f64; 3] {
        let mut lo = self.cube_min;
        lo[2] = lo[2].max(self.min_paddle_height);
        lo
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let lo = self.effective_min();
        (0..3).all(|a| p[a] >= lo[a] - 1e-9 && p[a] <= self.cube_max[a] + 1e-9)
    }
}

/// The filtered command: integrated position target plus capped velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeCommand {
    pub position_target: JointVec,
    pub velocity: JointVec,
    /// Any component of the request was altered.
    pub modified: bool,
}

/// Filter one velocity command.
///
/// `dt` is the control period the returned position target integrates over.
pub fn filter_command_safety(
    chain: &KinematicChain,
    state: &JointState,
    commanded_velocity: &JointVec,
    limits: &SafetyLimits,
    dt: f64,
) -> SafeCommand {
    let q = state.positions;
    let mut v = *commanded_velocity;
    let mut modified = false;
    let look = limits.lookahead.max(1e-6);

    // Per-joint caps: rate limits, then the lookahead position rule. A joint
    // already outside its range may only move back toward it.
    let vel_lim = chain.velocity_limits();
    for j in 0..DOF {
        let clamped = v[j].clamp(-vel_lim[j], vel_lim[j]);
        if clamped != v[j] {
            modified = true;
        }
        v[j] = clamped;
        let (lo, hi) = chain.joints[j].position_limits;
        if q[j] > hi {
            if v[j] > 0.0 {
                v[j] = 0.0;
                modified = true;
            }
            continue;
        }
        if q[j] < lo {
            if v[j] < 0.0 {
                v[j] = 0.0;
                modified = true;
            }
            continue;
        }
        let predicted = q[j] + v[j] * look;
        if predicted > hi {
            v[j] = (hi - q[j]) / look;
            modified = true;
        } else if predicted < lo {
            v[j] = (lo - q[j]) / look;
            modified = true;
        }
    }

    // Paddle constraint: cap the predicted paddle motion face by face, then
    // map the velocity correction back to joint space through the Jacobian.
    let pose = chain.fk_unchecked(&q);
    let jac = chain.jacobian_position_normal(&q);
    let j_pos = jac.fixed_rows::<3>(0);
    let u: Vec3 = j_pos * v;
    let lo = limits.effective_min();
    let hi = limits.cube_max;
    let mut u_target = u;
    let m = limits.margin.max(0.0);
    for a in 0..3 {
        let p = pose.position[a];
        let (soft_lo, soft_hi) = (lo[a] + m, hi[a] - m);
        if p > hi[a] + 1e-9 {
            u_target[a] = u_target[a].min(0.0);
        } else if p < lo[a] - 1e-9 {
            u_target[a] = u_target[a].max(0.0);
        } else {
            let predicted = p + u_target[a] * look;
            if predicted > soft_hi {
                u_target[a] = (soft_hi - p) / look;
            } else if predicted < soft_lo {
                u_target[a] = (soft_lo - p) / look;
            }
        }
    }
    if (u_target - u).norm() > 1e-12 {
        modified = true;
        // Damped least-squares correction toward the capped paddle velocity.
        let gram = j_pos * j_pos.transpose() + nalgebra::Matrix3::identity() * 1e-4;
        if let Some(sol) = gram.lu().solve(&(u_target - u)) {
            v += j_pos.transpose() * sol;
        } else {
            v = JointVec::zeros();
        }
        for j in 0..DOF {
            v[j] = v[j].clamp(-vel_lim[j], vel_lim[j]);
        }
    }

    // Verification: the actual (nonlinear) step must stay safe; back off
    // geometrically and finally stop if it does not.
    let start_inside = limits.contains(&pose.position);
    for _ in 0..8 {
        let q_next = q + v * dt;
        let next = chain.fk_unchecked(&chain.clamp_to_limits(&q_next)).position;
        let ok = if start_inside {
            limits.contains(&next)
        } else {
            distance_outside(&next, limits) <= distance_outside(&pose.position, limits) + 1e-12
        };
        if ok {
            break;
        }
        modified = true;
        v *= 0.5;
        if v.norm() < 1e-9 {
            v = JointVec::zeros();
            break;
        }
    }
    // The zero command is always safe; enforce it as the final fallback.
    {
        let q_next = chain.clamp_to_limits(&(q + v * dt));
        let next = chain.fk_unchecked(&q_next).position;
        let ok = if start_inside {
            limits.contains(&next)
        } else {
            distance_outside(&next, limits) <= distance_outside(&pose.position, limits) + 1e-12
        };
        if !ok {
            v = JointVec::zeros();
            modified = true;
        }
    }

    let position_target = chain.clamp_to_limits(&(q + v * dt));
    SafeCommand { position_target, velocity: v, modified }
}

fn distance_outside(p: &Vec3, limits: &SafetyLimits) -> f64 {
    let lo = limits.effective_min();
    let hi = limits.cube_max;
    let mut d = 0.0f64;
    for a in 0..3 {
        if p[a] > hi[a] {
            d += p[a] - hi[a];
        } else if p[a] < lo[a] {
            d += lo[a] - p[a];
        }
    }
    d
}
