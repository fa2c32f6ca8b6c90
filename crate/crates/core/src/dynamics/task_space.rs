//! Task-space control: 5-DOF paddle pose commands (position + surface normal
//! as roll/yaw) mapped to joint velocities with damped least squares.

use super::chain::{JointVec, KinematicChain, PaddlePose, DOF};
use crate::Vec3;
use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

type Vec5 = SVector<f64, 5>;

/// Gains and the paddle bounding cube for task-space control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskSpaceParams {
    pub cube_min: [f64; 3],
    pub cube_max: [f64; 3],
    /// Damped-least-squares damping.
    pub lambda: f64,
    /// Proportional gain (1/s) on the pose error.
    pub kp: f64,
}

impl Default for TaskSpaceParams {
    fn default() -> Self {
        Self {
            cube_min: [-0.9, -2.3, 0.05],
            cube_max: [0.9, -1.1, 0.95],
            lambda: 0.01,
            kp: 10.0,
        }
    }
}

impl TaskSpaceParams {
    pub fn clamp_position(&self, p: &Vec3) -> (Vec3, bool) {
        let mut out = *p;
        let mut clamped = false;
        for axis in 0..3 {
            let c = out[axis].clamp(self.cube_min[axis], self.cube_max[axis]);
            if c != out[axis] {
                clamped = true;
                out[axis] = c;
            }
        }
        (out, clamped)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.cube_min[a] - 1e-12 && p[a] <= self.cube_max[a] + 1e-12)
    }
}

/// Joint-velocity command produced by the task-space controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskCommand {
    pub joint_velocities: JointVec,
    /// Set when the requested target was outside the bounding cube and
    /// had to be clamped onto it.
    pub clamped: bool,
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a;
    while x > std::f64::consts::PI {
        x -= 2.0 * std::f64::consts::PI;
    }
    while x < -std::f64::consts::PI {
        x += 2.0 * std::f64::consts::PI;
    }
    x
}

/// Pose error `target - current` as (dx, dy, dz, droll, dyaw).
pub fn pose_error(current: &PaddlePose, target: &PaddlePose) -> Vec5 {
    Vec5::new(
        target.position.x - current.position.x,
        target.position.y - current.position.y,
        target.position.z - current.position.z,
        wrap_angle(target.roll - current.roll),
        wrap_angle(target.yaw - current.yaw),
    )
}

/// Damped-least-squares joint velocities driving the paddle toward `target`:
/// `qdot = J^T (J J^T + lambda^2 I)^-1 (kp * error)`, clipped to per-joint
/// velocity limits. Targets outside the bounding cube are clamped onto it and
/// flagged.
pub fn task_space_command(
    chain: &KinematicChain,
    q: &JointVec,
    target: &PaddlePose,
    params: &TaskSpaceParams,
) -> TaskCommand {
    let (clamped_pos, clamped) = params.clamp_position(&target.position);
    let target = PaddlePose { position: clamped_pos, ..*target };
    let current = chain.fk_unchecked(q);
    let err = pose_error(&current, &target) * params.kp;

    let jac = chain.jacobian_task(q);
    let mut gram: SMatrix<f64, 5, 5> = &jac * jac.transpose();
    for i in 0..5 {
        gram[(i, i)] += params.lambda * params.lambda;
    }
    let y = gram
        .cholesky()
        .map(|c| c.solve(&err))
        .unwrap_or_else(|| gram.lu().solve(&err).unwrap_or_else(Vec5::zeros));
    let mut qdot = jac.transpose() * y;

    let limits = chain.velocity_limits();
    for i in 0..DOF {
        qdot[i] = qdot[i].clamp(-limits[i], limits[i]);
    }
    TaskCommand { joint_velocities: qdot, clamped }
}
