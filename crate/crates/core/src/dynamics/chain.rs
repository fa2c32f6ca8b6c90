//! 8-DOF kinematic robot: two prismatic gantry axes carrying a six-revolute
//! arm. The robot is purely kinematic; policies command joint velocities and
//! the environment rate-limits them with per-joint acceleration caps.

use super::DynamicsError;
use crate::Vec3;
use nalgebra::{Isometry3, SMatrix, SVector, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};

/// Degrees of freedom of the robot.
pub const DOF: usize = 8;

pub type JointVec = SVector<f64, DOF>;
type Mat6x8 = SMatrix<f64, 6, DOF>;
type Mat5x8 = SMatrix<f64, 5, DOF>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Prismatic,
    Revolute,
}

/// One joint: a fixed rigid transform from the parent frame followed by the
/// joint motion along/about `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub kind: JointKind,
    pub axis: Vec3,
    /// Translation of the joint origin in the parent frame.
    pub origin_translation: Vec3,
    /// Roll-pitch-yaw of the joint origin in the parent frame (rad).
    pub origin_rpy: Vec3,
    /// m for prismatic joints, rad for revolute ones.
    pub position_limits: (f64, f64),
    pub velocity_limit: f64,
    pub acceleration_limit: f64,
    pub jerk_limit: f64,
}

impl Joint {
    fn origin(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::from(self.origin_translation),
            UnitQuaternion::from_euler_angles(self.origin_rpy.x, self.origin_rpy.y, self.origin_rpy.z),
        )
    }

    fn motion(&self, q: f64) -> Isometry3<f64> {
        match self.kind {
            JointKind::Prismatic => Isometry3::translation(
                self.axis.x * q,
                self.axis.y * q,
                self.axis.z * q,
            ),
            JointKind::Revolute => Isometry3::from_parts(
                Translation3::identity(),
                UnitQuaternion::from_axis_angle(&Unit::new_normalize(self.axis), q),
            ),
        }
    }
}

/// Joint positions and velocities at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub positions: JointVec,
    pub velocities: JointVec,
    pub time: f64,
}

impl JointState {
    pub fn at_rest(positions: JointVec) -> Self {
        Self { positions, velocities: JointVec::zeros(), time: 0.0 }
    }
}

/// Pose of the paddle center.
///
/// The unit surface normal is parameterized by two angles: `yaw` is the
/// azimuth of the normal in the xy-plane measured from +y, and `roll` is its
/// elevation toward +z, so `n = (sin(yaw) cos(roll), cos(yaw) cos(roll), sin(roll))`.
/// Rotation of the paddle about its own normal (pitch) is irrelevant for a
/// disc and not represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaddlePose {
    pub position: Vec3,
    pub normal: Vec3,
    pub roll: f64,
    pub yaw: f64,
    pub velocity: Vec3,
}

impl PaddlePose {
    pub fn facing(position: Vec3, normal: Vec3) -> Self {
        let n = normal.normalize();
        Self { position, normal: n, roll: roll_of(&n), yaw: yaw_of(&n), velocity: Vec3::zeros() }
    }

    pub fn from_angles(position: Vec3, roll: f64, yaw: f64) -> Self {
        Self { position, normal: normal_from_angles(roll, yaw), roll, yaw, velocity: Vec3::zeros() }
    }
}

pub fn normal_from_angles(roll: f64, yaw: f64) -> Vec3 {
    Vec3::new(yaw.sin() * roll.cos(), yaw.cos() * roll.cos(), roll.sin())
}

fn roll_of(n: &Vec3) -> f64 {
    n.z.clamp(-1.0, 1.0).asin()
}

fn yaw_of(n: &Vec3) -> f64 {
    n.x.atan2(n.y)
}

/// The robot: ordered joints plus the end-effector (paddle) transform.
///
/// The paddle normal is the +z axis of the end-effector frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicChain {
    pub joints: Vec<Joint>,
    pub end_effector_translation: Vec3,
    pub end_effector_rpy: Vec3,
}

impl KinematicChain {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.joints.len() != DOF {
            return Err(DynamicsError::WrongJointCount { expected: DOF, got: self.joints.len() });
        }
        for (i, j) in self.joints.iter().enumerate() {
            if j.position_limits.0 >= j.position_limits.1 {
                return Err(DynamicsError::InvalidParameter(format!(
                    "joint {i}: limits lo >= hi"
                )));
            }
            if j.axis.norm() < 1e-9 {
                return Err(DynamicsError::InvalidParameter(format!("joint {i}: zero axis")));
            }
            if j.velocity_limit <= 0.0 || j.acceleration_limit <= 0.0 {
                return Err(DynamicsError::InvalidParameter(format!(
                    "joint {i}: velocity/acceleration limits must be positive"
                )));
            }
        }
        Ok(())
    }

    fn end_effector(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::from(self.end_effector_translation),
            UnitQuaternion::from_euler_angles(
                self.end_effector_rpy.x,
                self.end_effector_rpy.y,
                self.end_effector_rpy.z,
            ),
        )
    }

    pub fn out_of_limit_joints(&self, q: &JointVec) -> Vec<usize> {
        self.joints
            .iter()
            .enumerate()
            .filter(|(i, j)| {
                let qi = q[*i];
                qi < j.position_limits.0 - 1e-9 || qi > j.position_limits.1 + 1e-9
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn clamp_to_limits(&self, q: &JointVec) -> JointVec {
        let mut out = *q;
        for (i, j) in self.joints.iter().enumerate() {
            out[i] = out[i].clamp(j.position_limits.0, j.position_limits.1);
        }
        out
    }

    pub fn velocity_limits(&self) -> JointVec {
        JointVec::from_iterator(self.joints.iter().map(|j| j.velocity_limit))
    }

    pub fn acceleration_limits(&self) -> JointVec {
        JointVec::from_iterator(self.joints.iter().map(|j| j.acceleration_limit))
    }

    /// World transforms used by FK and the Jacobian: per joint, the frame the
    /// joint motion acts in, plus the final end-effector pose.
    fn frames(&self, q: &JointVec) -> (Vec<(Vec3, Vec3)>, Isometry3<f64>) {
        let mut t = Isometry3::identity();
        let mut axes = Vec::with_capacity(DOF);
        for (i, joint) in self.joints.iter().enumerate() {
            t *= joint.origin();
            let axis_world = t.rotation * joint.axis.normalize();
            axes.push((axis_world, t.translation.vector));
            t *= joint.motion(q[i]);
        }
        (axes, t * self.end_effector())
    }

    /// Paddle pose at joint configuration `q` (no limit check).
    pub fn fk_unchecked(&self, q: &JointVec) -> PaddlePose {
        let (_, ee) = self.frames(q);
        let normal = ee.rotation * Vec3::new(0.0, 0.0, 1.0);
        PaddlePose::facing(ee.translation.vector, normal)
    }

    /// Paddle pose plus linear velocity `J_pos * qdot`.
    pub fn fk_with_velocity(&self, q: &JointVec, qdot: &JointVec) -> PaddlePose {
        let jac = self.jacobian_position_normal(q);
        let mut pose = self.fk_unchecked(q);
        let v = jac.fixed_rows::<3>(0) * qdot;
        pose.velocity = Vec3::new(v[0], v[1], v[2]);
        pose
    }

    /// Stacked 6x8 Jacobian: rows 0..3 are d(position)/dq, rows 3..6 are
    /// d(normal)/dq.
    pub fn jacobian_position_normal(&self, q: &JointVec) -> Mat6x8 {
        let (axes, ee) = self.frames(q);
        let p_ee = ee.translation.vector;
        let n = ee.rotation * Vec3::new(0.0, 0.0, 1.0);
        let mut jac = Mat6x8::zeros();
        for (i, joint) in self.joints.iter().enumerate() {
            let (axis_w, origin_w) = axes[i];
            let (dp, dn) = match joint.kind {
                JointKind::Prismatic => (axis_w, Vec3::zeros()),
                JointKind::Revolute => (axis_w.cross(&(p_ee - origin_w)), axis_w.cross(&n)),
            };
            for r in 0..3 {
                jac[(r, i)] = dp[r];
                jac[(r + 3, i)] = dn[r];
            }
        }
        jac
    }

    /// Reduced pitch-invariant task Jacobian: rows are d(x,y,z,roll,yaw)/dq.
    pub fn jacobian_task(&self, q: &JointVec) -> Mat5x8 {
        let jac6 = self.jacobian_position_normal(q);
        let n = self.fk_unchecked(q).normal;
        let mut jac = Mat5x8::zeros();
        let planar_sq = (n.x * n.x + n.y * n.y).max(1e-12);
        let droll_denom = (1.0 - n.z * n.z).max(1e-12).sqrt();
        for i in 0..DOF {
            for r in 0..3 {
                jac[(r, i)] = jac6[(r, i)];
            }
            let dn = Vec3::new(jac6[(3, i)], jac6[(4, i)], jac6[(5, i)]);
            jac[(3, i)] = dn.z / droll_denom;
            jac[(4, i)] = (n.y * dn.x - n.x * dn.y) / planar_sq;
        }
        jac
    }
}

/// Paddle pose at `q`, with joint limits enforced.
pub fn forward_kinematics(chain: &KinematicChain, q: &JointVec) -> Result<PaddlePose, DynamicsError> {
    let offenders = chain.out_of_limit_joints(q);
    if !offenders.is_empty() {
        return Err(DynamicsError::JointLimits { joints: offenders });
    }
    Ok(chain.fk_unchecked(q))
}

/// Default chain: a 2-axis gantry (x, y) carrying a six-revolute arm, laid
/// out so that the all-zeros configuration puts the paddle at `home_position`
/// facing +y (toward the opponent). Link lengths are a stand-in for the real
/// arm; the geometry is configuration data, not a contract.
pub fn default_chain_with_home(home_position: Vec3) -> KinematicChain {
    let prism = |axis: Vec3, t: Vec3, lim: f64, vel: f64| Joint {
        kind: JointKind::Prismatic,
        axis,
        origin_translation: t,
        origin_rpy: Vec3::zeros(),
        position_limits: (-lim, lim),
        velocity_limit: vel,
        acceleration_limit: 15.0,
        jerk_limit: 1e6,
    };
    let rev = |axis: Vec3, t: Vec3, rpy: Vec3, lim: (f64, f64), vel: f64| Joint {
        kind: JointKind::Revolute,
        axis,
        origin_translation: t,
        origin_rpy: rpy,
        position_limits: lim,
        velocity_limit: vel,
        acceleration_limit: 80.0,
        jerk_limit: 1e6,
    };
    let x = Vec3::new(1.0, 0.0, 0.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    let z = Vec3::new(0.0, 0.0, 1.0);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut chain = KinematicChain {
        joints: vec![
            prism(x, Vec3::zeros(), 1.0, 2.0),
            prism(y, Vec3::zeros(), 0.5, 2.0),
            // Arm base pan.
            rev(z, Vec3::new(0.0, 0.0, 0.20), Vec3::zeros(), (-2.87, 2.87), 7.33),
            // Shoulder pitch; the -90deg x-rotation bends the rest of the arm
            // forward so subsequent links extend along +y.
            rev(x, Vec3::new(0.0, 0.0, 0.27), Vec3::new(-half_pi, 0.0, 0.0), (-1.91, 1.91), 7.33),
            // Elbow pitch.
            rev(x, Vec3::new(0.0, 0.0, 0.30), Vec3::zeros(), (-2.0, 2.0), 7.33),
            // Wrist roll about the forearm axis.
            rev(z, Vec3::new(0.0, 0.0, 0.25), Vec3::zeros(), (-2.79, 2.79), 10.47),
            // Wrist pitch.
            rev(x, Vec3::new(0.0, 0.0, 0.10), Vec3::zeros(), (-2.09, 2.09), 10.47),
            // Flange roll.
            rev(z, Vec3::new(0.0, 0.0, 0.05), Vec3::zeros(), (-3.14, 3.14), 10.47),
        ],
        // 18.8cm extension to the paddle center.
        end_effector_translation: Vec3::new(0.0, 0.0, 0.188),
        end_effector_rpy: Vec3::zeros(),
    };
    // Shift the gantry base so the home configuration lands exactly on the
    // requested paddle position.
    let home = chain.fk_unchecked(&JointVec::zeros());
    chain.joints[0].origin_translation = home_position - home.position;
    chain
}

/// Default chain with the stock home paddle position.
pub fn default_chain() -> KinematicChain {
    default_chain_with_home(Vec3::new(0.30, -1.50, 0.32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn home_pose_is_configured_exactly() {
        let chain = default_chain();
        chain.validate().unwrap();
        let home = forward_kinematics(&chain, &JointVec::zeros()).unwrap();
        assert!((home.position - Vec3::new(0.30, -1.50, 0.32)).norm() < 1e-12);
        assert!((home.normal - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-9);
        assert_abs_diff_eq!(home.normal.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gantry_motion_is_a_pure_translation() {
        let chain = default_chain();
        let home = chain.fk_unchecked(&JointVec::zeros());
        let mut q = JointVec::zeros();
        q[0] = 0.3;
        let moved = chain.fk_unchecked(&q);
        assert!((moved.position - home.position - Vec3::new(0.3, 0.0, 0.0)).norm() < 1e-12);
        assert!((moved.normal - home.normal).norm() < 1e-12);
    }

    #[test]
    fn fk_rejects_out_of_limit_joints() {
        let chain = default_chain();
        let mut q = JointVec::zeros();
        q[0] = 5.0;
        q[3] = 3.0;
        match forward_kinematics(&chain, &q) {
            Err(DynamicsError::JointLimits { joints }) => assert_eq!(joints, vec![0, 3]),
            other => panic!("expected joint-limit error, got {other:?}"),
        }
    }

    fn random_q(rng: &mut impl Rng, chain: &KinematicChain, span: f64) -> JointVec {
        JointVec::from_iterator(chain.joints.iter().map(|j| {
            let (lo, hi) = j.position_limits;
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo) * span;
            rng.gen_range(mid - half..mid + half)
        }))
    }

    #[test]
    fn analytic_jacobian_matches_central_differences() {
        let chain = default_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let h = 1e-6;
        for _ in 0..100 {
            let q = random_q(&mut rng, &chain, 0.6);
            let jac = chain.jacobian_position_normal(&q);
            for i in 0..DOF {
                let mut qp = q;
                let mut qm = q;
                qp[i] += h;
                qm[i] -= h;
                let pp = chain.fk_unchecked(&qp);
                let pm = chain.fk_unchecked(&qm);
                let dp = (pp.position - pm.position) / (2.0 * h);
                let dn = (pp.normal - pm.normal) / (2.0 * h);
                for r in 0..3 {
                    assert_abs_diff_eq!(jac[(r, i)], dp[r], epsilon = 1e-5);
                    assert_abs_diff_eq!(jac[(r + 3, i)], dn[r], epsilon = 1e-5);
                }
            }
        }
    }

    #[test]
    fn task_jacobian_matches_central_differences_away_from_gimbal() {
        let chain = default_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        let mut checked = 0;
        while checked < 50 {
            let q = random_q(&mut rng, &chain, 0.5);
            // Skip configurations near the roll chart singularity |nz| ~ 1.
            if chain.fk_unchecked(&q).normal.z.abs() > 0.9 {
                continue;
            }
            checked += 1;
            let jac = chain.jacobian_task(&q);
            for i in 0..DOF {
                let mut qp = q;
                let mut qm = q;
                qp[i] += h;
                qm[i] -= h;
                let pp = chain.fk_unchecked(&qp);
                let pm = chain.fk_unchecked(&qm);
                assert_abs_diff_eq!(jac[(3, i)], (pp.roll - pm.roll) / (2.0 * h), epsilon = 1e-4);
                let mut dyaw = pp.yaw - pm.yaw;
                if dyaw > std::f64::consts::PI {
                    dyaw -= 2.0 * std::f64::consts::PI;
                }
                if dyaw < -std::f64::consts::PI {
                    dyaw += 2.0 * std::f64::consts::PI;
                }
                assert_abs_diff_eq!(jac[(4, i)], dyaw / (2.0 * h), epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn paddle_velocity_is_jacobian_times_qdot() {
        let chain = default_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_q(&mut rng, &chain, 0.4);
        let qdot = JointVec::from_iterator((0..DOF).map(|_| rng.gen_range(-1.0..1.0)));
        let pose = chain.fk_with_velocity(&q, &qdot);
        // Compare against a small finite motion.
        let h = 1e-7;
        let p2 = chain.fk_unchecked(&(q + qdot * h));
        let fd = (p2.position - pose.position) / h;
        assert!((fd - pose.velocity).norm() < 1e-5);
    }
}
