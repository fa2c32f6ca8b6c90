//! Deterministic physics: ball flight, bounces, paddle contact, and the 8-DOF
//! kinematic robot with task-space control.
//!
//! Everything in this module is a pure function over value types; there is no
//! shared mutable state and every operation is safe to call concurrently.

mod ball;
mod chain;
mod task_space;

pub use ball::{
    bounce, paddle_contact, step_ball_flight, BallPhysicalParams, BallState, ContactOutcome,
    SurfaceParams, GRAVITY,
};
pub use chain::{
    default_chain, default_chain_with_home, forward_kinematics, Joint, JointKind, JointState, JointVec, KinematicChain,
    PaddlePose, DOF,
};
pub use task_space::{task_space_command, TaskCommand, TaskSpaceParams};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("numerical divergence: ball state became non-finite")]
    NumericalDivergence,
    #[error("surface normal is not unit length (|n| = {norm})")]
    NonUnitNormal { norm: f64 },
    #[error("joint positions outside limits at joints {joints:?}")]
    JointLimits { joints: Vec<usize> },
    #[error("kinematic chain must have exactly {expected} joints, got {got}")]
    WrongJointCount { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
