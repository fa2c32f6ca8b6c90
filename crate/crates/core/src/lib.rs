//! Desk-scale robotic table-tennis learning laboratory.
//!
//! The crate is organized around the pipeline of a high-speed learning system
//! reproduced entirely in simulation:
//!
//! * [`dynamics`] — ball flight, bounces, paddle contact, and the 8-DOF
//!   kinematic robot with task-space control.
//! * [`env`] — gym-style episodic environment: referee state machine,
//!   configurable rewards/dones, observation formatting, ball launches.
//! * [`fidelity`] — measured-latency injection via timed-buffer interpolation,
//!   observation noise, and per-episode domain randomization.
//! * [`tracking`] — synthetic stereo perception: projection, DLT
//!   triangulation, triangulation-bias studies, Kalman filtering.
//! * [`realbridge`] — emulation of the real-robot path: multi-rate sensor
//!   fusion, contact inference, episode-start detection, predictive safety
//!   filtering, and step throttling.
//! * [`trainer`] — evolutionary-strategies training (ARS and the
//!   reward-differential/orthogonal-sampling variant) with deterministic
//!   parallel rollouts.

pub use nalgebra;

pub mod dynamics;
pub mod env;
pub mod fidelity;
pub mod realbridge;
pub mod seed;
pub mod tracking;
pub mod trainer;

pub use dynamics::{BallPhysicalParams, BallState, JointState, KinematicChain, PaddlePose, SurfaceParams};
pub use env::{Env, EnvConfig, GameEvent, Observation};
pub use fidelity::TimedBuffer;
pub use trainer::TrainerConfig;

/// 3-vector in the table frame: x lateral, y toward the opponent, z up.
pub type Vec3 = nalgebra::Vector3<f64>;
