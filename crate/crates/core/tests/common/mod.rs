//! Shared fixtures for the integration and acceptance suites: the desk-scale
//! study environment and a scripted predictive returner.

#![allow(dead_code)]

use rallysim_core::dynamics::{bounce, step_ball_flight, BallPhysicalParams, BallState, SurfaceParams, TaskSpaceParams};
use rallysim_core::env::*;
use rallysim_core::fidelity::{LatencyModel, NoiseModel, RandomRange};
use rallysim_core::Vec3;

/// The desk study environment (mirrors `configs/profiles/desk.toml`):
/// 50Hz task-space control, damped paddle, narrowed thrower box, action cube
/// centered on a workable ready pose.
pub fn desk_env(latency_scale: f64, noise_half_width: f64, noise_bias_x: f64) -> EnvConfig {
    let mut cfg = EnvConfig::default();
    cfg.action_mode = ActionMode::TaskPosition;
    cfg.control_hz = 50;
    cfg.max_episode_steps = 100;
    cfg.fidelity.latency = LatencyModel::with_scale(latency_scale);
    cfg.fidelity.noise = NoiseModel {
        half_width: [noise_half_width; 3],
        bias: [noise_bias_x, 0.0, 0.0],
    };
    cfg.fidelity.randomization.paddle_restitution = RandomRange::new(0.5, 0.1);
    cfg.distribution = BallDistribution {
        velocity_min: [-0.22, -7.0, 0.0],
        velocity_max: [0.22, -6.7, 0.25],
        ..BallDistribution::baseline()
    };
    cfg.surface.paddle_radius = 0.11;
    cfg.task_space = TaskSpaceParams {
        cube_min: [-0.25, -1.72, 0.06],
        cube_max: [0.85, -1.08, 0.54],
        ..Default::default()
    };
    cfg.task_roll_range = [-0.15, 0.55];
    cfg.task_yaw_range = [-0.4, 0.4];
    cfg.rewards = RewardSpec {
        components: vec![
            ComponentSpec { name: "hit_ball".into(), weight: 1.0 },
            ComponentSpec { name: "land_ball".into(), weight: 1.0 },
            ComponentSpec { name: "near_net_bonus".into(), weight: 0.5 },
        ],
        ..RewardSpec::default()
    };
    cfg
}

/// The reference environment: baseline latency, zero-mean 4cm noise.
pub fn reference_env() -> EnvConfig {
    desk_env(1.0, 0.04, 0.0)
}

/// A quiet environment for scripted trajectories: no latency, no noise, no
/// randomization, no home perturbation.
pub fn quiet_env() -> EnvConfig {
    let mut cfg = EnvConfig::default();
    cfg.fidelity.latency = LatencyModel::zero();
    cfg.fidelity.noise = NoiseModel::none();
    cfg.fidelity.randomization.table_restitution = RandomRange::fixed(0.9);
    cfg.fidelity.randomization.paddle_restitution = RandomRange::fixed(0.7);
    cfg.home_perturbation = 0.0;
    cfg
}

/// Predict the ball state when it next crosses `y_plane` (after bouncing on
/// the table), integrating the true flight model.
pub fn predict_plane_crossing(
    launch: &BallState,
    ball: &BallPhysicalParams,
    surface: &SurfaceParams,
    table_restitution: f64,
    y_plane: f64,
) -> Option<(f64, Vec3, Vec3)> {
    let mut s = *launch;
    for _ in 0..4000 {
        let next = step_ball_flight(&s, ball, 1e-3).ok()?;
        if s.position.z > 0.0
            && next.position.z <= 0.0
            && next.position.x.abs() <= surface.table_half_width
            && next.position.y.abs() <= surface.table_half_length
        {
            let mut b = bounce(&next, &Vec3::new(0.0, 0.0, 1.0), table_restitution).ok()?;
            b.position.z = 1e-6;
            s = b;
            continue;
        }
        if next.position.y <= y_plane {
            return Some((next.time, next.position, next.velocity));
        }
        if next.position.z < surface.floor_z() {
            return None;
        }
        s = next;
    }
    None
}

/// Hand-built predictive returner for task-space environments. It reads the
/// true episode state (launch, episode restitution, latencies), predicts the
/// intercept, and swings through it with an adjustable tilt.
pub struct ScriptedReturner {
    pub y_plane: f64,
    pub swing_lead: f64,
    pub swing_depth: f64,
    pub roll_bias: f64,
    pub roll_vz_gain: f64,
    target: Option<(f64, Vec3, Vec3)>,
    latency_lead: f64,
}

impl ScriptedReturner {
    pub fn new() -> Self {
        Self {
            y_plane: -1.5,
            swing_lead: 0.10,
            swing_depth: 0.25,
            roll_bias: 0.18,
            roll_vz_gain: -0.06,
            target: None,
            latency_lead: 0.0,
        }
    }

    /// Plan against the freshly reset environment.
    pub fn plan(&mut self, env: &Env) {
        let launch = *env.ball_state().expect("env reset");
        let table_e = env.surface_overrides().expect("env reset").table_restitution;
        self.latency_lead = env.episode_latencies().map(|l| l.arm_action).unwrap_or(0.0);
        self.target = predict_plane_crossing(
            &launch,
            &env.config().ball,
            &env.config().surface,
            table_e,
            self.y_plane,
        );
    }

    /// Task-space action (x, y, z, roll, yaw) for the current step.
    pub fn action(&self, t_now: f64) -> Vec<f64> {
        let Some((t_hit, p_hit, v_hit)) = self.target else {
            return vec![0.3, self.y_plane - 0.12, 0.3, self.roll_bias, 0.0];
        };
        let roll = self.roll_bias + self.roll_vz_gain * v_hit.z;
        let swinging = t_now + self.swing_lead + self.latency_lead >= t_hit;
        let y = if swinging { self.y_plane + self.swing_depth } else { self.y_plane - 0.12 };
        vec![p_hit.x, y, p_hit.z, roll, 0.0]
    }
}

/// Play one episode with the scripted returner; returns the shaped return
/// plus the event kinds in order.
pub fn play_scripted(env: &mut Env, seed: u64) -> (f64, Vec<EventKind>, Option<Outcome>) {
    env.reset_with_seed(seed).expect("reset");
    let mut ctl = ScriptedReturner::new();
    ctl.plan(env);
    let mut total = 0.0;
    let mut events = Vec::new();
    loop {
        let action = ctl.action(env.time());
        let r = env.step(&action).expect("step");
        total += r.reward;
        events.extend(r.info.events.iter().map(|e| e.kind));
        if r.done {
            return (total, events, r.info.outcome);
        }
    }
}
