//! Gym-style episodic environment: referee state machine, configurable
//! rewards and done conditions, observation formatting, and ball launches.
//!
//! Each instance is single-threaded and owns its RNG; any number of instances
//! can run in parallel. Identical `(config, seed)` pairs produce bit-identical
//! episode logs.

mod config;
mod launch;
mod log;
mod rewards;
mod state_machine;

pub use config::{ActionMode, ConfigError, DoneSpec, EnvConfig, FidelityConfig, ObservationMode};
pub use launch::{robot_free_landing, sample_launch, BallDistribution, LaunchError};
pub use log::StepRecord;
pub use rewards::{ComponentSpec, RewardError, RewardManager, RewardSpec, StepContext, ViolationCounters};
pub use state_machine::{
    EventKind, GameEvent, Outcome, StateMachine, StateMachineError, StateMachineSpec,
    CONTACT_EVENT_KINDS,
};

use crate::dynamics::{
    paddle_contact, step_ball_flight, BallState, ContactOutcome, JointState, JointVec, PaddlePose,
    TaskCommand, DOF,
};
use crate::fidelity::{EpisodeLatencies, SurfaceOverrides, TimedBuffer};
use crate::seed;
use crate::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Number of past environment steps stacked into one observation.
pub const OBS_HISTORY: usize = 8;

/// Internal physics substep (seconds).
const SUBSTEP: f64 = 1e-3;

/// Minimum time between two paddle contacts (debounces plane re-crossings).
const PADDLE_CONTACT_COOLDOWN: f64 = 0.02;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called before reset")]
    NotReset,
    #[error("step called on a finished episode")]
    EpisodeOver,
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error(transparent)]
    Launch(#[from] LaunchError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
}

/// Stacked observation: `OBS_HISTORY` per-step slices, oldest first,
/// zero-padded at episode start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub data: Vec<f64>,
    pub per_step: usize,
}

impl Observation {
    pub fn newest_slice(&self) -> &[f64] {
        &self.data[self.data.len() - self.per_step..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoneReason {
    Terminal,
    RobotCollision,
    OutOfPlay,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct StepInfo {
    pub events: Vec<GameEvent>,
    pub reward_components: Vec<(String, f64)>,
    pub sm_state: String,
    pub outcome: Option<Outcome>,
    pub done_reason: Option<DoneReason>,
    /// Simulated-clock latency trace: (stage, time or age in seconds).
    pub stages: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
struct Episode {
    seed: u64,
    t: f64,
    step_index: u32,
    rng: ChaCha8Rng,
    latencies: EpisodeLatencies,
    surface: SurfaceOverrides,
    ball: BallState,
    ball_frozen: bool,
    q: JointVec,
    v: JointVec,
    prev_v: JointVec,
    prev_a: JointVec,
    sm_state: usize,
    rewards: RewardManager,
    violations: ViolationCounters,
    hit_occurred: bool,
    land_occurred: bool,
    dead_after_hit: bool,
    min_net_distance_after_hit: f64,
    last_paddle_hit: f64,
    ground_emitted: bool,
    ball_buf: TimedBuffer,
    arm_buf: TimedBuffer,
    gantry_buf: TimedBuffer,
    action_buf: TimedBuffer,
    history: VecDeque<Vec<f64>>,
    done: bool,
    outcome: Option<Outcome>,
    done_reason: Option<DoneReason>,
}

/// The environment.
#[derive(Debug, Clone)]
pub struct Env {
    cfg: EnvConfig,
    sm: StateMachine,
    ep: Option<Episode>,
    episode_counter: u64,
    logging: bool,
    log: Vec<StepRecord>,
}

impl Env {
    pub fn new(cfg: EnvConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        let sm = StateMachine::compile(&cfg.state_machine).map_err(ConfigError::from)?;
        Ok(Self { cfg, sm, ep: None, episode_counter: 0, logging: false, log: Vec::new() })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn set_logging(&mut self, on: bool) {
        self.logging = on;
    }

    /// Drain the JSON-lines step records collected so far.
    pub fn take_log(&mut self) -> Vec<StepRecord> {
        std::mem::take(&mut self.log)
    }

    /// Ground-truth ball state (used by tests and the real-environment bridge).
    pub fn ball_state(&self) -> Option<&BallState> {
        self.ep.as_ref().map(|e| &e.ball)
    }

    pub fn joint_state(&self) -> Option<JointState> {
        self.ep.as_ref().map(|e| JointState { positions: e.q, velocities: e.v, time: e.t })
    }

    pub fn paddle_pose(&self) -> Option<PaddlePose> {
        self.ep.as_ref().map(|e| self.cfg.chain.fk_with_velocity(&e.q, &e.v))
    }

    pub fn time(&self) -> f64 {
        self.ep.as_ref().map(|e| e.t).unwrap_or(0.0)
    }

    pub fn state_machine_state(&self) -> Option<&str> {
        self.ep.as_ref().map(|e| self.sm.name(e.sm_state))
    }

    pub fn episode_latencies(&self) -> Option<EpisodeLatencies> {
        self.ep.as_ref().map(|e| e.latencies)
    }

    pub fn surface_overrides(&self) -> Option<SurfaceOverrides> {
        self.ep.as_ref().map(|e| e.surface)
    }

    /// Reset with a seed derived from the config seed and an episode counter.
    pub fn reset(&mut self) -> Result<Observation, EnvError> {
        let s = seed::mix(self.cfg.seed, &[4, self.episode_counter]);
        self.reset_with_seed(s)
    }

    pub fn reset_with_seed(&mut self, episode_seed: u64) -> Result<Observation, EnvError> {
        self.episode_counter += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(episode_seed);
        let latencies = self.cfg.fidelity.latency.sample_episode(&mut rng);
        let surface = self.cfg.fidelity.randomization.sample(&mut rng);
        let ball = if self.cfg.launch_enabled {
            sample_launch(&self.cfg.distribution, &self.cfg.ball, &self.cfg.surface, &mut rng)?
        } else {
            // Parked out of play; never integrated.
            BallState::at_rest(Vec3::new(0.0, 4.0, 1.0))
        };
        let mut q = JointVec::zeros();
        let hp = self.cfg.home_perturbation;
        if hp > 0.0 {
            for j in 0..DOF {
                q[j] += rng.gen_range(-hp..=hp);
            }
            q = self.cfg.chain.clamp_to_limits(&q);
        }

        let mut ball_buf = TimedBuffer::new(3);
        let mut arm_buf = TimedBuffer::new(6);
        let mut gantry_buf = TimedBuffer::new(2);
        ball_buf.push(0.0, ball.position.as_slice()).expect("fresh buffer");
        arm_buf.push(0.0, &q.as_slice()[2..8]).expect("fresh buffer");
        gantry_buf.push(0.0, &q.as_slice()[0..2]).expect("fresh buffer");

        let mut rewards = RewardManager::new(&self.cfg.rewards).map_err(ConfigError::from)?;
        rewards.reset();

        let mut history = VecDeque::with_capacity(OBS_HISTORY);
        for _ in 0..OBS_HISTORY {
            history.push_back(vec![0.0; self.cfg.per_step_obs_dim()]);
        }

        let mut ep = Episode {
            seed: episode_seed,
            t: 0.0,
            step_index: 0,
            rng,
            latencies,
            surface,
            ball,
            ball_frozen: !self.cfg.launch_enabled,
            q,
            v: JointVec::zeros(),
            prev_v: JointVec::zeros(),
            prev_a: JointVec::zeros(),
            sm_state: self.sm.initial(),
            rewards,
            violations: ViolationCounters::default(),
            hit_occurred: false,
            land_occurred: false,
            dead_after_hit: false,
            min_net_distance_after_hit: f64::INFINITY,
            last_paddle_hit: f64::NEG_INFINITY,
            ground_emitted: false,
            ball_buf,
            arm_buf,
            gantry_buf,
            action_buf: TimedBuffer::new(self.cfg.action_dim()),
            history: VecDeque::new(),
            done: false,
            outcome: None,
            done_reason: None,
        };
        ep.history = history;
        // Newest slot is the observation at t = 0.
        let slice = self.observe_slice(&mut ep);
        ep.history.pop_front();
        ep.history.push_back(slice);

        let obs = self.stack_history(&ep);
        if self.logging {
            let launch_event =
                GameEvent { kind: EventKind::Launch, time: 0.0, position: ep.ball.position };
            self.log.push(StepRecord {
                v: log::LOG_VERSION,
                episode_seed,
                step: 0,
                t: 0.0,
                sm_state: self.sm.name(ep.sm_state).to_string(),
                events: vec![launch_event],
                action: vec![0.0; self.cfg.action_dim()],
                reward: 0.0,
                reward_components: Vec::new(),
                ball_position: ep.ball.position.into(),
                joint_positions: ep.q.as_slice().to_vec(),
                paddle_position: self.cfg.chain.fk_unchecked(&ep.q).position.into(),
                done: false,
                outcome: None,
                done_reason: None,
                stages: Vec::new(),
            });
        }
        self.ep = Some(ep);
        Ok(obs)
    }

    /// Lower and upper bounds of the action space.
    pub fn action_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self.cfg.action_mode {
            ActionMode::JointVelocity => {
                let lim = self.cfg.chain.velocity_limits();
                (lim.iter().map(|l| -l).collect(), lim.iter().copied().collect())
            }
            ActionMode::TaskPosition => {
                let ts = &self.cfg.task_space;
                let roll = self.cfg.task_roll_range;
                let yaw = self.cfg.task_yaw_range;
                (
                    vec![ts.cube_min[0], ts.cube_min[1], ts.cube_min[2], roll[0], yaw[0]],
                    vec![ts.cube_max[0], ts.cube_max[1], ts.cube_max[2], roll[1], yaw[1]],
                )
            }
        }
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        let Some(mut ep) = self.ep.take() else { return Err(EnvError::NotReset) };
        if ep.done {
            self.ep = Some(ep);
            return Err(EnvError::EpisodeOver);
        }
        if action.len() != self.cfg.action_dim() {
            self.ep = Some(ep);
            return Err(EnvError::InvalidAction(format!(
                "dimension {} != expected {}",
                action.len(),
                self.cfg.action_dim()
            )));
        }
        if action.iter().any(|a| !a.is_finite()) {
            self.ep = Some(ep);
            return Err(EnvError::InvalidAction("non-finite component".into()));
        }

        let result = self.advance(&mut ep, action);
        self.ep = Some(ep);
        Ok(result)
    }

    fn advance(&mut self, ep: &mut Episode, action: &[f64]) -> StepResult {
        let dt = self.cfg.dt();
        let t_now = ep.t;

        // Buffer the raw action; the robot sees it only after its latency.
        let clipped = self.clip_action(action);
        ep.action_buf.push(t_now, &clipped).expect("monotone step clock");

        let v_target = self.delayed_joint_targets(ep, t_now);

        // Acceleration-capped velocity tracking.
        let accel = self.cfg.chain.acceleration_limits();
        let vel_lim = self.cfg.chain.velocity_limits();
        for j in 0..DOF {
            let dv = (v_target[j] - ep.v[j]).clamp(-accel[j] * dt, accel[j] * dt);
            ep.v[j] = (ep.v[j] + dv).clamp(-vel_lim[j], vel_lim[j]);
        }

        // Integrate physics in 1ms substeps with contact detection.
        let mut events: Vec<GameEvent> = Vec::new();
        let n_sub = (dt / SUBSTEP).round().max(1.0) as usize;
        let h = dt / n_sub as f64;
        for k in 0..n_sub {
            let t_sub = t_now + k as f64 * h;
            self.substep(ep, t_sub, h, &mut events);
        }
        ep.t = t_now + dt;
        ep.step_index += 1;

        // Semantic hit/land flags from the chronological event stream.
        let mut hit_event = false;
        let mut land_event = false;
        for ev in &events {
            match ev.kind {
                EventKind::PaddleArm => {
                    if !ep.hit_occurred {
                        hit_event = true;
                    }
                    ep.hit_occurred = true;
                    ep.dead_after_hit = false;
                }
                EventKind::TableArm | EventKind::Ground => {
                    if ep.hit_occurred {
                        ep.dead_after_hit = true;
                    }
                }
                EventKind::TableOpp => {
                    if ep.hit_occurred && !ep.dead_after_hit && !ep.land_occurred {
                        land_event = true;
                        ep.land_occurred = true;
                    }
                }
                _ => {}
            }
        }
        // Track the closest approach to the net plane after the hit.
        if ep.hit_occurred && !ep.land_occurred {
            ep.min_net_distance_after_hit = ep.min_net_distance_after_hit.min(ep.ball.position.y.abs());
        }

        // Advance the referee state machine on contact events.
        for ev in &events {
            if ev.kind == EventKind::Launch {
                continue;
            }
            if self.sm.is_terminal(ep.sm_state) {
                break;
            }
            ep.sm_state = self.sm.transition(ep.sm_state, ev.kind).expect("non-terminal checked");
        }

        self.update_violations(ep);

        // Done determination.
        let robot_collision =
            events.iter().any(|e| matches!(e.kind, EventKind::Table | EventKind::Stand));
        let out_of_play = {
            let p = ep.ball.position;
            let lo = self.cfg.dones.play_volume_min;
            let hi = self.cfg.dones.play_volume_max;
            !ep.ball_frozen
                && (p.x < lo[0] || p.y < lo[1] || p.z < lo[2] || p.x > hi[0] || p.y > hi[1] || p.z > hi[2])
        };
        if self.sm.is_terminal(ep.sm_state) {
            ep.done = true;
            ep.outcome = self.sm.outcome(ep.sm_state);
            ep.done_reason =
                Some(if robot_collision { DoneReason::RobotCollision } else { DoneReason::Terminal });
        } else if out_of_play {
            ep.done = true;
            ep.done_reason = Some(DoneReason::OutOfPlay);
        } else if ep.step_index >= self.cfg.max_episode_steps {
            ep.done = true;
            ep.done_reason = Some(DoneReason::Truncated);
        }
        // Episodes ending before the state machine resolves score by whether
        // the return landed; every other sequence loses the point.
        if ep.done && ep.outcome.is_none() {
            ep.outcome = Some(if ep.land_occurred { Outcome::WinPoint } else { Outcome::LosePoint });
        }

        // Rewards.
        let paddle = self.cfg.chain.fk_unchecked(&ep.q);
        let (reward, reward_components) = {
            let ctx = StepContext {
                events: &events,
                hit_event,
                land_event,
                joint_positions: &ep.q,
                paddle_height: paddle.position.z,
                terminal: ep.done,
                violations: &ep.violations,
                hit_occurred: ep.hit_occurred,
                land_occurred: ep.land_occurred,
                min_net_distance_after_hit: ep.min_net_distance_after_hit,
            };
            ep.rewards.step(&ctx)
        };

        // Sensor buffers and the delayed, noised observation.
        ep.ball_buf.push(ep.t, ep.ball.position.as_slice()).expect("monotone step clock");
        ep.arm_buf.push(ep.t, &ep.q.as_slice()[2..8]).expect("monotone step clock");
        ep.gantry_buf.push(ep.t, &ep.q.as_slice()[0..2]).expect("monotone step clock");
        let slice = self.observe_slice(ep);
        ep.history.pop_front();
        ep.history.push_back(slice);
        let observation = self.stack_history(ep);

        let stages = vec![
            ("obs_time".to_string(), ep.t),
            ("ball_obs_age".to_string(), ep.latencies.ball_obs),
            ("arm_obs_age".to_string(), ep.latencies.arm_obs),
            ("gantry_obs_age".to_string(), ep.latencies.gantry_obs),
            ("arm_action_age".to_string(), ep.latencies.arm_action),
            ("gantry_action_age".to_string(), ep.latencies.gantry_action),
        ];

        let info = StepInfo {
            events: events.clone(),
            reward_components: reward_components.clone(),
            sm_state: self.sm.name(ep.sm_state).to_string(),
            outcome: ep.outcome,
            done_reason: ep.done_reason,
            stages: stages.clone(),
        };

        if self.logging {
            self.log.push(StepRecord {
                v: log::LOG_VERSION,
                episode_seed: ep.seed,
                step: ep.step_index,
                t: ep.t,
                sm_state: info.sm_state.clone(),
                events,
                action: clipped,
                reward,
                reward_components,
                ball_position: ep.ball.position.into(),
                joint_positions: ep.q.as_slice().to_vec(),
                paddle_position: paddle.position.into(),
                done: ep.done,
                outcome: ep.outcome,
                done_reason: ep.done_reason,
                stages,
            });
        }

        StepResult { observation, reward, done: ep.done, info }
    }

    fn clip_action(&self, action: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.action_bounds();
        action.iter().zip(lo.iter().zip(&hi)).map(|(a, (l, h))| a.clamp(*l, *h)).collect()
    }

    /// Latency-delayed joint velocity targets for the current step.
    fn delayed_joint_targets(&self, ep: &Episode, t_now: f64) -> JointVec {
        let first = ep.action_buf.oldest_time().unwrap_or(f64::INFINITY);
        let delayed = |latency: f64| -> Option<Vec<f64>> {
            let t_query = t_now - latency;
            if t_query < first {
                return None; // before the first command: robot holds still
            }
            ep.action_buf.interpolate(t_query).ok()
        };
        match self.cfg.action_mode {
            ActionMode::JointVelocity => {
                let arm = delayed(ep.latencies.arm_action);
                let gantry = delayed(ep.latencies.gantry_action);
                let mut v = JointVec::zeros();
                if let Some(g) = gantry {
                    v[0] = g[0];
                    v[1] = g[1];
                }
                if let Some(a) = arm {
                    for j in 2..DOF {
                        v[j] = a[j];
                    }
                }
                v
            }
            ActionMode::TaskPosition => {
                let mut v = JointVec::zeros();
                let solve = |act: &[f64]| -> TaskCommand {
                    let target = crate::dynamics::PaddlePose::from_angles(
                        Vec3::new(act[0], act[1], act[2]),
                        act[3],
                        act[4],
                    );
                    crate::dynamics::task_space_command(
                        &self.cfg.chain,
                        &ep.q,
                        &target,
                        &self.cfg.task_space,
                    )
                };
                if let Some(g) = delayed(ep.latencies.gantry_action) {
                    let cmd = solve(&g);
                    v[0] = cmd.joint_velocities[0];
                    v[1] = cmd.joint_velocities[1];
                }
                if let Some(a) = delayed(ep.latencies.arm_action) {
                    let cmd = solve(&a);
                    for j in 2..DOF {
                        v[j] = cmd.joint_velocities[j];
                    }
                }
                v
            }
        }
    }

    /// One physics substep: advance the robot, integrate the ball with
    /// event detection, and check robot collisions.
    fn substep(&self, ep: &mut Episode, t_sub: f64, h: f64, events: &mut Vec<GameEvent>) {
        let q_start = ep.q;
        let mut q_end = ep.q + ep.v * h;
        let before_clamp = q_end;
        q_end = self.cfg.chain.clamp_to_limits(&q_end);
        for j in 0..DOF {
            if (q_end[j] - before_clamp[j]).abs() > 0.0 {
                ep.v[j] = 0.0; // hard stop at the position limit
            }
        }

        if !ep.ball_frozen {
            self.integrate_ball(ep, &q_start, &q_end, t_sub, h, events);
        }
        ep.q = q_end;

        // Robot collision checks at the substep boundary.
        let paddle = self.cfg.chain.fk_unchecked(&ep.q);
        let s = &self.cfg.surface;
        let over_table =
            paddle.position.x.abs() <= s.table_half_width && paddle.position.y.abs() <= s.table_half_length;
        if paddle.position.z < 0.0 && over_table {
            push_once(events, EventKind::Table, t_sub + h, paddle.position);
        }
        if paddle.position.y < self.cfg.stand_y || paddle.position.z < s.floor_z() + 0.02 {
            push_once(events, EventKind::Stand, t_sub + h, paddle.position);
        }
    }

    /// Integrate the ball across one substep, splitting at contact times
    /// found by bisection (accurate to well under 0.1mm).
    fn integrate_ball(
        &self,
        ep: &mut Episode,
        q_start: &JointVec,
        q_end: &JointVec,
        t_sub: f64,
        h: f64,
        events: &mut Vec<GameEvent>,
    ) {
        let params = self.cfg.ball;
        let s = &self.cfg.surface;
        let mut state = ep.ball;
        let mut t_local = 0.0; // elapsed inside the substep

        for _ in 0..4 {
            let remaining = h - t_local;
            if remaining <= 1e-12 {
                break;
            }
            let Ok(next) = step_ball_flight(&state, &params, remaining) else {
                break;
            };
            let paddle_at = |frac: f64| {
                let lerp = (t_local + frac * remaining) / h;
                let q = q_start + (q_end - q_start) * lerp;
                self.cfg.chain.fk_unchecked(&q)
            };
            let ball_at = |frac: f64| {
                if frac <= 0.0 {
                    state
                } else {
                    step_ball_flight(&state, &params, frac * remaining).unwrap_or(next)
                }
            };

            // Earliest contact among the candidate surfaces, as a fraction of
            // the remaining window.
            let mut best: Option<(f64, Contact)> = None;
            let mut consider = |frac: Option<f64>, c: Contact| {
                if let Some(f) = frac {
                    if best.map_or(true, |(bf, _)| f < bf) {
                        best = Some((f, c));
                    }
                }
            };

            // Table plane (z = 0) within the table bounds.
            if state.position.z > 0.0 && next.position.z <= 0.0 {
                let f = bisect(|f| ball_at(f).position.z, 1.0);
                let p = ball_at(f).position;
                if p.x.abs() <= s.table_half_width && p.y.abs() <= s.table_half_length {
                    consider(Some(f), Contact::Table);
                }
            }
            // Floor plane.
            if !ep.ground_emitted && state.position.z > s.floor_z() && next.position.z <= s.floor_z() {
                let f = bisect(|f| ball_at(f).position.z - s.floor_z(), 1.0);
                consider(Some(f), Contact::Ground);
            }
            // Net plane (y = 0) below the net top.
            if state.position.y * next.position.y < 0.0 {
                let f = bisect(|f| ball_at(f).position.y * state.position.y.signum(), 1.0);
                let p = ball_at(f).position;
                if p.x.abs() <= s.table_half_width + s.net_overhang
                    && p.z > 0.0
                    && p.z <= s.net_height + params.radius
                {
                    consider(Some(f), Contact::Net);
                }
            }
            // Paddle disc, both faces, outside the contact cooldown.
            if t_sub + t_local - ep.last_paddle_hit > PADDLE_CONTACT_COOLDOWN {
                let dist = |f: f64| {
                    let pad = paddle_at(f);
                    (ball_at(f).position - pad.position).dot(&pad.normal)
                };
                let d0 = dist(0.0);
                let d1 = dist(1.0);
                if d0.abs() > 1e-9 && d0 * d1 <= 0.0 {
                    let f = bisect(|f| dist(f) * d0.signum(), 1.0);
                    let pad = paddle_at(f);
                    let bp = ball_at(f).position;
                    let radial = (bp - pad.position) - (bp - pad.position).dot(&pad.normal) * pad.normal;
                    if radial.norm() <= s.paddle_radius + params.radius {
                        consider(Some(f), Contact::Paddle { back_side: d0 < 0.0 });
                    }
                }
            }

            let Some((frac, contact)) = best else {
                state = next;
                break;
            };

            // Advance to the contact time and apply the response.
            let mut at = ball_at(frac);
            let t_event = t_sub + t_local + frac * remaining;
            match contact {
                Contact::Table => {
                    let kind = if at.position.y < 0.0 { EventKind::TableArm } else { EventKind::TableOpp };
                    events.push(GameEvent { kind, time: t_event, position: at.position });
                    at = crate::dynamics::bounce(&at, &Vec3::new(0.0, 0.0, 1.0), ep.surface.table_restitution)
                        .expect("unit normal");
                    at.position.z = at.position.z.max(1e-9);
                }
                Contact::Ground => {
                    ep.ground_emitted = true;
                    events.push(GameEvent { kind: EventKind::Ground, time: t_event, position: at.position });
                    at = crate::dynamics::bounce(&at, &Vec3::new(0.0, 0.0, 1.0), 0.3).expect("unit normal");
                    at.position.z = at.position.z.max(s.floor_z() + 1e-9);
                }
                Contact::Net => {
                    events.push(GameEvent { kind: EventKind::Net, time: t_event, position: at.position });
                    if at.position.z >= s.net_height - params.radius {
                        // Clipping the tape: the ball stumbles over, damped.
                        at.velocity.y *= 0.6;
                    } else {
                        // Full net contact: the ball drops back.
                        at.velocity.y *= -0.15;
                        at.velocity.x *= 0.8;
                    }
                    // Nudge off the plane so the crossing is not re-detected.
                    at.position.y += 1e-9 * at.velocity.y.signum();
                }
                Contact::Paddle { back_side } => {
                    let mut pad = paddle_at(frac);
                    let v_frac = (q_end - q_start) / h;
                    pad.velocity = self.cfg.chain.fk_with_velocity(
                        &(q_start + (q_end - q_start) * ((t_local + frac * remaining) / h)),
                        &v_frac,
                    ).velocity;
                    if back_side {
                        pad.normal = -pad.normal;
                    }
                    match paddle_contact(&at, &pad, ep.surface.paddle_restitution).expect("unit normal") {
                        ContactOutcome::Hit(hit_state) => {
                            ep.last_paddle_hit = t_event;
                            events.push(GameEvent {
                                kind: EventKind::PaddleArm,
                                time: t_event,
                                position: at.position,
                            });
                            at = hit_state;
                        }
                        ContactOutcome::NoContact => {}
                    }
                }
            }
            state = at;
            t_local += frac * remaining;
        }

        ep.ball = BallState { time: t_sub + h, ..state };
    }

    fn update_violations(&self, ep: &mut Episode) {
        let spec = ep.rewards.spec().clone();
        let hz = self.cfg.control_hz as f64;
        // Velocity: seven limits applied to joints 2..=8.
        for j in 1..DOF {
            if ep.v[j].abs() > spec.velocity_limits[j - 1] {
                ep.violations.velocity_points += 1;
            }
        }
        ep.violations.velocity_total += (DOF - 1) as u64;

        let a = (ep.v - ep.prev_v) * hz;
        for j in 0..DOF {
            if a[j].abs() > spec.acceleration_limits[j] {
                ep.violations.acceleration_points += 1;
            }
        }
        ep.violations.acceleration_total += DOF as u64;

        let jerk = (a - ep.prev_a) * hz;
        for j in 0..DOF {
            if jerk[j].abs() > spec.jerk_limits[j] {
                ep.violations.jerk_points += 1;
            }
        }
        ep.violations.jerk_total += DOF as u64;

        for (j, joint) in self.cfg.chain.joints.iter().enumerate() {
            let (lo, hi) = joint.position_limits;
            if ep.q[j] < lo + spec.joint_angle_buffer || ep.q[j] > hi - spec.joint_angle_buffer {
                ep.violations.angle_points += 1;
            }
        }
        ep.violations.angle_total += DOF as u64;

        ep.prev_v = ep.v;
        ep.prev_a = a;
    }

    /// One per-step observation slice: delayed joints plus delayed, noised
    /// ball position.
    fn observe_slice(&self, ep: &mut Episode) -> Vec<f64> {
        let t = ep.t;
        let ball =
            ep.ball_buf.delayed_view(t, ep.latencies.ball_obs).expect("seeded at reset");
        let ball = self.cfg.fidelity.noise.apply(&Vec3::new(ball[0], ball[1], ball[2]), &mut ep.rng);
        let arm = ep.arm_buf.delayed_view(t, ep.latencies.arm_obs).expect("seeded at reset");
        let gantry = ep.gantry_buf.delayed_view(t, ep.latencies.gantry_obs).expect("seeded at reset");

        match self.cfg.observation_mode() {
            ObservationMode::Joint => {
                let mut s = Vec::with_capacity(DOF + 3);
                s.extend_from_slice(&gantry);
                s.extend_from_slice(&arm);
                s.extend_from_slice(ball.as_slice());
                s
            }
            ObservationMode::Task => {
                let mut q = JointVec::zeros();
                q[0] = gantry[0];
                q[1] = gantry[1];
                for j in 2..DOF {
                    q[j] = arm[j - 2];
                }
                let pose = self.cfg.chain.fk_unchecked(&q);
                vec![
                    pose.position.x,
                    pose.position.y,
                    pose.position.z,
                    pose.roll,
                    pose.yaw,
                    ball.x,
                    ball.y,
                    ball.z,
                ]
            }
        }
    }

    fn stack_history(&self, ep: &Episode) -> Observation {
        let per_step = self.cfg.per_step_obs_dim();
        let mut data = Vec::with_capacity(per_step * OBS_HISTORY);
        for slice in &ep.history {
            data.extend_from_slice(slice);
        }
        Observation { data, per_step }
    }
}

#[derive(Debug, Clone, Copy)]
enum Contact {
    Table,
    Ground,
    Net,
    Paddle { back_side: bool },
}

fn push_once(events: &mut Vec<GameEvent>, kind: EventKind, time: f64, position: Vec3) {
    if !events.iter().any(|e| e.kind == kind) {
        events.push(GameEvent { kind, time, position });
    }
}

/// Bisection for the smallest root of `f` in `(0, hi]`, assuming `f(0) > 0`
/// and `f(hi) <= 0`. Returns the crossing fraction.
fn bisect(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = hi;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
