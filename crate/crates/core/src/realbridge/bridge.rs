//! Real-environment emulation loop.
//!
//! The simulated environment acts as the plant. Sensors publish at their
//! native rates (ball 125Hz, arm joints 248Hz, gantry 125Hz) into independent
//! streams; observations are fused (smoothed + interpolated/extrapolated) to
//! step timestamps; a referee infers contact events from the ball track and
//! drives the game state machine; commands pass through the predictive
//! safety filter; the throttler keeps step boundaries on the 1/hz grid.

use super::fusion::{fuse_sensor_stream, FusionConfig, Modality, SensorStream};
use super::referee::{detect_episode_start, infer_contact_events, ContactGeometry, EpisodeStartSpec, PaddleSample};
use super::safety::{filter_command_safety, SafetyLimits};
use super::throttle::Throttler;
use crate::env::{
    ActionMode, Env, EnvConfig, EnvError, EventKind, GameEvent, Observation, Outcome, RewardSpec,
    StateMachine, OBS_HISTORY,
};
use crate::dynamics::{JointState, JointVec, DOF};
use crate::Vec3;
use std::collections::VecDeque;

/// Per-step output of the bridge.
#[derive(Debug, Clone)]
pub struct BridgeStep {
    pub observation: Observation,
    /// Referee-scored reward (hit/land inferred from the ball track).
    pub reward: f64,
    pub done: bool,
    pub inferred_events: Vec<GameEvent>,
    pub outcome: Option<Outcome>,
    /// Simulated-clock stage trace: sensor receipt, fusion, inference,
    /// command emission.
    pub stages: Vec<(String, f64)>,
    /// Staleness flag from fusion (extrapolation beyond budget).
    pub stale: bool,
}

#[derive(Debug, Clone)]
pub struct BridgeConfig {
    pub ball_rate_hz: f64,
    pub arm_rate_hz: f64,
    pub gantry_rate_hz: f64,
    pub fusion: FusionConfig,
    pub episode_start: EpisodeStartSpec,
    pub contact_geometry: ContactGeometry,
    pub safety: SafetyLimits,
    /// Uniform half-width of synthetic ball-sensor noise (m).
    pub ball_sensor_noise: f64,
    /// Longest pre-roll while waiting for the episode start (s).
    pub max_start_wait: f64,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self {
            ball_rate_hz: 125.0,
            arm_rate_hz: 248.0,
            gantry_rate_hz: 125.0,
            fusion: FusionConfig::default(),
            episode_start: EpisodeStartSpec::default(),
            contact_geometry: ContactGeometry::default(),
            safety: SafetyLimits::default(),
            ball_sensor_noise: 0.0,
            max_start_wait: 0.3,
        }
    }
}

/// The emulated real environment. Joint-velocity action mode only (the
/// hardware path is velocity-commanded).
pub struct RealBridgeEnv {
    plant: Env,
    cfg: BridgeConfig,
    hz: f64,
    ball_stream: SensorStream,
    arm_stream: SensorStream,
    gantry_stream: SensorStream,
    ball_track: Vec<(f64, Vec3)>,
    paddle_track: Vec<PaddleSample>,
    sm: StateMachine,
    sm_state: usize,
    hit_occurred: bool,
    land_occurred: bool,
    history: VecDeque<Vec<f64>>,
    throttler: Throttler,
    t: f64,
    step_index: u32,
    last_ball_pub: f64,
    last_arm_pub: f64,
    last_gantry_pub: f64,
    noise_rng: rand_chacha::ChaCha8Rng,
    done: bool,
}

impl RealBridgeEnv {
    /// The plant gets zero internal latency and noise: realism comes from
    /// the multi-rate sensor path and the command filter instead.
    pub fn new(mut env_cfg: EnvConfig, cfg: BridgeConfig) -> Result<Self, EnvError> {
        env_cfg.action_mode = ActionMode::JointVelocity;
        env_cfg.fidelity.latency = crate::fidelity::LatencyModel::zero();
        env_cfg.fidelity.noise = crate::fidelity::NoiseModel::none();
        let sm = StateMachine::compile(&env_cfg.state_machine)
            .map_err(crate::env::ConfigError::from)?;
        let hz = env_cfg.control_hz as f64;
        let plant = Env::new(env_cfg)?;
        let initial = sm.initial();
        Ok(Self {
            plant,
            cfg,
            hz,
            ball_stream: SensorStream::new(Modality::Ball, 125.0, 3),
            arm_stream: SensorStream::new(Modality::ArmJoints, 248.0, 6),
            gantry_stream: SensorStream::new(Modality::GantryJoints, 125.0, 2),
            ball_track: Vec::new(),
            paddle_track: Vec::new(),
            sm,
            sm_state: initial,
            hit_occurred: false,
            land_occurred: false,
            history: VecDeque::new(),
            throttler: Throttler::new(hz, 0.0),
            t: 0.0,
            step_index: 0,
            last_ball_pub: f64::NEG_INFINITY,
            last_arm_pub: f64::NEG_INFINITY,
            last_gantry_pub: f64::NEG_INFINITY,
            noise_rng: rand::SeedableRng::seed_from_u64(0),
            done: false,
        })
    }

    pub fn plant(&self) -> &Env {
        &self.plant
    }

    pub fn ball_track(&self) -> &[(f64, Vec3)] {
        &self.ball_track
    }

    /// Reset the plant, then pre-roll with zero commands until the referee
    /// detects the episode start (a ball incoming from the start region).
    pub fn reset_with_seed(&mut self, seed: u64) -> Result<Observation, EnvError> {
        self.plant.reset_with_seed(seed)?;
        self.noise_rng = rand::SeedableRng::seed_from_u64(seed ^ 0x5ba1_ce00);
        self.ball_stream = SensorStream::new(Modality::Ball, self.cfg.ball_rate_hz, 3);
        self.arm_stream = SensorStream::new(Modality::ArmJoints, self.cfg.arm_rate_hz, 6);
        self.gantry_stream = SensorStream::new(Modality::GantryJoints, self.cfg.gantry_rate_hz, 2);
        self.ball_track.clear();
        self.paddle_track.clear();
        self.sm_state = self.sm.initial();
        self.hit_occurred = false;
        self.land_occurred = false;
        self.history = (0..OBS_HISTORY).map(|_| vec![0.0; DOF + 3]).collect();
        self.t = 0.0;
        self.step_index = 0;
        self.last_ball_pub = f64::NEG_INFINITY;
        self.last_arm_pub = f64::NEG_INFINITY;
        self.last_gantry_pub = f64::NEG_INFINITY;
        self.throttler = Throttler::new(self.hz, 0.0);
        self.done = false;

        self.publish_sensors();
        // Pre-roll until the incoming ball is detected.
        let dt = 1.0 / self.hz;
        let max_steps = (self.cfg.max_start_wait / dt).ceil() as usize;
        for _ in 0..max_steps {
            if detect_episode_start(&self.ball_track, &self.cfg.episode_start).is_some() {
                break;
            }
            let r = self.plant.step(&vec![0.0; DOF])?;
            self.t += dt;
            self.publish_sensors();
            if r.done {
                break;
            }
        }
        let slice = self.fused_slice();
        self.history.pop_front();
        self.history.push_back(slice);
        Ok(self.stack())
    }

    fn publish_sensors(&mut self) {
        use rand::Rng;
        let t = self.plant.time();
        let ball = self.plant.ball_state().expect("plant reset").position;
        let joints = self.plant.joint_state().expect("plant reset");
        if t - self.last_ball_pub >= 1.0 / self.cfg.ball_rate_hz - 1e-9 {
            let hw = self.cfg.ball_sensor_noise;
            let noisy = if hw > 0.0 {
                Vec3::new(
                    ball.x + self.noise_rng.gen_range(-hw..=hw),
                    ball.y + self.noise_rng.gen_range(-hw..=hw),
                    ball.z + self.noise_rng.gen_range(-hw..=hw),
                )
            } else {
                ball
            };
            self.ball_stream.push(t, noisy.as_slice());
            self.ball_track.push((t, noisy));
            self.last_ball_pub = t;
        }
        if t - self.last_arm_pub >= 1.0 / self.cfg.arm_rate_hz - 1e-9 {
            self.arm_stream.push(t, &joints.positions.as_slice()[2..8]);
            self.last_arm_pub = t;
        }
        if t - self.last_gantry_pub >= 1.0 / self.cfg.gantry_rate_hz - 1e-9 {
            self.gantry_stream.push(t, &joints.positions.as_slice()[0..2]);
            self.last_gantry_pub = t;
        }
        let pose = self.plant.paddle_pose().expect("plant reset");
        self.paddle_track.push(PaddleSample { t, position: pose.position, normal: pose.normal });
    }

    fn fused_slice(&self) -> Vec<f64> {
        let cfg = &self.cfg.fusion;
        let gantry = fuse_sensor_stream(&self.gantry_stream, self.t, cfg)
            .map(|f| f.value)
            .unwrap_or_else(|_| vec![0.0; 2]);
        let arm = fuse_sensor_stream(&self.arm_stream, self.t, cfg)
            .map(|f| f.value)
            .unwrap_or_else(|_| vec![0.0; 6]);
        let ball = fuse_sensor_stream(&self.ball_stream, self.t, cfg)
            .map(|f| f.value)
            .unwrap_or_else(|_| vec![0.0; 3]);
        let mut s = Vec::with_capacity(DOF + 3);
        s.extend_from_slice(&gantry);
        s.extend_from_slice(&arm);
        s.extend_from_slice(&ball);
        s
    }

    fn stack(&self) -> Observation {
        let per_step = DOF + 3;
        let mut data = Vec::with_capacity(per_step * OBS_HISTORY);
        for s in &self.history {
            data.extend_from_slice(s);
        }
        Observation { data, per_step }
    }

    /// One control step: safety-filter the command, advance the plant,
    /// publish sensors, fuse the next observation, infer events, and score.
    pub fn step(&mut self, action: &JointVec) -> Result<BridgeStep, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let dt = 1.0 / self.hz;
        let joints = self.plant.joint_state().ok_or(EnvError::NotReset)?;
        let state = JointState { positions: joints.positions, velocities: joints.velocities, time: self.t };

        let sensor_receipt = [
            ("ball_receipt".to_string(), self.ball_stream.buffer.newest_time().unwrap_or(0.0)),
            ("arm_receipt".to_string(), self.arm_stream.buffer.newest_time().unwrap_or(0.0)),
            ("gantry_receipt".to_string(), self.gantry_stream.buffer.newest_time().unwrap_or(0.0)),
        ];

        let safe = filter_command_safety(&self.plant.config().chain, &state, action, &self.cfg.safety, dt);
        let command_time = self.t;
        let r = self.plant.step(safe.velocity.as_slice())?;
        self.t += dt;
        self.step_index += 1;
        self.throttler.advance(0.0);
        self.publish_sensors();

        // Fused observation at the new step boundary.
        let fusion_time = self.t;
        let fused = fuse_sensor_stream(&self.ball_stream, self.t, &self.cfg.fusion);
        let stale = fused.map(|f| f.stale).unwrap_or(false);
        let slice = self.fused_slice();
        self.history.pop_front();
        self.history.push_back(slice);

        // Referee: infer events from the recent ball track and advance the
        // inferred state machine.
        let tail_start = self.ball_track.len().saturating_sub(12);
        let inferred = infer_contact_events(
            &self.ball_track[tail_start..],
            &self.paddle_track[self.paddle_track.len().saturating_sub(40)..],
            &self.cfg.contact_geometry,
        );
        let recent: Vec<GameEvent> = inferred
            .into_iter()
            .filter(|e| e.time > self.t - 1.5 * dt && e.time <= self.t + 1e-9)
            .collect();

        let mut reward = 0.0;
        for ev in &recent {
            match ev.kind {
                EventKind::PaddleArm if !self.hit_occurred => {
                    self.hit_occurred = true;
                    reward += 1.0;
                }
                EventKind::TableOpp if self.hit_occurred && !self.land_occurred => {
                    self.land_occurred = true;
                    reward += 1.0;
                }
                _ => {}
            }
            if !self.sm.is_terminal(self.sm_state) && ev.kind != EventKind::Launch {
                self.sm_state = self.sm.transition(self.sm_state, ev.kind).expect("non-terminal");
            }
        }

        let mut outcome = None;
        if self.sm.is_terminal(self.sm_state) {
            self.done = true;
            outcome = self.sm.outcome(self.sm_state);
        }
        if r.done || self.step_index >= self.plant.config().max_episode_steps {
            self.done = true;
        }
        if self.done && outcome.is_none() {
            outcome = Some(if self.land_occurred { Outcome::WinPoint } else { Outcome::LosePoint });
        }

        let mut stages = sensor_receipt.to_vec();
        stages.push(("fusion".to_string(), fusion_time));
        stages.push(("inference".to_string(), fusion_time));
        stages.push(("command".to_string(), command_time));
        stages.push(("step_boundary".to_string(), self.throttler.boundary));

        Ok(BridgeStep {
            observation: self.stack(),
            reward,
            done: self.done,
            inferred_events: recent,
            outcome,
            stages,
            stale,
        })
    }

    /// Evaluation reward spec of the underlying task (hit + land).
    pub fn eval_rewards() -> RewardSpec {
        RewardSpec::evaluation()
    }
}
