//! Emulation of the real-robot environment path: asynchronous multi-rate
//! sensor fusion, contact inference from tracked positions, episode-start
//! detection, predictive command safety filtering, and adaptive step
//! throttling.

mod bridge;
mod fusion;
mod referee;
mod safety;
mod savgol;
mod throttle;

pub use bridge::{BridgeConfig, BridgeStep, RealBridgeEnv};
pub use fusion::{
    fuse_sensor_observation, fuse_sensor_stream, FusedValue, FusionConfig, FusionError, Modality,
    SensorStream,
};
pub use referee::{
    detect_episode_start, infer_contact_events, ContactGeometry, EpisodeStartSpec, PaddleSample,
    Region,
};
pub use safety::{filter_command_safety, SafeCommand, SafetyLimits};
pub use savgol::SavitzkyGolay;
pub use throttle::{throttle_step, Throttler};
