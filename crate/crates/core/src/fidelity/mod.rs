//! Sim-fidelity layer: latency injection, observation noise, and per-episode
//! domain randomization.
//!
//! Latency is realized by storing timestamped signal histories in a
//! [`TimedBuffer`] and linearly interpolating the buffer at `now - latency`.
//! The same mechanism serves observations and actions.

mod latency;
mod noise;
mod randomization;
mod timed_buffer;

pub use latency::{EpisodeLatencies, LatencyComponent, LatencyModel};
pub use noise::NoiseModel;
pub use randomization::{RandomRange, RandomizationSpec, SurfaceOverrides};
pub use timed_buffer::{TimedBuffer, TimedBufferError};
