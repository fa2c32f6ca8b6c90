//! Multi-rate sensor fusion: per-modality Savitzky-Golay smoothing over the
//! buffered samples, then interpolation (or bounded extrapolation) to the
//! environment step timestamp.

use super::savgol::SavitzkyGolay;
use crate::fidelity::TimedBuffer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Ball,
    ArmJoints,
    GantryJoints,
}

/// One sensor's timestamped sample stream at its native rate.
#[derive(Debug, Clone)]
pub struct SensorStream {
    pub modality: Modality,
    pub rate_hz: f64,
    pub buffer: TimedBuffer,
}

impl SensorStream {
    pub fn new(modality: Modality, rate_hz: f64, dim: usize) -> Self {
        assert!(rate_hz > 0.0);
        Self { modality, rate_hz, buffer: TimedBuffer::new(dim) }
    }

    pub fn push(&mut self, t: f64, value: &[f64]) {
        // Out-of-order samples are dropped; committed samples are immutable.
        let _ = self.buffer.push(t, value);
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("empty sensor stream: {0:?}")]
    EmptyStream(Modality),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub window: usize,
    pub order: usize,
    /// Longest extrapolation beyond the newest sample (s); queries further
    /// out are clamped and flagged stale.
    pub max_extrapolation: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { window: 9, order: 2, max_extrapolation: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedValue {
    pub value: Vec<f64>,
    /// Set when the query exceeded the newest sample by more than the
    /// extrapolation budget.
    pub stale: bool,
}

/// Smooth one stream and evaluate it at `t_query`.
///
/// Inside the buffered range the smoothed samples are linearly interpolated;
/// past the newest sample the last two smoothed samples are linearly
/// extrapolated, up to the configured budget.
pub fn fuse_sensor_stream(
    stream: &SensorStream,
    t_query: f64,
    cfg: &FusionConfig,
) -> Result<FusedValue, FusionError> {
    let buf = &stream.buffer;
    let n = buf.len();
    if n == 0 {
        return Err(FusionError::EmptyStream(stream.modality));
    }
    let dim = buf.dim();
    // Materialize the buffer tail (timestamps + per-dimension series).
    let take = n.min(64);
    let mut times = Vec::with_capacity(take);
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(take); dim];
    let newest = buf.newest_time().unwrap();
    // TimedBuffer has no index access by design; reconstruct via interpolation
    // at its own sample times would be lossy, so iterate the raw samples.
    for (t, v) in buf.iter_samples().skip(n - take) {
        times.push(t);
        for d in 0..dim {
            series[d].push(v[d]);
        }
    }

    // Shrink the window when the buffer holds fewer samples than configured.
    let max_window = if take % 2 == 1 { take } else { take - 1 };
    let window = {
        let w = cfg.window.min(max_window.max(1));
        if w % 2 == 1 {
            w
        } else {
            w - 1
        }
    };
    let sg = SavitzkyGolay::new(window, cfg.order.min(window - 1));
    // Interior samples get the symmetric convolution; positions within half a
    // window of an edge are re-fit one-sidedly over the nearest full window so
    // polynomials up to the filter order survive at the boundaries too (and
    // linear extrapolation from the tail stays exact).
    let smoothed: Vec<Vec<f64>> = series.iter().map(|s| sg.smooth_endpoint_exact(s)).collect();

    let mut stale = false;
    let t_eff = if t_query > newest + cfg.max_extrapolation {
        stale = true;
        newest + cfg.max_extrapolation
    } else {
        t_query
    };

    let m = times.len();
    let value: Vec<f64> = if m == 1 {
        smoothed.iter().map(|s| s[0]).collect()
    } else if t_eff <= times[0] {
        smoothed.iter().map(|s| s[0]).collect()
    } else if t_eff > times[m - 1] {
        // Linear extrapolation from the last two smoothed samples.
        let (ta, tb) = (times[m - 2], times[m - 1]);
        let span = (tb - ta).max(1e-12);
        let alpha = (t_eff - tb) / span;
        smoothed.iter().map(|s| s[m - 1] + alpha * (s[m - 1] - s[m - 2])).collect()
    } else {
        // Interior: bracket and lerp.
        let mut hi = 1;
        while times[hi] < t_eff {
            hi += 1;
        }
        let lo = hi - 1;
        let alpha = (t_eff - times[lo]) / (times[hi] - times[lo]).max(1e-12);
        smoothed.iter().map(|s| s[lo] + alpha * (s[hi] - s[lo])).collect()
    };

    Ok(FusedValue { value, stale })
}

/// Fuse several streams to one observation vector (streams concatenated in
/// the order given).
pub fn fuse_sensor_observation(
    streams: &[&SensorStream],
    t_query: f64,
    cfg: &FusionConfig,
) -> Result<FusedValue, FusionError> {
    let mut value = Vec::new();
    let mut stale = false;
    for s in streams {
        let fused = fuse_sensor_stream(s, t_query, cfg)?;
        stale |= fused.stale;
        value.extend(fused.value);
    }
    Ok(FusedValue { value, stale })
}
