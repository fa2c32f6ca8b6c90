//! Timestamped ring buffer with linear interpolation.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Default capacity: >= 2.5s of samples at 100Hz, comfortably covering the
/// largest scaled latency plus jitter.
pub const DEFAULT_CAPACITY: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum TimedBufferError {
    #[error("interpolation on empty buffer")]
    Empty,
    #[error("timestamp {t} not after newest sample {newest}")]
    NonMonotonicTimestamp { t: f64, newest: f64 },
    #[error("sample dimension {got} does not match buffer dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// Ring of `(timestamp, value)` samples with strictly increasing timestamps.
///
/// Queries clamp to the oldest/newest sample when outside the buffered range;
/// extrapolation is deliberately not done here (the real-environment bridge
/// layers its own extrapolation on top).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimedBuffer {
    capacity: usize,
    dim: usize,
    samples: VecDeque<(f64, Vec<f64>)>,
}

impl TimedBuffer {
    pub fn new(dim: usize) -> Self {
        Self::with_capacity(dim, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        assert!(capacity >= 2, "capacity must hold at least two samples");
        Self { capacity, dim, samples: VecDeque::with_capacity(capacity.min(1024)) }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn newest_time(&self) -> Option<f64> {
        self.samples.back().map(|(t, _)| *t)
    }

    pub fn oldest_time(&self) -> Option<f64> {
        self.samples.front().map(|(t, _)| *t)
    }

    /// Append a sample; evicts the oldest sample once at capacity.
    pub fn push(&mut self, t: f64, value: &[f64]) -> Result<(), TimedBufferError> {
        if value.len() != self.dim {
            return Err(TimedBufferError::DimensionMismatch { got: value.len(), expected: self.dim });
        }
        if let Some(newest) = self.newest_time() {
            if t <= newest {
                return Err(TimedBufferError::NonMonotonicTimestamp { t, newest });
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((t, value.to_vec()));
        Ok(())
    }

    /// Linear interpolation at `t_query`, clamped to the buffered range.
    pub fn interpolate(&self, t_query: f64) -> Result<Vec<f64>, TimedBufferError> {
        if self.samples.is_empty() {
            return Err(TimedBufferError::Empty);
        }
        let (t0, v0) = self.samples.front().unwrap();
        if t_query <= *t0 {
            return Ok(v0.clone());
        }
        let (tn, vn) = self.samples.back().unwrap();
        if t_query >= *tn {
            return Ok(vn.clone());
        }
        // Bracketing pair via binary search over timestamps.
        let (mut lo, mut hi) = (0usize, self.samples.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.samples[mid].0 <= t_query {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ta, va) = &self.samples[lo];
        let (tb, vb) = &self.samples[hi];
        let alpha = (t_query - ta) / (tb - ta);
        Ok(va.iter().zip(vb).map(|(a, b)| a + alpha * (b - a)).collect())
    }

    /// The signal as seen `latency` seconds in the past.
    pub fn delayed_view(&self, now: f64, latency: f64) -> Result<Vec<f64>, TimedBufferError> {
        self.interpolate(now - latency)
    }

    /// Committed samples, oldest first.
    pub fn iter_samples(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.samples.iter().map(|(t, v)| (*t, v.as_slice()))
    }
}
