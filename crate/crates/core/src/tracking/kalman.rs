//! Recursive Kalman filtering of 3D ball tracks.
//!
//! Constant-velocity model with gravity as a known control input. Updates use
//! the Joseph form so the covariance stays symmetric positive definite, and
//! measurements are gated on squared Mahalanobis distance.

use super::TrackingError;
use crate::dynamics::GRAVITY;
use crate::Vec3;
use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

type Vec6 = SVector<f64, 6>;
type Mat6 = SMatrix<f64, 6, 6>;
type Mat3x6 = SMatrix<f64, 3, 6>;
type Mat3 = SMatrix<f64, 3, 3>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KalmanParams {
    /// Velocity process noise intensity (m/s^2 per sqrt(s)).
    pub process_noise: f64,
    /// Measurement noise standard deviation (m).
    pub measurement_noise: f64,
    /// Gate on the squared Mahalanobis distance of the innovation.
    pub gate: f64,
    /// Consecutive gated hits to promote a tentative track.
    pub hits_to_activate: u32,
    /// Consecutive misses before termination.
    pub misses_to_terminate: u32,
}

impl Default for KalmanParams {
    fn default() -> Self {
        Self {
            process_noise: 1.0,
            measurement_noise: 0.01,
            gate: 9.0,
            hits_to_activate: 3,
            misses_to_terminate: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Active,
    Terminated,
}

/// Position + velocity estimate with covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackState {
    pub mean: Vec6,
    pub covariance: Mat6,
    pub last_update: f64,
    pub status: TrackStatus,
    pub consecutive_hits: u32,
    pub consecutive_misses: u32,
}

impl TrackState {
    pub fn new(position: Vec3, t: f64, position_var: f64, velocity_var: f64) -> Self {
        let mut mean = Vec6::zeros();
        for i in 0..3 {
            mean[i] = position[i];
        }
        let mut cov = Mat6::zeros();
        for i in 0..3 {
            cov[(i, i)] = position_var;
            cov[(i + 3, i + 3)] = velocity_var;
        }
        Self {
            mean,
            covariance: cov,
            last_update: t,
            status: TrackStatus::Tentative,
            consecutive_hits: 0,
            consecutive_misses: 0,
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.mean[0], self.mean[1], self.mean[2])
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(self.mean[3], self.mean[4], self.mean[5])
    }

    fn is_spd(&self) -> bool {
        let sym = 0.5 * (self.covariance + self.covariance.transpose());
        sym.cholesky().is_some()
    }
}

/// One predict(+update) cycle.
///
/// Prediction integrates the ballistic model: position += v dt + g dt^2 / 2,
/// velocity += g dt, with process noise `q^2 dt` on the velocity states. A
/// measurement is fused only when its squared Mahalanobis distance passes the
/// gate; gated-out measurements count as misses.
pub fn kalman_step(
    track: &TrackState,
    measurement: Option<&Vec3>,
    t: f64,
    params: &KalmanParams,
) -> Result<TrackState, TrackingError> {
    if !track.is_spd() {
        return Err(TrackingError::NotSpd);
    }
    if t < track.last_update {
        return Err(TrackingError::TimeReversed { t, last: track.last_update });
    }
    let dt = t - track.last_update;
    let mut out = track.clone();

    // Predict.
    let mut f = Mat6::identity();
    for i in 0..3 {
        f[(i, i + 3)] = dt;
    }
    let g = Vec3::new(0.0, 0.0, -GRAVITY);
    let mut mean = f * out.mean;
    for i in 0..3 {
        mean[i] += 0.5 * g[i] * dt * dt;
        mean[i + 3] += g[i] * dt;
    }
    let mut q = Mat6::zeros();
    let qv = params.process_noise * params.process_noise * dt;
    for i in 3..6 {
        q[(i, i)] = qv;
    }
    let mut cov = f * out.covariance * f.transpose() + q;

    out.last_update = t;

    // Update.
    let mut gated_hit = false;
    if let Some(z) = measurement {
        let mut h = Mat3x6::zeros();
        for i in 0..3 {
            h[(i, i)] = 1.0;
        }
        let r = Mat3::identity() * params.measurement_noise * params.measurement_noise;
        let innovation = z - Vec3::new(mean[0], mean[1], mean[2]);
        let s = h * cov * h.transpose() + r;
        let s_inv = s.try_inverse().ok_or(TrackingError::NotSpd)?;
        let d2 = (innovation.transpose() * s_inv * innovation)[(0, 0)];
        if d2 < params.gate {
            let k = cov * h.transpose() * s_inv;
            mean += k * innovation;
            // Joseph form keeps the covariance SPD.
            let ikh = Mat6::identity() - k * h;
            cov = ikh * cov * ikh.transpose() + k * r * k.transpose();
            gated_hit = true;
        }
    }

    out.mean = mean;
    out.covariance = 0.5 * (cov + cov.transpose());
    if gated_hit {
        out.consecutive_hits += 1;
        out.consecutive_misses = 0;
        if out.status == TrackStatus::Tentative && out.consecutive_hits >= params.hits_to_activate {
            out.status = TrackStatus::Active;
        }
    } else {
        out.consecutive_misses += 1;
        out.consecutive_hits = 0;
        if out.consecutive_misses >= params.misses_to_terminate {
            out.status = TrackStatus::Terminated;
        }
    }
    Ok(out)
}

/// Single-ball track manager: spawns a track on the first measurement,
/// steps it, and re-spawns after termination.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub params: KalmanParams,
    pub track: Option<TrackState>,
}

impl Tracker {
    pub fn new(params: KalmanParams) -> Self {
        Self { params, track: None }
    }

    pub fn observe(&mut self, measurement: Option<&Vec3>, t: f64) -> Option<&TrackState> {
        match (&mut self.track, measurement) {
            (None, Some(z)) => {
                self.track = Some(TrackState::new(*z, t, 0.01, 25.0));
            }
            (None, None) => {}
            (Some(track), m) => {
                match kalman_step(track, m, t, &self.params) {
                    Ok(next) => {
                        if next.status == TrackStatus::Terminated {
                            self.track = None;
                        } else {
                            *track = next;
                        }
                    }
                    Err(_) => self.track = None,
                }
            }
        }
        self.track.as_ref()
    }
}
