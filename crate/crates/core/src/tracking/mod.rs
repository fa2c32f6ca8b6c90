//! Synthetic stereo perception: pinhole projection, DLT triangulation, the
//! camera-placement bias study, and recursive Kalman filtering of 3D tracks.

mod bias;
mod camera;
mod kalman;
mod metrics;
mod triangulate;

pub use bias::{bias_study, opposite_side_pair, rows_to_csv, same_side_pair, BiasConfig, BiasRow};
pub use camera::{CameraModel, Detection2D};
pub use kalman::{kalman_step, KalmanParams, Tracker, TrackState, TrackStatus};
pub use metrics::evaluate_tracking;
pub use triangulate::triangulate_dlt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrackingError {
    #[error("point behind camera (z = {z})")]
    BehindCamera { z: f64 },
    #[error("triangulation needs at least two cameras with distinct centers")]
    Underdetermined,
    #[error("degenerate geometry: condition number {cond:.3e}")]
    DegenerateGeometry { cond: f64 },
    #[error("covariance is not symmetric positive definite")]
    NotSpd,
    #[error("time went backwards: {t} < {last}")]
    TimeReversed { t: f64, last: f64 },
    #[error("empty ground-truth sequence")]
    EmptyTruth,
}
