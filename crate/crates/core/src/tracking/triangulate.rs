//! Direct linear transform triangulation.

use super::camera::CameraModel;
use super::TrackingError;
use crate::Vec3;
use nalgebra::{DMatrix, Vector2};

/// Linear least-squares 3D point from two or more pixel observations: the
/// smallest right singular vector of the stacked `2n x 4` DLT system,
/// dehomogenized.
pub fn triangulate_dlt(
    observations: &[(Vector2<f64>, &CameraModel)],
) -> Result<Vec3, TrackingError> {
    if observations.len() < 2 {
        return Err(TrackingError::Underdetermined);
    }
    // Distinct camera centers are required for a well-posed intersection.
    let c0 = observations[0].1.center();
    if observations.iter().all(|(_, cam)| (cam.center() - c0).norm() < 1e-9) {
        return Err(TrackingError::Underdetermined);
    }

    let n = observations.len();
    let mut a = DMatrix::<f64>::zeros(2 * n, 4);
    for (i, (px, cam)) in observations.iter().enumerate() {
        let p = cam.projection_matrix();
        for col in 0..4 {
            a[(2 * i, col)] = px.x * p[(2, col)] - p[(0, col)];
            a[(2 * i + 1, col)] = px.y * p[(2, col)] - p[(1, col)];
        }
    }
    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    // The system has rank 3 at a proper intersection; near-parallel rays
    // collapse the third singular value.
    let cond = sv[0] / sv[2].max(f64::MIN_POSITIVE);
    if cond > 1e8 {
        return Err(TrackingError::DegenerateGeometry { cond });
    }
    let vt = svd.v_t.expect("requested V^T");
    let h = vt.row(3);
    let w = h[3];
    if w.abs() < 1e-12 {
        return Err(TrackingError::DegenerateGeometry { cond: f64::INFINITY });
    }
    Ok(Vec3::new(h[0] / w, h[1] / w, h[2] / w))
}
