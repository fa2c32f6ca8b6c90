//! Pinhole camera model with optional pixel quantization and detection noise.

use super::TrackingError;
use crate::Vec3;
use nalgebra::{Isometry3, Matrix3x4, Point3, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// World -> camera transform (camera looks along +z, x right, y down).
    pub pose: Isometry3<f64>,
    pub resolution: (u32, u32),
    /// Round detections to the integer pixel grid.
    pub quantize: bool,
    /// Gaussian detection noise in pixels.
    pub pixel_noise_std: f64,
}

impl CameraModel {
    /// Camera at `position` looking at `target`, world +z as the up hint.
    pub fn look_at(position: Vec3, target: Vec3, fx: f64) -> Self {
        let view = Isometry3::look_at_rh(
            &Point3::from(position),
            &Point3::from(target),
            &nalgebra::Vector3::z(),
        );
        // look_at_rh gives a camera looking along -z; flip to +z forward with
        // x right, y down (the usual computer-vision convention).
        let flip = nalgebra::UnitQuaternion::from_axis_angle(
            &nalgebra::Vector3::x_axis(),
            std::f64::consts::PI,
        );
        let pose = Isometry3::from_parts(nalgebra::Translation3::identity(), flip) * view;
        Self {
            fx,
            fy: fx,
            cx: 640.0,
            cy: 512.0,
            pose,
            resolution: (1280, 1024),
            quantize: false,
            pixel_noise_std: 0.0,
        }
    }

    pub fn center(&self) -> Vec3 {
        self.pose.inverse().translation.vector
    }

    /// Ideal pinhole projection (no quantization, no noise).
    pub fn project(&self, point: &Vec3) -> Result<Vector2<f64>, TrackingError> {
        let p_cam = self.pose * Point3::from(*point);
        if p_cam.z <= 1e-9 {
            return Err(TrackingError::BehindCamera { z: p_cam.z });
        }
        Ok(Vector2::new(
            self.fx * p_cam.x / p_cam.z + self.cx,
            self.fy * p_cam.y / p_cam.z + self.cy,
        ))
    }

    /// Projection as the synthetic detector sees it: Gaussian pixel noise
    /// followed by quantization to the integer grid when enabled.
    pub fn detect<R: Rng>(&self, point: &Vec3, rng: &mut R) -> Result<Vector2<f64>, TrackingError> {
        let mut px = self.project(point)?;
        if self.pixel_noise_std > 0.0 {
            let n = Normal::new(0.0, self.pixel_noise_std).expect("finite std");
            px.x += n.sample(rng);
            px.y += n.sample(rng);
        }
        if self.quantize {
            px.x = px.x.round();
            px.y = px.y.round();
        }
        Ok(px)
    }

    /// 3x4 projection matrix `K [R | t]`.
    pub fn projection_matrix(&self) -> Matrix3x4<f64> {
        let r = self.pose.rotation.to_rotation_matrix();
        let t = self.pose.translation.vector;
        let mut rt = Matrix3x4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                rt[(i, j)] = r[(i, j)];
            }
            rt[(i, 3)] = t[i];
        }
        let k = nalgebra::Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0);
        k * rt
    }
}

/// A 2D ball detection from one camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection2D {
    pub pixel: Vector2<f64>,
    pub velocity_px: Vector2<f64>,
    pub score: f64,
    pub camera_id: usize,
    pub timestamp: f64,
}
