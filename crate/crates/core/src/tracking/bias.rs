//! Triangulation-bias study: quantify the systematic 3D reconstruction error
//! of a stereo pair along the playing area for competing camera placements.

use super::camera::CameraModel;
use super::triangulate::triangulate_dlt;
use super::TrackingError;
use crate::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Study settings. Positions are sampled on the table center line
/// (`x = 0`) at `height` over a grid of y positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasConfig {
    pub y_min: f64,
    pub y_max: f64,
    pub y_steps: usize,
    pub height: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self { y_min: -1.37, y_max: 1.37, y_steps: 15, height: 0.25, samples: 20_000, seed: 7 }
    }
}

/// One grid point of the study output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasRow {
    pub y_position_m: f64,
    pub config: String,
    /// Norm of the mean reconstruction error.
    pub mean_bias_m: f64,
    /// RMS spread of the reconstruction error around its mean.
    pub std_m: f64,
}

/// Both cameras above one end of the table: a short baseline and shallow
/// vertex angles over most of the playing area.
pub fn same_side_pair(sigma_px: f64, quantize: bool) -> [CameraModel; 2] {
    let make = |x: f64| {
        let mut c = CameraModel::look_at(Vec3::new(x, -2.2, 2.0), Vec3::new(0.0, 0.0, 0.25), 700.0);
        c.pixel_noise_std = sigma_px;
        c.quantize = quantize;
        c
    };
    [make(-0.35), make(0.35)]
}

/// One camera above each end of the table: near-orthogonal viewpoints.
pub fn opposite_side_pair(sigma_px: f64, quantize: bool) -> [CameraModel; 2] {
    let make = |y: f64| {
        let mut c = CameraModel::look_at(Vec3::new(0.0, y, 2.0), Vec3::new(0.0, 0.0, 0.25), 700.0);
        c.pixel_noise_std = sigma_px;
        c.quantize = quantize;
        c
    };
    [make(-2.2), make(2.2)]
}

/// Monte-Carlo bias curves for two stereo configurations.
///
/// For each grid position the true point is projected through both cameras
/// of a pair (with that pair's noise/quantization), triangulated back, and
/// the signed reconstruction errors are accumulated.
pub fn bias_study(
    config_a: (&str, &[CameraModel; 2]),
    config_b: (&str, &[CameraModel; 2]),
    cfg: &BiasConfig,
) -> Result<Vec<BiasRow>, TrackingError> {
    let mut rows = Vec::new();
    for (name, pair) in [config_a, config_b] {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for step in 0..cfg.y_steps {
            let y = cfg.y_min
                + (cfg.y_max - cfg.y_min) * step as f64 / (cfg.y_steps.max(2) - 1) as f64;
            let truth = Vec3::new(0.0, y, cfg.height);
            let mut sum = Vec3::zeros();
            let mut sum_sq = 0.0;
            let mut errors = Vec::with_capacity(cfg.samples);
            for _ in 0..cfg.samples {
                let d0 = pair[0].detect(&truth, &mut rng)?;
                let d1 = pair[1].detect(&truth, &mut rng)?;
                let rec = triangulate_dlt(&[(d0, &pair[0]), (d1, &pair[1])])?;
                let err = rec - truth;
                sum += err;
                errors.push(err);
            }
            let mean = sum / cfg.samples as f64;
            for err in &errors {
                sum_sq += (err - mean).norm_squared();
            }
            rows.push(BiasRow {
                y_position_m: y,
                config: name.to_string(),
                mean_bias_m: mean.norm(),
                std_m: (sum_sq / cfg.samples as f64).sqrt(),
            });
        }
    }
    Ok(rows)
}

/// CSV rendering: `y_position_m,config,mean_bias_m,std_m`.
pub fn rows_to_csv(rows: &[BiasRow]) -> String {
    let mut out = String::from("y_position_m,config,mean_bias_m,std_m\n");
    for r in rows {
        out.push_str(&format!(
            "{:.4},{},{:.9},{:.9}\n",
            r.y_position_m, r.config, r.mean_bias_m, r.std_m
        ));
    }
    out
}
