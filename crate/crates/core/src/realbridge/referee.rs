//! Referee-side inference: episode-start detection and contact events from
//! tracked ball positions, using closest-point thresholds tuned for
//! precision (ambiguous frames produce no event).

use crate::env::{EventKind, GameEvent};
use crate::Vec3;
use serde::{Deserialize, Serialize};

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Region {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeStartSpec {
    pub region: Region,
    /// Ball y-velocity must be below this (toward the robot) to qualify.
    pub vy_threshold: f64,
    /// Consecutive qualifying frames required.
    pub debounce_frames: usize,
}

impl Default for EpisodeStartSpec {
    fn default() -> Self {
        Self {
            region: Region { min: [-1.0, 0.8, 0.1], max: [1.0, 2.5, 1.5] },
            vy_threshold: -1.0,
            debounce_frames: 2,
        }
    }
}

/// Episode start: a tracked ball inside the start region moving toward the
/// robot for at least `debounce_frames` consecutive frames. Returns the time
/// of the first qualifying frame.
pub fn detect_episode_start(track: &[(f64, Vec3)], spec: &EpisodeStartSpec) -> Option<f64> {
    let mut run = 0usize;
    let mut run_start = 0.0;
    for i in 1..track.len() {
        let (t0, p0) = track[i - 1];
        let (t1, p1) = track[i];
        let dt = t1 - t0;
        if dt <= 0.0 {
            run = 0;
            continue;
        }
        let vy = (p1.y - p0.y) / dt;
        if spec.region.contains(&p1) && vy < spec.vy_threshold {
            if run == 0 {
                run_start = t1;
            }
            run += 1;
            if run >= spec.debounce_frames {
                return Some(run_start);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Geometry and thresholds for contact inference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactGeometry {
    /// z of the table surface.
    pub table_plane_z: f64,
    pub table_half_width: f64,
    pub table_half_length: f64,
    pub net_height: f64,
    pub net_overhang: f64,
    /// z of the floor.
    pub floor_z: f64,
    /// Ball must pass within this distance of the table plane (m).
    pub table_threshold: f64,
    /// Paddle plane proximity threshold (m).
    pub paddle_threshold: f64,
    /// Ground event when the ball drops below floor_z + this margin.
    pub ground_margin: f64,
    pub paddle_radius: f64,
    /// Events of one kind closer than this are merged (s).
    pub merge_window: f64,
}

impl Default for ContactGeometry {
    fn default() -> Self {
        Self {
            table_plane_z: 0.0,
            table_half_width: 0.7625,
            table_half_length: 1.37,
            net_height: 0.1525,
            net_overhang: 0.1525,
            floor_z: -0.76,
            table_threshold: 0.03,
            paddle_threshold: 0.05,
            ground_margin: 0.05,
            paddle_radius: 0.09,
            merge_window: 0.05,
        }
    }
}

/// A timestamped paddle plane (position + unit normal) for paddle-contact
/// inference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaddleSample {
    pub t: f64,
    pub position: Vec3,
    pub normal: Vec3,
}

/// Infer contact events from a time-ordered ball track.
///
/// - `TABLE_ARM`/`TABLE_OPP`: vertical velocity reversal within the table
///   threshold of the table plane, side decided by the y sign.
/// - `NET`: crossing of the net plane below the net top, or a y-velocity
///   reversal next to the plane below the net top.
/// - `PADDLE_ARM`: velocity reversal along the paddle normal within the
///   paddle threshold of the paddle plane (requires paddle samples).
/// - `GROUND`: first drop below the floor margin.
pub fn infer_contact_events(
    track: &[(f64, Vec3)],
    paddle: &[PaddleSample],
    geom: &ContactGeometry,
) -> Vec<GameEvent> {
    let mut events: Vec<GameEvent> = Vec::new();
    let mut push = |events: &mut Vec<GameEvent>, kind: EventKind, time: f64, position: Vec3| {
        if events
            .iter()
            .any(|e| e.kind == kind && (e.time - time).abs() < geom.merge_window)
        {
            return;
        }
        events.push(GameEvent { kind, time, position });
    };

    let paddle_at = |t: f64| -> Option<PaddleSample> {
        if paddle.is_empty() {
            return None;
        }
        let idx = paddle.iter().position(|p| p.t >= t).unwrap_or(paddle.len() - 1);
        Some(paddle[idx])
    };

    let mut ground_done = false;
    for i in 1..track.len().saturating_sub(1) {
        let (tp, pp) = track[i - 1];
        let (t, p) = track[i];
        let (tn, pn) = track[i + 1];
        let dt0 = (t - tp).max(1e-9);
        let dt1 = (tn - t).max(1e-9);
        let vz0 = (p.z - pp.z) / dt0;
        let vz1 = (pn.z - p.z) / dt1;

        // Table bounce: downward then upward near the plane, over the table.
        if (p.z - geom.table_plane_z).abs() < geom.table_threshold
            && vz0 < -0.2
            && vz1 > 0.2
            && p.x.abs() <= geom.table_half_width
            && p.y.abs() <= geom.table_half_length
        {
            let kind = if p.y < 0.0 { EventKind::TableArm } else { EventKind::TableOpp };
            push(&mut events, kind, t, p);
            continue;
        }

        // Ground: first drop below the floor margin.
        if !ground_done && p.z < geom.floor_z + geom.ground_margin {
            ground_done = true;
            push(&mut events, EventKind::Ground, t, p);
            continue;
        }

        // Net: plane crossing below the net top...
        let below_net_top = |z: f64| z > geom.table_plane_z && z < geom.net_height;
        let within_net_x = p.x.abs() <= geom.table_half_width + geom.net_overhang;
        if p.y * pn.y < 0.0 && within_net_x {
            let z_cross = 0.5 * (p.z + pn.z);
            if below_net_top(z_cross + 0.02) {
                push(&mut events, EventKind::Net, t, p);
                continue;
            }
        }
        // ... or a y-velocity reversal right at the plane (ball bounced off
        // the net without crossing).
        let vy0 = (p.y - pp.y) / dt0;
        let vy1 = (pn.y - p.y) / dt1;
        if p.y.abs() < 0.05 && within_net_x && below_net_top(p.z) && vy0 * vy1 < 0.0 && vy0.abs() > 1.0 {
            push(&mut events, EventKind::Net, t, p);
            continue;
        }

        // Paddle: velocity reversal along the paddle normal near the plane.
        if let Some(pad) = paddle_at(t) {
            let d = (p - pad.position).dot(&pad.normal);
            let radial = (p - pad.position) - d * pad.normal;
            if d.abs() < geom.paddle_threshold && radial.norm() <= geom.paddle_radius + 0.04 {
                let v0n = ((p - pp) / dt0).dot(&pad.normal);
                let v1n = ((pn - p) / dt1).dot(&pad.normal);
                if v0n * v1n < 0.0 && v0n.abs() > 0.5 {
                    push(&mut events, EventKind::PaddleArm, t, p);
                }
            }
        }
    }
    events.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
    events
}
