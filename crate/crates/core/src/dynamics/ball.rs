//! Ball flight integration and contact responses.

use super::chain::PaddlePose;
use super::DynamicsError;
use crate::Vec3;
use serde::{Deserialize, Serialize};

pub const GRAVITY: f64 = 9.81;

/// Longest internal integration substep (seconds).
const MAX_SUBSTEP: f64 = 1e-3;

/// Instantaneous physical state of the ball in the table frame
/// (x lateral, y toward the opponent, z up, origin on the table surface).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Spin; only enters the dynamics when the Magnus extension is enabled.
    pub angular_velocity: Vec3,
    pub time: f64,
}

impl BallState {
    pub fn at_rest(position: Vec3) -> Self {
        Self { position, velocity: Vec3::zeros(), angular_velocity: Vec3::zeros(), time: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.angular_velocity.iter().all(|v| v.is_finite())
            && self.time.is_finite()
    }
}

/// Physical parameters of the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BallPhysicalParams {
    /// kg
    pub mass: f64,
    /// m
    pub radius: f64,
    pub drag_coefficient: f64,
    pub restitution: f64,
    /// kg/m^3
    pub air_density: f64,
    pub magnus_enabled: bool,
    /// Lift coefficient for the Magnus term `Cm * rho * A * r * (w x v)`.
    pub magnus_coefficient: f64,
    /// 1/s; exponential velocity damping, zero by default.
    pub linear_damping: f64,
}

impl Default for BallPhysicalParams {
    fn default() -> Self {
        Self {
            mass: 0.0027,
            radius: 0.020,
            drag_coefficient: 0.47,
            restitution: 0.9,
            air_density: 1.2,
            magnus_enabled: false,
            magnus_coefficient: 1.0,
            linear_damping: 0.0,
        }
    }
}

impl BallPhysicalParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.mass <= 0.0 {
            return Err(DynamicsError::InvalidParameter("ball mass must be > 0".into()));
        }
        if self.radius <= 0.0 {
            return Err(DynamicsError::InvalidParameter("ball radius must be > 0".into()));
        }
        if !(0.0..=1.2).contains(&self.restitution) {
            return Err(DynamicsError::InvalidParameter("ball restitution must be in [0, 1.2]".into()));
        }
        if self.drag_coefficient < 0.0 {
            return Err(DynamicsError::InvalidParameter("drag coefficient must be >= 0".into()));
        }
        Ok(())
    }

    /// Cross-section area, pi r^2.
    pub fn cross_section(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    /// Steady-state fall speed sqrt(2 m g / (rho Cd A)).
    pub fn terminal_speed(&self) -> f64 {
        (2.0 * self.mass * GRAVITY / (self.air_density * self.drag_coefficient * self.cross_section()))
            .sqrt()
    }

    fn acceleration(&self, velocity: &Vec3, angular_velocity: &Vec3) -> Vec3 {
        let mut a = Vec3::new(0.0, 0.0, -GRAVITY);
        let speed = velocity.norm();
        if self.drag_coefficient > 0.0 && speed > 0.0 {
            let k = 0.5 * self.air_density * self.drag_coefficient * self.cross_section() / self.mass;
            a -= k * speed * velocity;
        }
        if self.magnus_enabled {
            let k = self.magnus_coefficient * self.air_density * self.cross_section() * self.radius
                / self.mass;
            a += k * angular_velocity.cross(velocity);
        }
        if self.linear_damping > 0.0 {
            a -= self.linear_damping * velocity;
        }
        a
    }
}

/// Table and paddle surface parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurfaceParams {
    pub table_restitution: f64,
    pub paddle_restitution: f64,
    /// Height of the table surface above the floor (m).
    pub table_height: f64,
    pub table_half_width: f64,
    pub table_half_length: f64,
    pub net_height: f64,
    /// How far the net extends beyond the table sides (m).
    pub net_overhang: f64,
    pub paddle_mass: f64,
    /// Contact disc radius of the paddle (m).
    pub paddle_radius: f64,
}

impl Default for SurfaceParams {
    fn default() -> Self {
        Self {
            table_restitution: 0.9,
            paddle_restitution: 0.7,
            table_height: 0.76,
            table_half_width: 0.7625,
            table_half_length: 1.37,
            net_height: 0.1525,
            net_overhang: 0.1525,
            paddle_mass: 0.08,
            paddle_radius: 0.09,
        }
    }
}

impl SurfaceParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (name, e) in [("table", self.table_restitution), ("paddle", self.paddle_restitution)] {
            if !(0.0..=1.2).contains(&e) {
                return Err(DynamicsError::InvalidParameter(format!(
                    "{name} restitution {e} outside [0, 1.2]"
                )));
            }
        }
        let geometry = [
            self.table_height,
            self.table_half_width,
            self.table_half_length,
            self.net_height,
            self.paddle_radius,
        ];
        if geometry.iter().any(|g| *g <= 0.0) {
            return Err(DynamicsError::InvalidParameter("surface geometry must be positive".into()));
        }
        Ok(())
    }

    /// z of the floor plane in the table frame (table surface is z = 0).
    pub fn floor_z(&self) -> f64 {
        -self.table_height
    }
}

/// Integrate ball flight under gravity, quadratic drag, and (optionally) the
/// Magnus force.
///
/// Internally substeps at 1ms using a midpoint velocity update with a
/// trapezoidal position update. For drag-free flight the scheme is exact (and
/// therefore time-reversible when called with a negative `dt`); with drag it
/// stays within 1e-4 m/s of a fine-step RK4 reference over half a second.
pub fn step_ball_flight(
    state: &BallState,
    params: &BallPhysicalParams,
    dt: f64,
) -> Result<BallState, DynamicsError> {
    if !dt.is_finite() || dt == 0.0 || dt.abs() > 1.0 {
        return Err(DynamicsError::InvalidParameter(format!("dt {dt} outside (0, 1] seconds")));
    }
    if !state.is_finite() {
        return Err(DynamicsError::NumericalDivergence);
    }
    let n = (dt.abs() / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut p = state.position;
    let mut v = state.velocity;
    let w = state.angular_velocity;
    for _ in 0..n {
        let a0 = params.acceleration(&v, &w);
        let v_half = v + a0 * (0.5 * h);
        let a = params.acceleration(&v_half, &w);
        let v_next = v + a * h;
        p += (v + v_next) * (0.5 * h);
        v = v_next;
    }
    let out = BallState { position: p, velocity: v, angular_velocity: w, time: state.time + dt };
    if !out.is_finite() {
        return Err(DynamicsError::NumericalDivergence);
    }
    Ok(out)
}

/// Reflect the velocity about a surface normal with the given restitution:
/// the normal component is negated and scaled, the tangential component is
/// preserved.
pub fn bounce(state: &BallState, surface_normal: &Vec3, restitution: f64) -> Result<BallState, DynamicsError> {
    let norm = surface_normal.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(DynamicsError::NonUnitNormal { norm });
    }
    let vn = state.velocity.dot(surface_normal);
    let velocity = state.velocity - (1.0 + restitution) * vn * surface_normal;
    Ok(BallState { velocity, ..*state })
}

/// Result of a paddle contact attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactOutcome {
    Hit(BallState),
    /// The ball was not approaching the paddle face; state unchanged.
    NoContact,
}

/// Reflect the ball's velocity relative to the moving paddle about the paddle
/// normal with restitution `e`, then add the paddle velocity back.
///
/// The paddle normal is expected to be oriented toward the incoming ball.
pub fn paddle_contact(ball: &BallState, paddle: &PaddlePose, e: f64) -> Result<ContactOutcome, DynamicsError> {
    let n = paddle.normal;
    let norm = n.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(DynamicsError::NonUnitNormal { norm });
    }
    let rel = ball.velocity - paddle.velocity;
    let vn = rel.dot(&n);
    if vn >= -1e-12 {
        return Ok(ContactOutcome::NoContact);
    }
    let rel_out = rel - (1.0 + e) * vn * n;
    Ok(ContactOutcome::Hit(BallState { velocity: rel_out + paddle.velocity, ..*ball }))
}
