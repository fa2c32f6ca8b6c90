//! Adaptive step throttling.
//!
//! A step that finishes inside its budget returns at the next step boundary;
//! a step that overruns advances to the next nearest multiple of the
//! timestep, keeping all step boundaries on the 1/hz grid.

/// Wall-clock (or simulated-clock) time at which the step should return.
pub fn throttle_step(step_start: f64, compute_elapsed: f64, hz: f64) -> f64 {
    assert!(hz > 0.0, "hz must be positive");
    let dt = 1.0 / hz;
    if compute_elapsed <= dt {
        return step_start + dt;
    }
    let steps = (compute_elapsed * hz).ceil();
    step_start + steps * dt
}

/// Stateful simulated-clock throttler tracking step boundaries.
#[derive(Debug, Clone)]
pub struct Throttler {
    hz: f64,
    /// Time of the most recent step boundary.
    pub boundary: f64,
}

impl Throttler {
    pub fn new(hz: f64, start: f64) -> Self {
        Self { hz, boundary: start }
    }

    /// Advance past one step that took `compute_elapsed`; returns the new
    /// boundary and how many step periods were consumed.
    pub fn advance(&mut self, compute_elapsed: f64) -> (f64, u32) {
        let next = throttle_step(self.boundary, compute_elapsed, self.hz);
        let periods = ((next - self.boundary) * self.hz).round() as u32;
        self.boundary = next;
        (next, periods)
    }
}
