//! Savitzky-Golay FIR smoothing.
//!
//! Coefficients are computed once from the window length and polynomial
//! order; boundary values are handled by replicating the edge samples.

use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct SavitzkyGolay {
    half: usize,
    weights: Vec<f64>,
}

impl SavitzkyGolay {
    /// `window` must be odd; `order < window`.
    pub fn new(window: usize, order: usize) -> Self {
        assert!(window % 2 == 1, "window must be odd");
        assert!(order < window, "order must be below the window length");
        let half = window / 2;
        // Least-squares fit of a degree-`order` polynomial over the window;
        // the smoothing weight vector is the row of (A^T A)^-1 A^T that
        // evaluates the fit at the window center.
        let a = DMatrix::from_fn(window, order + 1, |i, j| {
            (i as f64 - half as f64).powi(j as i32)
        });
        let ata = a.transpose() * &a;
        let inv = ata.try_inverse().expect("Vandermonde normal matrix is invertible");
        let pseudo = inv * a.transpose();
        let weights = (0..window).map(|i| pseudo[(0, i)]).collect();
        Self { half, weights }
    }

    pub fn window(&self) -> usize {
        2 * self.half + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Attenuation applied to a single-sample impulse at the window center.
    pub fn center_weight(&self) -> f64 {
        self.weights[self.half]
    }

    /// Smooth a whole series, extending both ends by replicating the edge
    /// values.
    pub fn smooth(&self, series: &[f64]) -> Vec<f64> {
        if series.is_empty() {
            return Vec::new();
        }
        let n = series.len();
        let h = self.half as isize;
        (0..n as isize)
            .map(|i| {
                let mut acc = 0.0;
                for (k, w) in self.weights.iter().enumerate() {
                    let idx = (i + k as isize - h).clamp(0, n as isize - 1) as usize;
                    acc += w * series[idx];
                }
                acc
            })
            .collect()
    }

    /// Smooth with exact polynomial reproduction at the boundaries: interior
    /// positions use the symmetric convolution, edge positions are evaluated
    /// from a least-squares fit over the nearest full window.
    pub fn smooth_endpoint_exact(&self, series: &[f64]) -> Vec<f64> {
        let n = series.len();
        if n == 0 {
            return Vec::new();
        }
        let window = self.window().min(n);
        let order = (window - 1).min(self.weights.len().saturating_sub(1)).min(2);
        let mut out = self.smooth(series);
        let half = self.half.min(n.saturating_sub(1) / 2);
        let fit_eval = |start: usize, eval: usize| -> f64 {
            polynomial_fit_eval(&series[start..start + window], order, (eval - start) as f64)
        };
        for i in 0..half.min(n) {
            out[i] = fit_eval(0, i);
        }
        for i in n.saturating_sub(half)..n {
            out[i] = fit_eval(n - window, i);
        }
        if n < self.window() {
            for (i, o) in out.iter_mut().enumerate() {
                *o = polynomial_fit_eval(series, order.min(n - 1), i as f64);
            }
        }
        out
    }
}

/// Least-squares polynomial fit over `values` (unit sample spacing) evaluated
/// at offset `t` from the first sample.
fn polynomial_fit_eval(values: &[f64], order: usize, t: f64) -> f64 {
    let n = values.len();
    let order = order.min(n.saturating_sub(1));
    let a = DMatrix::from_fn(n, order + 1, |i, j| (i as f64).powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(values);
    let coeffs = (a.transpose() * &a)
        .try_inverse()
        .map(|inv| inv * a.transpose() * b)
        .expect("normal equations invertible for order < n");
    (0..=order).map(|j| coeffs[j] * t.powi(j as i32)).sum()
}
