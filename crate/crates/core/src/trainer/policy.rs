//! Policy representations: a linear map over the stacked observation, and a
//! compact gated dilated 1-D convolutional network (~1k parameters).
//!
//! Raw network outputs are squashed with tanh onto the action bounds.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Linear,
    GatedDilatedConv,
}

const CONV_CHANNELS: usize = 8;
const CONV_DILATIONS: [usize; 3] = [1, 2, 4];

/// Shape and action bounds a policy operates with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub architecture: Architecture,
    /// Features per history step.
    pub per_step: usize,
    /// History length (stacked steps).
    pub history: usize,
    pub action_dim: usize,
    pub action_lo: Vec<f64>,
    pub action_hi: Vec<f64>,
}

impl PolicySpec {
    pub fn obs_dim(&self) -> usize {
        self.per_step * self.history
    }

    pub fn param_count(&self) -> usize {
        match self.architecture {
            Architecture::Linear => self.action_dim * (self.obs_dim() + 1),
            Architecture::GatedDilatedConv => {
                let l1 = 2 * (CONV_CHANNELS * (self.per_step * 2) + CONV_CHANNELS);
                let l23 = 2 * (CONV_CHANNELS * (CONV_CHANNELS * 2) + CONV_CHANNELS);
                l1 + 2 * l23 + self.action_dim * CONV_CHANNELS + self.action_dim
            }
        }
    }

    fn squash(&self, raw: &[f64], out: &mut [f64]) {
        for i in 0..self.action_dim {
            let lo = self.action_lo[i];
            let hi = self.action_hi[i];
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            out[i] = center + half * raw[i].tanh();
        }
    }

    /// Action for a (normalized) observation. `theta.len()` must equal
    /// [`PolicySpec::param_count`].
    pub fn act(&self, theta: &[f64], obs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(theta.len(), self.param_count());
        debug_assert_eq!(obs.len(), self.obs_dim());
        let mut raw = vec![0.0; self.action_dim];
        match self.architecture {
            Architecture::Linear => {
                let d = self.obs_dim();
                for a in 0..self.action_dim {
                    let row = &theta[a * d..(a + 1) * d];
                    let mut acc = theta[self.action_dim * d + a]; // bias
                    for (w, x) in row.iter().zip(obs) {
                        acc += w * x;
                    }
                    raw[a] = acc;
                }
            }
            Architecture::GatedDilatedConv => self.conv_forward(theta, obs, &mut raw),
        }
        let mut out = vec![0.0; self.action_dim];
        self.squash(&raw, &mut out);
        out
    }

    /// Three causal gated conv layers (kernel 2, dilations 1/2/4) over the
    /// history, then a linear head on the newest timestep's features.
    fn conv_forward(&self, theta: &[f64], obs: &[f64], raw: &mut [f64]) {
        let t_len = self.history;
        let f = self.per_step;
        let c = CONV_CHANNELS;
        let mut offset = 0usize;
        let mut take = |n: usize| {
            let s = &theta[offset..offset + n];
            offset += n;
            s.to_vec()
        };

        // x[t * width + feature]
        let mut x: Vec<f64> = obs.to_vec();
        let mut width = f;
        for (layer, dil) in CONV_DILATIONS.iter().enumerate() {
            let in_w = width;
            let wa = take(c * in_w * 2);
            let ba = take(c);
            let wg = take(c * in_w * 2);
            let bg = take(c);
            let mut next = vec![0.0; t_len * c];
            for t in 0..t_len {
                let cur = &x[t * in_w..(t + 1) * in_w];
                let past: Option<&[f64]> =
                    t.checked_sub(*dil).map(|tp| &x[tp * in_w..(tp + 1) * in_w]);
                for ch in 0..c {
                    let mut a = ba[ch];
                    let mut g = bg[ch];
                    let row_a = &wa[ch * in_w * 2..(ch + 1) * in_w * 2];
                    let row_g = &wg[ch * in_w * 2..(ch + 1) * in_w * 2];
                    for i in 0..in_w {
                        a += row_a[i] * cur[i];
                        g += row_g[i] * cur[i];
                    }
                    if let Some(p) = past {
                        for i in 0..in_w {
                            a += row_a[in_w + i] * p[i];
                            g += row_g[in_w + i] * p[i];
                        }
                    }
                    next[t * c + ch] = a.tanh() * sigmoid(g);
                }
            }
            x = next;
            width = c;
            let _ = layer;
        }
        let w_head = take(self.action_dim * c);
        let b_head = take(self.action_dim);
        let newest = &x[(t_len - 1) * c..t_len * c];
        for a in 0..self.action_dim {
            let mut acc = b_head[a];
            for ch in 0..c {
                acc += w_head[a * c + ch] * newest[ch];
            }
            raw[a] = acc;
        }
        debug_assert_eq!(offset, theta.len());
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
