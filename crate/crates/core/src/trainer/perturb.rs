//! Perturbation sampling for evolutionary strategies.
//!
//! The orthogonal variant builds perturbations in blocks of pairwise
//! orthogonal rows while preserving standard-normal marginals: a Gaussian
//! block is orthonormalized and each row is rescaled to an independently
//! drawn chi-distributed norm.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// `n` perturbation vectors of dimension `d`.
///
/// Non-orthogonal mode: i.i.d. standard normal entries. Orthogonal mode:
/// within each block of `min(n, d)` rows all pairwise dot products vanish;
/// orthogonality holds within blocks, not across them.
pub fn sample_perturbations<R: Rng>(
    d: usize,
    n: usize,
    orthogonal: bool,
    rng: &mut R,
) -> Vec<DVector<f64>> {
    assert!(d >= 1 && n >= 1);
    if !orthogonal {
        return (0..n)
            .map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect();
    }
    let block = d.min(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let b = block.min(n - out.len());
        // Gaussian d x b block; columns become the perturbations.
        let mut g = DMatrix::<f64>::zeros(d, b);
        for c in 0..b {
            for r in 0..d {
                g[(r, c)] = rng.sample(StandardNormal);
            }
        }
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        // Fix signs so the factorization is unique (Haar-distributed Q).
        for c in 0..b {
            if r[(c, c)] < 0.0 {
                for row in 0..d {
                    q[(row, c)] = -q[(row, c)];
                }
            }
        }
        for c in 0..b {
            // Norm of an independent d-dim Gaussian: chi(d)-distributed.
            let norm: f64 = (0..d)
                .map(|_| {
                    let x: f64 = rng.sample(StandardNormal);
                    x * x
                })
                .sum::<f64>()
                .sqrt();
            out.push(q.column(c).clone_owned() * norm);
        }
    }
    out
}

/// One iteration's perturbations with their paired episode returns.
#[derive(Debug, Clone)]
pub struct PerturbationBlock {
    pub deltas: Vec<DVector<f64>>,
    /// `returns_pos[i][j]`: return of repeat `j` at `theta + sigma * delta_i`.
    pub returns_pos: Vec<Vec<f64>>,
    pub returns_neg: Vec<Vec<f64>>,
}

impl PerturbationBlock {
    pub fn mean_returns(&self) -> (Vec<f64>, Vec<f64>) {
        let mean = |rows: &Vec<Vec<f64>>| {
            rows.iter().map(|r| r.iter().sum::<f64>() / r.len().max(1) as f64).collect()
        };
        (mean(&self.returns_pos), mean(&self.returns_neg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_block_has_vanishing_dot_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let deltas = sample_perturbations(4, 4, true, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(deltas[i].dot(&deltas[j]).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn orthogonality_within_blocks_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // n > d: two independent blocks of size 3.
        let deltas = sample_perturbations(3, 6, true, &mut rng);
        for block in [&deltas[0..3], &deltas[3..6]] {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!(block[i].dot(&block[j]).abs() <= 1e-9);
                    }
                }
            }
        }
        // Across blocks there is no constraint; expect generic non-zero dots.
        let cross = deltas[0].dot(&deltas[3]).abs();
        assert!(cross > 1e-9);
    }

    #[test]
    fn orthogonal_marginals_are_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 8;
        let n_blocks = 12_500; // 1e5 draws of entry (0, 0)
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for _ in 0..n_blocks {
            let deltas = sample_perturbations(d, d, true, &mut rng);
            let x = deltas[0][0];
            sum += x;
            sum_sq += x * x;
            count += 1;
        }
        let mean = sum / count as f64;
        let var = sum_sq / count as f64 - mean * mean;
        let se_mean = (1.0 / count as f64).sqrt();
        let se_var = (2.0 / count as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se_mean, "mean {mean} beyond 3 SE {se_mean}");
        assert!((var - 1.0).abs() <= 3.0 * se_var, "var {var} beyond 3 SE {se_var}");
    }

    #[test]
    fn gaussian_mode_has_expected_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let deltas = sample_perturbations(100, 1000, false, &mut rng);
        let all: Vec<f64> = deltas.iter().flat_map(|d| d.iter().copied()).collect();
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 3.0 / n.sqrt());
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n).sqrt());
    }
}
