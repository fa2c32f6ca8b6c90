//! Tracking quality metrics.

use super::TrackingError;
use crate::Vec3;

/// True-positive gate: estimate within 5cm of the annotated position.
const TP_GATE: f64 = 0.05;

/// Per-frame precision and recall of a track against ground truth.
///
/// Sequences are matched on timestamps (1µs tolerance). A matched frame is a
/// true positive iff the positions agree within 5cm; estimate frames without
/// truth count against precision, truth frames without estimate against
/// recall.
pub fn evaluate_tracking(
    estimates: &[(f64, Vec3)],
    truth: &[(f64, Vec3)],
) -> Result<(f64, f64), TrackingError> {
    if truth.is_empty() {
        return Err(TrackingError::EmptyTruth);
    }
    let mut tp = 0usize;
    for (t_est, p_est) in estimates {
        if let Some((_, p_true)) = truth.iter().find(|(t, _)| (t - t_est).abs() < 1e-6) {
            if (p_est - p_true).norm() < TP_GATE {
                tp += 1;
            }
        }
    }
    let precision = if estimates.is_empty() { 0.0 } else { tp as f64 / estimates.len() as f64 };
    let recall = tp as f64 / truth.len() as f64;
    Ok((precision, recall))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(n: usize, offset: f64) -> Vec<(f64, Vec3)> {
        (0..n)
            .map(|i| (i as f64 * 0.008, Vec3::new(0.1 * i as f64 + offset, 0.0, 0.3)))
            .collect()
    }

    #[test]
    fn perfect_estimates_score_one() {
        let truth = track(50, 0.0);
        let (p, r) = evaluate_tracking(&truth, &truth).unwrap();
        assert_eq!((p, r), (1.0, 1.0));
    }

    #[test]
    fn ten_cm_offset_scores_zero() {
        let truth = track(50, 0.0);
        let est = track(50, 0.10);
        let (p, r) = evaluate_tracking(&est, &truth).unwrap();
        assert_eq!((p, r), (0.0, 0.0));
    }

    #[test]
    fn half_coverage_gives_half_recall() {
        let truth = track(50, 0.0);
        let est: Vec<_> = truth.iter().step_by(2).copied().collect();
        let (p, r) = evaluate_tracking(&est, &truth).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(r, 0.5);
    }

    #[test]
    fn empty_truth_errors() {
        assert_eq!(evaluate_tracking(&track(3, 0.0), &[]), Err(TrackingError::EmptyTruth));
    }
}
