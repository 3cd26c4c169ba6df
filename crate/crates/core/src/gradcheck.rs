//! Randomized central-difference verification of the loss gradients.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Label;
use crate::loss::{finite_diff_check, focal_loss, l1_loss, psc_loss, LossParams};
use crate::math;
use crate::{Error, Result};

/// Interior sampling range for scores, away from the log clamp.
const SCORE_RANGE: (f64, f64) = (0.02, 0.98);

#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub seed: u64,
    pub points: usize,
    pub epsilon: f64,
    /// Worst `|analytic - numeric| / max(1, |analytic|)` per loss.
    pub psc_max_rel_error: f64,
    pub focal_max_rel_error: f64,
    pub l1_max_rel_error: f64,
    /// Largest `|dL/dc|` of a positive term evaluated at its target.
    pub stationarity_max_grad: f64,
}

impl GradientReport {
    pub fn passes(&self, rel_tolerance: f64, stationarity_tolerance: f64) -> bool {
        self.psc_max_rel_error <= rel_tolerance
            && self.focal_max_rel_error <= rel_tolerance
            && self.l1_max_rel_error <= rel_tolerance
            && self.stationarity_max_grad <= stationarity_tolerance
    }
}

fn score(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(SCORE_RANGE.0..SCORE_RANGE.1)
}

/// Checks every loss at `points` random interior inputs.
pub fn gradient_check(seed: u64, points: usize, epsilon: f64) -> Result<GradientReport> {
    if points == 0 {
        return Err(Error::pre("need at least one check point"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradientReport {
        seed,
        points,
        epsilon,
        psc_max_rel_error: 0.0,
        focal_max_rel_error: 0.0,
        l1_max_rel_error: 0.0,
        stationarity_max_grad: 0.0,
    };

    for _ in 0..points {
        let params = LossParams { alpha: rng.gen_range(0.1..1.0), gamma: 2.0 };
        let n_pos = rng.gen_range(1..=3);
        let n_neg = rng.gen_range(0..=3);
        let pious: Vec<f64> = (0..n_pos).map(|_| rng.gen_range(0.05..=1.0)).collect();
        let scores: Vec<f64> = (0..n_pos + n_neg).map(|_| score(&mut rng)).collect();
        let f = |x: &[f64]| {
            let v = psc_loss(&x[..n_pos], &pious, &x[n_pos..], &params).expect("inputs stay in range");
            (v.value, v.grad_scores)
        };
        report.psc_max_rel_error = report.psc_max_rel_error.max(finite_diff_check(f, &scores, epsilon)?);

        let s = rng.gen_range(0.0..=1.0);
        let at_target = math::powf(s, params.alpha);
        let g = psc_loss(&[at_target], &[s], &[], &params)?.grad_scores[0];
        report.stationarity_max_grad = report.stationarity_max_grad.max(g.abs());

        let label = if rng.gen_bool(0.5) { Label::Text } else { Label::Empty };
        let alpha = if rng.gen_bool(0.5) { Some(0.25) } else { None };
        let gamma = rng.gen_range(1.5..3.0);
        let f = |x: &[f64]| {
            let (v, g) = focal_loss(x[0], label, alpha, gamma);
            (v, vec![g])
        };
        report.focal_max_rel_error = report.focal_max_rel_error.max(finite_diff_check(f, &[score(&mut rng)], epsilon)?);

        let len = rng.gen_range(1..=8);
        let gt: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
        // Keep every coordinate well away from the kink at a tie.
        let pred: Vec<f64> = gt
            .iter()
            .map(|g| {
                let d: f64 = rng.gen_range(0.01..5.0);
                if rng.gen_bool(0.5) {
                    g + d
                } else {
                    g - d
                }
            })
            .collect();
        let f = |x: &[f64]| l1_loss(x, &gt).expect("lengths match");
        report.l1_max_rel_error = report.l1_max_rel_error.max(finite_diff_check(f, &pred, epsilon)?);
    }
    Ok(report)
}
