//! Classification and regression losses with analytic gradients.
//!
//! The position-supervised classification loss replaces the hard positive
//! target of a focal loss with `s^alpha`, where `s` is the localization
//! quality (PIoU) of the matched prediction:
//!
//! ```text
//! L = sum_pos |s^a - c|^g BCE(c, s^a) + sum_neg |c|^g BCE(c, 0)
//! ```

use alloc::vec::Vec;

use crate::geometry::Label;
use crate::math::{self, pow_deriv};
use crate::{Error, Result};

/// Scores are clamped to `[EPS, 1 - EPS]` inside logarithms.
pub const EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    /// Exponent applied to the PIoU target.
    pub alpha: f64,
    /// Focusing exponent.
    pub gamma: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        Self { alpha: 0.25, gamma: 2.0 }
    }
}

impl LossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::pre("alpha must be positive"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::pre("gamma must be non-negative"));
        }
        Ok(())
    }
}

/// Loss value with its gradient with respect to each score.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// Positive scores first, then negative scores, in input order.
    pub grad_scores: Vec<f64>,
}

#[inline]
fn clamp_eps(c: f64) -> f64 {
    c.clamp(EPS, 1.0 - EPS)
}

fn check_unit(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::Precondition(alloc::format!("{what} must lie in [0, 1]")))
    }
}

/// Binary cross-entropy `-(q ln c + (1 - q) ln(1 - c))` and its derivative
/// in `c`. The derivative is zero where `c` is clamped.
fn bce(c: f64, q: f64) -> (f64, f64) {
    let cc = clamp_eps(c);
    let value = -(q * math::ln(cc) + (1.0 - q) * math::ln(1.0 - cc));
    let grad = if cc == c { -q / cc + (1.0 - q) / (1.0 - cc) } else { 0.0 };
    (value, grad)
}

/// Positive term `|q - c|^g BCE(c, q)` with target `q`.
fn soft_positive(c: f64, q: f64, gamma: f64) -> (f64, f64) {
    let diff = q - c;
    let m = math::powf(diff.abs(), gamma);
    let dm = if diff == 0.0 { 0.0 } else { -pow_deriv(diff.abs(), gamma) * diff.signum() };
    let (b, db) = bce(c, q);
    (m * b, dm * b + m * db)
}

/// Negative term `c^g BCE(c, 0)`.
fn negative(c: f64, gamma: f64) -> (f64, f64) {
    let m = math::powf(c, gamma);
    let dm = pow_deriv(c, gamma);
    let (b, db) = bce(c, 0.0);
    (m * b, dm * b + m * db)
}

/// Position-supervised classification loss over matched (positive) and
/// unmatched (negative) scores. PIoU targets are treated as constants.
pub fn psc_loss(pos_scores: &[f64], pos_pious: &[f64], neg_scores: &[f64], params: &LossParams) -> Result<LossValue> {
    params.validate()?;
    if pos_scores.len() != pos_pious.len() {
        return Err(Error::pre("one PIoU per positive score required"));
    }
    check_unit(pos_scores, "scores")?;
    check_unit(neg_scores, "scores")?;
    check_unit(pos_pious, "PIoU values")?;

    let mut value = 0.0;
    let mut grad_scores = Vec::with_capacity(pos_scores.len() + neg_scores.len());
    for (&c, &s) in pos_scores.iter().zip(pos_pious) {
        let (v, g) = soft_positive(c, math::powf(s, params.alpha), params.gamma);
        value += v;
        grad_scores.push(g);
    }
    for &c in neg_scores {
        let (v, g) = negative(c, params.gamma);
        value += v;
        grad_scores.push(g);
    }
    Ok(LossValue { value, grad_scores })
}

/// Focal loss of one score against a class label, with its derivative.
///
/// `alpha = Some(a)` weights positives by `a` and negatives by `1 - a`;
/// `None` leaves both unweighted.
pub fn focal_loss(score: f64, target: Label, alpha: Option<f64>, gamma: f64) -> (f64, f64) {
    match target {
        Label::Text => {
            let w = alpha.unwrap_or(1.0);
            let (v, g) = soft_positive(score, 1.0, gamma);
            (w * v, w * g)
        }
        Label::Empty => {
            let w = alpha.map_or(1.0, |a| 1.0 - a);
            let (v, g) = negative(score, gamma);
            (w * v, w * g)
        }
    }
}

/// Mean absolute difference and its subgradient (zero at ties).
pub fn l1_loss(pred: &[f64], gt: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != gt.len() {
        return Err(Error::pre("l1 inputs differ in length"));
    }
    if pred.is_empty() {
        return Err(Error::pre("l1 inputs are empty"));
    }
    let n = pred.len() as f64;
    let value = pred.iter().zip(gt).map(|(p, g)| (p - g).abs()).sum::<f64>() / n;
    let grads = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| {
            let d = p - g;
            if d == 0.0 {
                0.0
            } else {
                d.signum() / n
            }
        })
        .collect();
    Ok((value, grads))
}

/// Classification and regression parts of one loss branch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms {
    pub cls: f64,
    pub reg: f64,
}

/// Unweighted sum of the component-initialization and decoder losses.
pub fn total_loss(tci: LossTerms, dec: LossTerms) -> Result<f64> {
    let parts = [tci.cls, tci.reg, dec.cls, dec.reg];
    if !parts.iter().all(|x| x.is_finite()) {
        return Err(Error::pre("loss terms must be finite"));
    }
    Ok((tci.cls + tci.reg) + (dec.cls + dec.reg))
}

/// Compares an analytic gradient against central differences.
///
/// Returns `max_i |analytic_i - numeric_i| / max(1, |analytic_i|)`.
pub fn finite_diff_check<F>(f: F, inputs: &[f64], epsilon: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    if !(epsilon > 0.0) {
        return Err(Error::pre("epsilon must be positive"));
    }
    let (_, analytic) = f(inputs);
    if analytic.len() != inputs.len() {
        return Err(Error::pre("gradient length differs from input length"));
    }
    let mut x = inputs.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + epsilon;
        let (up, _) = f(&x);
        x[i] = orig - epsilon;
        let (down, _) = f(&x);
        x[i] = orig;
        let numeric = (up - down) / (2.0 * epsilon);
        let err = (analytic[i] - numeric).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
