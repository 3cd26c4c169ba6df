//! Sequence-level bipartite matching between predicted and ground-truth
//! component sequences.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{ComponentSequence, Label};
use crate::loss::{focal_loss, l1_loss};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams {
    pub focal_alpha: f64,
    pub focal_gamma: f64,
    pub cls_weight: f64,
    pub reg_weight: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self { focal_alpha: 0.25, focal_gamma: 2.0, cls_weight: 1.0, reg_weight: 1.0 }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.focal_alpha) {
            return Err(Error::pre("focal_alpha must lie in [0, 1]"));
        }
        if !(self.focal_gamma >= 0.0) || !(self.cls_weight >= 0.0) || !(self.reg_weight >= 0.0) {
            return Err(Error::pre("gamma and weights must be non-negative"));
        }
        Ok(())
    }
}

/// Row-major square cost matrix; rows are predictions, columns targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::pre("cost matrix data must hold n * n entries"));
        }
        if !data.iter().all(|c| c.is_finite()) {
            return Err(Error::pre("cost matrix entries must be finite"));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::pre("cost matrix must be square"));
        }
        Self::new(n, rows.concat())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Target index for each prediction; `None` marks a match to the
    /// "no object" class.
    pub pred_to_gt: Vec<Option<usize>>,
    /// Sum of the selected costs (ascending-order summation, so the value
    /// does not depend on row order).
    pub total_cost: f64,
    /// Selected cost per prediction row.
    pub per_pair_cost: Vec<f64>,
}

impl MatchResult {
    /// Prediction index matched to each ground truth.
    pub fn gt_to_pred(&self, num_gt: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_gt];
        for (p, g) in self.pred_to_gt.iter().enumerate() {
            if let Some(g) = *g {
                if g < num_gt {
                    out[g] = Some(p);
                }
            }
        }
        out
    }
}

/// Order-independent sum of a set of costs.
pub(crate) fn canonical_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v.iter().sum()
}

/// Minimum-cost perfect assignment (Kuhn-Munkres with row/column
/// potentials, O(n^3)).
pub fn hungarian(cost: &CostMatrix) -> MatchResult {
    let n = cost.n();
    if n == 0 {
        return MatchResult { pred_to_gt: Vec::new(), total_cost: 0.0, per_pair_cost: Vec::new() };
    }
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pred_to_gt = vec![None; n];
    for j in 1..=n {
        pred_to_gt[col_owner[j] - 1] = Some(j - 1);
    }
    let per_pair_cost: Vec<f64> = pred_to_gt
        .iter()
        .enumerate()
        .map(|(i, j)| cost.get(i, j.expect("perfect assignment")))
        .collect();
    MatchResult { total_cost: canonical_sum(&per_pair_cost), pred_to_gt, per_pair_cost }
}

fn pred_scores(pred: &ComponentSequence) -> Result<&[f64]> {
    pred.scores().ok_or_else(|| Error::pre("prediction must carry scores"))
}

/// Classification-only cost of matching `pred` to the "no object" class.
pub fn no_object_cost(pred: &ComponentSequence, params: &MatchParams) -> Result<f64> {
    params.validate()?;
    let scores = pred_scores(pred)?;
    let cls: f64 = scores
        .iter()
        .map(|&c| focal_loss(c, Label::Empty, Some(params.focal_alpha), params.focal_gamma).0)
        .sum();
    Ok(params.cls_weight * cls)
}

/// Matching cost between a prediction and a target sequence: summed focal
/// classification cost plus summed per-component mean absolute coordinate
/// error.
pub fn seq_match_cost(pred: &ComponentSequence, gt: &ComponentSequence, params: &MatchParams) -> Result<f64> {
    if gt.label() == Label::Empty {
        return no_object_cost(pred, params);
    }
    params.validate()?;
    if pred.len() != gt.len() {
        return Err(Error::pre("prediction and ground truth differ in sequence length"));
    }
    let scores = pred_scores(pred)?;
    let cls: f64 = scores
        .iter()
        .map(|&c| focal_loss(c, Label::Text, Some(params.focal_alpha), params.focal_gamma).0)
        .sum();
    let mut reg = 0.0;
    for (p, g) in pred.quads().iter().zip(gt.quads()) {
        reg += l1_loss(&p.coords(), &g.coords())?.0;
    }
    Ok(params.cls_weight * cls + params.reg_weight * reg)
}

/// Builds the `n x n` cost matrix with ground truths padded by "no object"
/// columns and solves the assignment.
pub fn match_sequences(
    preds: &[ComponentSequence],
    gts: &[ComponentSequence],
    params: &MatchParams,
) -> Result<MatchResult> {
    let n = preds.len();
    let g = gts.len();
    if n < g {
        return Err(Error::Capacity { slots: n, required: g });
    }
    params.validate()?;
    let mut data = Vec::with_capacity(n * n);
    for pred in preds {
        let empty = no_object_cost(pred, params)?;
        for gt in gts {
            data.push(seq_match_cost(pred, gt, params)?);
        }
        data.extend(core::iter::repeat(empty).take(n - g));
    }
    let mut result = hungarian(&CostMatrix::new(n, data)?);
    for slot in result.pred_to_gt.iter_mut() {
        if matches!(slot, Some(j) if *j >= g) {
            *slot = None;
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ComponentQuad, Point2};

    fn quad(x: f64) -> ComponentQuad {
        ComponentQuad::new([
            Point2::new(x, 0.0),
            Point2::new(x + 1.0, 0.0),
            Point2::new(x + 1.0, 1.0),
            Point2::new(x, 1.0),
        ])
    }

    #[test]
    fn identity_matrix() {
        let m = CostMatrix::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let r = hungarian(&m);
        assert_eq!(r.pred_to_gt, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn two_by_two() {
        let m = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let r = hungarian(&m);
        assert_eq!(r.pred_to_gt, vec![Some(0), Some(1)]);
        assert_eq!(r.total_cost, 2.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(CostMatrix::new(1, vec![f64::NAN]).is_err());
        assert!(CostMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn perfect_prediction_costs_nothing() {
        let gt = ComponentSequence::ground_truth(vec![quad(0.0), quad(1.0)]).unwrap();
        let pred = ComponentSequence::prediction(gt.quads().to_vec(), vec![1.0, 1.0]).unwrap();
        assert_eq!(seq_match_cost(&pred, &gt, &MatchParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn perfect_negative_costs_nothing() {
        let pred = ComponentSequence::prediction(vec![quad(0.0)], vec![0.0]).unwrap();
        let empty = ComponentSequence::new(vec![quad(5.0)], None, Label::Empty).unwrap();
        assert_eq!(seq_match_cost(&pred, &empty, &MatchParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn one_pixel_offset_reference() {
        let gt = ComponentSequence::ground_truth(vec![quad(0.0)]).unwrap();
        let shifted = quad(0.0).map_points(|p| p + Point2::new(1.0, 1.0));
        let pred = ComponentSequence::prediction(vec![shifted], vec![0.6]).unwrap();
        let cost = seq_match_cost(&pred, &gt, &MatchParams::default()).unwrap();
        // Focal(0.6, text) from an independent scalar evaluation, plus 1.0.
        assert!((cost - (0.020433024950639634 + 1.0)).abs() < 1e-12, "{cost}");
    }

    #[test]
    fn length_mismatch_and_missing_scores() {
        let gt = ComponentSequence::ground_truth(vec![quad(0.0), quad(1.0)]).unwrap();
        let pred = ComponentSequence::prediction(vec![quad(0.0)], vec![0.5]).unwrap();
        assert!(seq_match_cost(&pred, &gt, &MatchParams::default()).is_err());
        assert!(seq_match_cost(&gt, &gt, &MatchParams::default()).is_err());
    }

    #[test]
    fn no_ground_truth_maps_everything_to_empty() {
        let preds = vec![
            ComponentSequence::prediction(vec![quad(0.0)], vec![0.2]).unwrap(),
            ComponentSequence::prediction(vec![quad(3.0)], vec![0.7]).unwrap(),
        ];
        let r = match_sequences(&preds, &[], &MatchParams::default()).unwrap();
        assert_eq!(r.pred_to_gt, vec![None, None]);
    }

    #[test]
    fn capacity_error() {
        let gt = ComponentSequence::ground_truth(vec![quad(0.0)]).unwrap();
        assert!(matches!(
            match_sequences(&[], &[gt], &MatchParams::default()),
            Err(Error::Capacity { slots: 0, required: 1 })
        ));
    }

    #[test]
    fn matches_by_position() {
        let gts = vec![
            ComponentSequence::ground_truth(vec![quad(0.0)]).unwrap(),
            ComponentSequence::ground_truth(vec![quad(10.0)]).unwrap(),
        ];
        let preds = vec![
            ComponentSequence::prediction(vec![quad(30.0)], vec![0.1]).unwrap(),
            ComponentSequence::prediction(vec![quad(10.2)], vec![0.9]).unwrap(),
            ComponentSequence::prediction(vec![quad(0.1)], vec![0.9]).unwrap(),
        ];
        let r = match_sequences(&preds, &gts, &MatchParams::default()).unwrap();
        assert_eq!(r.pred_to_gt, vec![None, Some(1), Some(0)]);
        assert_eq!(r.gt_to_pred(2), vec![Some(2), Some(1)]);
    }
}
