//! Detection evaluation: precision, recall and F-measure at an IoU
//! threshold.
//!
//! Per image, predictions are visited in descending score order (stable on
//! input index) and greedily matched one-to-one to the unmatched ground
//! truth with the highest IoU at or above the threshold. A prediction that
//! only overlaps an ignore-flagged ground truth is dropped without counting
//! as a false positive; ignored ground truths never count toward recall.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{decompose, split_long_sides, ComponentSequence, Polygon};
use crate::piou::{biou, piou_exact_with, piou_mc, PIoUConfig, DEFAULT_RASTER_RESOLUTION};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredInstance {
    pub polygon: Polygon,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthInstance {
    pub polygon: Polygon,
    pub ignore: bool,
}

/// How overlap between two instances is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IouBackend {
    /// Rasterized polygon IoU.
    Exact { resolution: usize },
    /// Monte-Carlo PIoU on sequences of length `t` obtained by splitting and
    /// decomposing each polygon.
    MonteCarlo { config: PIoUConfig, t: usize },
    /// Axis-aligned bounding-box IoU.
    BoundingBox,
}

impl Default for IouBackend {
    fn default() -> Self {
        IouBackend::Exact { resolution: DEFAULT_RASTER_RESOLUTION }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    pub backend: IouBackend,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5, backend: IouBackend::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ImageCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Predictions dropped for overlapping an ignored ground truth.
    pub ignored_predictions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub iou_threshold: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub ignored_predictions: usize,
    pub per_image: Vec<ImageCounts>,
}

/// Precision and recall from counts.
///
/// With nothing predicted, precision is 0 if any ground truth exists and 1
/// otherwise; with nothing to find, recall is 1. F is 0 when `P + R == 0`.
pub fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else if fn_ > 0 {
        0.0
    } else {
        1.0
    };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 1.0 };
    let f = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    (precision, recall, f)
}

/// Evaluates aligned per-image prediction and ground-truth lists.
pub fn evaluate(
    preds: &[Vec<ScoredInstance>],
    gts: &[Vec<GroundTruthInstance>],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if !(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0) {
        return Err(Error::pre("IoU threshold must lie in (0, 1]"));
    }
    if preds.len() != gts.len() {
        return Err(Error::pre("prediction and ground-truth image counts differ"));
    }
    if let IouBackend::MonteCarlo { config, t } = cfg.backend {
        config.validate()?;
        if t == 0 {
            return Err(Error::pre("sequence length t must be >= 1"));
        }
    }
    let mut per_image = Vec::with_capacity(preds.len());
    for (p, g) in preds.iter().zip(gts) {
        per_image.push(evaluate_image(p, g, cfg));
    }
    let tp = per_image.iter().map(|c| c.true_positives).sum();
    let fp = per_image.iter().map(|c| c.false_positives).sum();
    let fn_ = per_image.iter().map(|c| c.false_negatives).sum();
    let ignored = per_image.iter().map(|c| c.ignored_predictions).sum();
    let (precision, recall, f_measure) = prf(tp, fp, fn_);
    Ok(EvalReport {
        precision,
        recall,
        f_measure,
        iou_threshold: cfg.iou_threshold,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        ignored_predictions: ignored,
        per_image,
    })
}

fn as_sequence(poly: &Polygon, t: usize) -> Option<ComponentSequence> {
    let contour = split_long_sides(poly, None).ok()?;
    decompose(&contour, t).ok()
}

fn evaluate_image(preds: &[ScoredInstance], gts: &[GroundTruthInstance], cfg: &EvalConfig) -> ImageCounts {
    let iou_matrix: Vec<Vec<f64>> = match cfg.backend {
        IouBackend::Exact { resolution } => preds
            .iter()
            .map(|p| gts.iter().map(|g| piou_exact_with(&p.polygon, &g.polygon, resolution)).collect())
            .collect(),
        IouBackend::BoundingBox => {
            preds.iter().map(|p| gts.iter().map(|g| biou(&p.polygon, &g.polygon)).collect()).collect()
        }
        IouBackend::MonteCarlo { config, t } => {
            let gseq: Vec<_> = gts.iter().map(|g| as_sequence(&g.polygon, t)).collect();
            preds
                .iter()
                .map(|p| {
                    let ps = as_sequence(&p.polygon, t);
                    gseq.iter()
                        .map(|gs| match (&ps, gs) {
                            (Some(a), Some(b)) => piou_mc(b, a, &config).map_or(0.0, |e| e.value),
                            _ => 0.0,
                        })
                        .collect()
                })
                .collect()
        }
    };

    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score));

    let thr = cfg.iou_threshold;
    let mut taken = vec![false; gts.len()];
    let mut counts = ImageCounts::default();
    for &pi in &order {
        let row = &iou_matrix[pi];
        let best = (0..gts.len())
            .filter(|&gi| !gts[gi].ignore && !taken[gi] && row[gi] >= thr)
            .max_by(|&a, &b| row[a].total_cmp(&row[b]).then(b.cmp(&a)));
        if let Some(gi) = best {
            taken[gi] = true;
            counts.true_positives += 1;
        } else if (0..gts.len()).any(|gi| gts[gi].ignore && row[gi] >= thr) {
            counts.ignored_predictions += 1;
        } else {
            counts.false_positives += 1;
        }
    }
    counts.false_negatives = (0..gts.len()).filter(|&gi| !gts[gi].ignore && !taken[gi]).count();
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn rect(x: f64, y: f64, w: f64, h: f64) -> Polygon {
        Polygon::new(vec![
            Point2::new(x, y),
            Point2::new(x + w, y),
            Point2::new(x + w, y + h),
            Point2::new(x, y + h),
        ])
        .unwrap()
    }

    fn gt(p: Polygon) -> GroundTruthInstance {
        GroundTruthInstance { polygon: p, ignore: false }
    }

    fn pred(p: Polygon, score: f64) -> ScoredInstance {
        ScoredInstance { polygon: p, score }
    }

    #[test]
    fn perfect_predictions() {
        let g = vec![vec![gt(rect(0.0, 0.0, 50.0, 10.0)), gt(rect(0.0, 40.0, 50.0, 10.0))]];
        let p = vec![g[0].iter().map(|x| pred(x.polygon.clone(), 1.0)).collect()];
        let r = evaluate(&p, &g, &EvalConfig::default()).unwrap();
        assert_eq!((r.precision, r.recall, r.f_measure), (1.0, 1.0, 1.0));
    }

    #[test]
    fn no_predictions_convention() {
        let g = vec![vec![gt(rect(0.0, 0.0, 50.0, 10.0))]];
        let r = evaluate(&[vec![]], &g, &EvalConfig::default()).unwrap();
        assert_eq!((r.precision, r.recall, r.f_measure), (0.0, 0.0, 0.0));
        assert_eq!(r.false_negatives, 1);
    }

    #[test]
    fn one_of_two() {
        let g = vec![vec![gt(rect(0.0, 0.0, 50.0, 10.0)), gt(rect(0.0, 40.0, 50.0, 10.0))]];
        let p = vec![vec![pred(rect(0.0, 0.0, 50.0, 10.0), 0.9), pred(rect(200.0, 200.0, 20.0, 5.0), 0.8)]];
        let r = evaluate(&p, &g, &EvalConfig::default()).unwrap();
        assert_eq!((r.precision, r.recall, r.f_measure), (0.5, 0.5, 0.5));
        assert_eq!((r.true_positives, r.false_positives, r.false_negatives), (1, 1, 1));
    }

    #[test]
    fn duplicate_detection_is_false_positive() {
        let g = vec![vec![gt(rect(0.0, 0.0, 50.0, 10.0))]];
        let p = vec![vec![pred(rect(0.0, 0.0, 50.0, 10.0), 0.6), pred(rect(1.0, 0.0, 50.0, 10.0), 0.9)]];
        let r = evaluate(&p, &g, &EvalConfig::default()).unwrap();
        assert_eq!((r.true_positives, r.false_positives), (1, 1));
    }

    #[test]
    fn ignored_ground_truth() {
        let g = vec![vec![
            gt(rect(0.0, 0.0, 50.0, 10.0)),
            GroundTruthInstance { polygon: rect(0.0, 40.0, 50.0, 10.0), ignore: true },
        ]];
        let p = vec![vec![pred(rect(0.0, 0.0, 50.0, 10.0), 0.9), pred(rect(0.0, 40.0, 50.0, 10.0), 0.9)]];
        let r = evaluate(&p, &g, &EvalConfig::default()).unwrap();
        assert_eq!((r.true_positives, r.false_positives, r.false_negatives, r.ignored_predictions), (1, 0, 0, 1));
        assert_eq!((r.precision, r.recall), (1.0, 1.0));
    }

    #[test]
    fn backends_agree_on_rectangles() {
        let g = vec![vec![gt(rect(0.0, 0.0, 60.0, 10.0))]];
        let p = vec![vec![pred(rect(5.0, 0.0, 60.0, 10.0), 0.9)]];
        for backend in [
            IouBackend::default(),
            IouBackend::BoundingBox,
            IouBackend::MonteCarlo { config: PIoUConfig::default(), t: 6 },
        ] {
            let r = evaluate(&p, &g, &EvalConfig { iou_threshold: 0.5, backend }).unwrap();
            assert_eq!(r.true_positives, 1, "{backend:?}");
        }
    }

    #[test]
    fn threshold_validation() {
        assert!(evaluate(&[], &[], &EvalConfig { iou_threshold: 0.0, ..EvalConfig::default() }).is_err());
        assert!(evaluate(&[vec![]], &[], &EvalConfig::default()).is_err());
    }
}
