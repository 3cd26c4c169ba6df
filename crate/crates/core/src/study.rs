//! Reconstruction studies on synthetic ribbons.
//!
//! Each ribbon's sides are refit, resampled to `t + 1` points and
//! reassembled; the result is scored by exact IoU against either the
//! annotated polygon or the generator's dense outline.

use alloc::vec::Vec;

use crate::geometry::{assemble, bezier_fit_side, decompose_with, Polygon, SideFit, TextContour};
use crate::piou::piou_exact;
use crate::synth::{derive_seed, gen_ribbon, RibbonParams, SyntheticRibbon};
use crate::Result;

/// How a side is refit before resampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reconstruction {
    BSpline(SideFit),
    Bezier,
}

/// Which outline a reconstruction is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Annotation,
    TrueOutline,
}

pub fn reconstruct(contour: &TextContour, t: usize, method: Reconstruction) -> Result<Polygon> {
    match method {
        Reconstruction::BSpline(fit) => Ok(assemble(&decompose_with(contour, t, fit)?)),
        Reconstruction::Bezier => {
            let mut pts = bezier_fit_side(contour.side_a(), t + 1)?;
            let bottom = bezier_fit_side(contour.side_b(), t + 1)?;
            pts.extend(bottom.into_iter().rev());
            Polygon::new(pts)
        }
    }
}

pub fn reconstruction_iou(
    ribbon: &SyntheticRibbon,
    t: usize,
    method: Reconstruction,
    reference: Reference,
) -> Result<f64> {
    let rebuilt = reconstruct(&ribbon.contour, t, method)?;
    let target = match reference {
        Reference::Annotation => ribbon.contour.to_polygon(),
        Reference::TrueOutline => ribbon.reference.clone(),
    };
    Ok(piou_exact(&rebuilt, &target))
}

/// The ribbons used by every study: instance `i` is generated from
/// `derive_seed(seed, i)`.
pub fn ribbons(seed: u64, count: usize, params: &RibbonParams) -> Result<Vec<SyntheticRibbon>> {
    (0..count as u64).map(|i| gen_ribbon(derive_seed(seed, i), params)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpComparison {
    pub count: usize,
    pub t: usize,
    pub bspline_mean: f64,
    pub bezier_mean: f64,
    /// Mean for the B-spline that uses side vertices as control points.
    pub control_polygon_mean: f64,
    /// Ribbons where the interpolating B-spline scores strictly higher.
    pub bspline_wins: usize,
}

/// B-spline vs Bezier reconstruction IoU against the annotated polygon.
pub fn interp_compare(ribbons: &[SyntheticRibbon], t: usize) -> Result<InterpComparison> {
    let (mut bs, mut bz, mut cp, mut wins) = (0.0, 0.0, 0.0, 0);
    for r in ribbons {
        let a = reconstruction_iou(r, t, Reconstruction::BSpline(SideFit::Interpolate), Reference::Annotation)?;
        let b = reconstruction_iou(r, t, Reconstruction::Bezier, Reference::Annotation)?;
        let c = reconstruction_iou(r, t, Reconstruction::BSpline(SideFit::ControlPolygon), Reference::Annotation)?;
        bs += a;
        bz += b;
        cp += c;
        wins += usize::from(a > b);
    }
    let n = ribbons.len().max(1) as f64;
    Ok(InterpComparison {
        count: ribbons.len(),
        t,
        bspline_mean: bs / n,
        bezier_mean: bz / n,
        control_polygon_mean: cp / n,
        bspline_wins: wins,
    })
}

/// Mean reconstruction IoU for each sequence length.
pub fn length_sweep(ribbons: &[SyntheticRibbon], ts: &[usize], reference: Reference) -> Result<Vec<(usize, f64)>> {
    ts.iter()
        .map(|&t| {
            let mut sum = 0.0;
            for r in ribbons {
                sum += reconstruction_iou(r, t, Reconstruction::BSpline(SideFit::Interpolate), reference)?;
            }
            Ok((t, sum / ribbons.len().max(1) as f64))
        })
        .collect()
}
