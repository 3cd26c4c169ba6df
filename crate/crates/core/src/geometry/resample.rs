use alloc::vec::Vec;

use super::bspline::BSplineCurve;
use super::point::Point2;
use crate::{Error, Result};

/// Polyline segments per knot span in the arc-length table.
pub const ARC_SEGMENTS_PER_SPAN: usize = 1000;

/// How a long side is turned into a curve before resampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SideFit {
    /// Clamped cubic B-spline passing through every side vertex.
    #[default]
    Interpolate,
    /// Clamped uniform cubic B-spline using the side vertices directly as
    /// control points. Smooths corners but does not pass through interior
    /// vertices.
    ControlPolygon,
}

/// Resamples a long side to `m` points equally spaced in arc length along
/// a clamped cubic B-spline fit; see [`resample_side_with`].
pub fn resample_side(side: &[Point2], m: usize) -> Result<Vec<Point2>> {
    resample_side_with(side, m, SideFit::Interpolate)
}

/// Resamples a long side with an explicit fitting strategy.
///
/// Degree drops to `points - 1` for sides with fewer than four distinct
/// points. The first and last outputs are the side's endpoints exactly.
pub fn resample_side_with(side: &[Point2], m: usize, fit: SideFit) -> Result<Vec<Point2>> {
    if side.len() < 2 {
        return Err(Error::pre("side needs at least 2 points"));
    }
    if m < 2 {
        return Err(Error::pre("need at least 2 samples per side"));
    }
    if !side.iter().all(|p| p.is_finite()) {
        return Err(Error::pre("side point is not finite"));
    }
    let first = side[0];
    let last = side[side.len() - 1];
    let points = dedup_consecutive(side);
    if points.len() < 2 {
        // Every point coincides: the side collapses to a single location.
        return Ok(core::iter::repeat(first).take(m).collect());
    }
    let degree = (points.len() - 1).min(3);
    let curve = match fit {
        SideFit::Interpolate => BSplineCurve::interpolating(&points, degree)?,
        SideFit::ControlPolygon => BSplineCurve::clamped_uniform(points, degree)?,
    };
    let spans = curve.spans();
    let mut out = sample_equal_arc_length(|u| curve.eval_in_domain(u), &spans, m);
    out[0] = first;
    out[m - 1] = last;
    Ok(out)
}

pub(crate) fn dedup_consecutive(side: &[Point2]) -> Vec<Point2> {
    let mut points: Vec<Point2> = Vec::with_capacity(side.len());
    for &p in side {
        if points.last() != Some(&p) {
            points.push(p);
        }
    }
    points
}

/// Samples `m >= 2` points of a parametric curve at equal arc-length steps.
///
/// Each span is replaced by [`ARC_SEGMENTS_PER_SPAN`] chords; target
/// lengths are inverted by linear interpolation within the chord table.
pub(crate) fn sample_equal_arc_length(
    curve: impl Fn(f64) -> Point2,
    spans: &[(f64, f64)],
    m: usize,
) -> Vec<Point2> {
    debug_assert!(m >= 2 && !spans.is_empty());
    let per = ARC_SEGMENTS_PER_SPAN;
    let mut params = Vec::with_capacity(spans.len() * per + 1);
    let mut lengths = Vec::with_capacity(spans.len() * per + 1);
    let mut prev = curve(spans[0].0);
    params.push(spans[0].0);
    lengths.push(0.0);
    let mut total = 0.0;
    for &(a, b) in spans {
        for s in 1..=per {
            let u = if s == per { b } else { a + (b - a) * s as f64 / per as f64 };
            let p = curve(u);
            total += prev.distance(p);
            prev = p;
            params.push(u);
            lengths.push(total);
        }
    }

    let mut out = Vec::with_capacity(m);
    let mut cursor = 0;
    for j in 0..m {
        let target = total * j as f64 / (m - 1) as f64;
        while cursor + 1 < lengths.len() - 1 && lengths[cursor + 1] < target {
            cursor += 1;
        }
        let (l0, l1) = (lengths[cursor], lengths[cursor + 1]);
        let f = if l1 > l0 { ((target - l0) / (l1 - l0)).clamp(0.0, 1.0) } else { 0.0 };
        let u = params[cursor] + (params[cursor + 1] - params[cursor]) * f;
        out.push(curve(u));
    }
    out
}
