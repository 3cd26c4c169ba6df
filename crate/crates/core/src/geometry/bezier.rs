use alloc::vec::Vec;

use super::point::Point2;
use super::resample::{dedup_consecutive, sample_equal_arc_length};
use crate::{Error, Result};

/// Upper bound on parameter-correction passes after the chord-length fit.
const MAX_REPARAM_PASSES: usize = 200;
/// Passes stop once no parameter moves by more than this.
const REPARAM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBezier {
    pub p: [Point2; 4],
}

impl CubicBezier {
    pub fn eval(&self, u: f64) -> Point2 {
        let v = 1.0 - u;
        let [p0, p1, p2, p3] = self.p;
        p0 * (v * v * v) + p1 * (3.0 * v * v * u) + p2 * (3.0 * v * u * u) + p3 * (u * u * u)
    }

    fn derivative(&self, u: f64) -> Point2 {
        let v = 1.0 - u;
        let [p0, p1, p2, p3] = self.p;
        (p1 - p0) * (3.0 * v * v) + (p2 - p1) * (6.0 * v * u) + (p3 - p2) * (3.0 * u * u)
    }

    fn second_derivative(&self, u: f64) -> Point2 {
        let [p0, p1, p2, p3] = self.p;
        (p2 - p1 * 2.0 + p0) * (6.0 * (1.0 - u)) + (p3 - p2 * 2.0 + p1) * (6.0 * u)
    }

    /// Least-squares cubic through `points` with both endpoints pinned.
    ///
    /// Starts from chord-length parameters, then alternates a Newton
    /// projection of each point onto the curve with a re-solve of the two
    /// free control points.
    pub fn fit(points: &[Point2]) -> Result<Self> {
        let points = dedup_consecutive(points);
        if points.len() < 2 {
            return Err(Error::pre("cannot fit a curve to coincident points"));
        }
        let p0 = points[0];
        let p3 = points[points.len() - 1];
        if points.len() == 2 {
            return Ok(Self::line(p0, p3));
        }
        let mut params = chord_params(&points);
        if points.len() == 3 {
            return Ok(Self::through_midpoint(p0, points[1], p3, params[1]));
        }
        let mut curve = Self::solve(&points, &params).unwrap_or_else(|| Self::line(p0, p3));
        for _ in 0..MAX_REPARAM_PASSES {
            let mut moved: f64 = 0.0;
            for (u, &q) in params.iter_mut().zip(&points).skip(1) {
                let next = curve.project(q, *u);
                moved = moved.max((next - *u).abs());
                *u = next;
            }
            let last = params.len() - 1;
            params[last] = 1.0;
            match Self::solve(&points, &params) {
                Some(c) => curve = c,
                None => break,
            }
            if moved < REPARAM_TOLERANCE {
                break;
            }
        }
        Ok(curve)
    }

    fn line(p0: Point2, p3: Point2) -> Self {
        Self { p: [p0, p0.lerp(p3, 1.0 / 3.0), p0.lerp(p3, 2.0 / 3.0), p3] }
    }

    /// Quadratic through `mid` at parameter `u`, degree-elevated to cubic.
    fn through_midpoint(p0: Point2, mid: Point2, p3: Point2, u: f64) -> Self {
        let v = 1.0 - u;
        let q1 = (mid - p0 * (v * v) - p3 * (u * u)) / (2.0 * u * v);
        Self { p: [p0, p0 / 3.0 + q1 * (2.0 / 3.0), q1 * (2.0 / 3.0) + p3 / 3.0, p3] }
    }

    fn solve(points: &[Point2], params: &[f64]) -> Option<Self> {
        let p0 = points[0];
        let p3 = points[points.len() - 1];
        let (mut c11, mut c12, mut c22) = (0.0, 0.0, 0.0);
        let (mut x1, mut x2) = (Point2::default(), Point2::default());
        for (&q, &u) in points.iter().zip(params) {
            let v = 1.0 - u;
            let b0 = v * v * v;
            let b1 = 3.0 * v * v * u;
            let b2 = 3.0 * v * u * u;
            let b3 = u * u * u;
            let r = q - p0 * b0 - p3 * b3;
            c11 += b1 * b1;
            c12 += b1 * b2;
            c22 += b2 * b2;
            x1 += r * b1;
            x2 += r * b2;
        }
        let det = c11 * c22 - c12 * c12;
        if det.abs() <= 1e-12 * (c11 * c22).max(f64::MIN_POSITIVE) {
            return None;
        }
        let p1 = (x1 * c22 - x2 * c12) / det;
        let p2 = (x2 * c11 - x1 * c12) / det;
        (p1.is_finite() && p2.is_finite()).then_some(Self { p: [p0, p1, p2, p3] })
    }

    /// One Newton step toward the parameter of the closest curve point.
    fn project(&self, q: Point2, u: f64) -> f64 {
        let d = self.eval(u) - q;
        let d1 = self.derivative(u);
        let d2 = self.second_derivative(u);
        let num = d.dot(d1);
        let den = d1.dot(d1) + d.dot(d2);
        if den <= 0.0 || !den.is_finite() {
            return u;
        }
        (u - num / den).clamp(0.0, 1.0)
    }
}

fn chord_params(points: &[Point2]) -> Vec<f64> {
    let mut params = Vec::with_capacity(points.len());
    let mut total = 0.0;
    params.push(0.0);
    for w in points.windows(2) {
        total += w[0].distance(w[1]);
        params.push(total);
    }
    params.iter_mut().for_each(|u| *u /= total);
    params
}

/// Fits a pinned-endpoint least-squares cubic Bezier to a long side and
/// resamples it to `m` points equally spaced in arc length.
pub fn bezier_fit_side(side: &[Point2], m: usize) -> Result<Vec<Point2>> {
    if side.len() < 2 {
        return Err(Error::pre("side needs at least 2 points"));
    }
    if m < 2 {
        return Err(Error::pre("need at least 2 samples per side"));
    }
    if !side.iter().all(|p| p.is_finite()) {
        return Err(Error::pre("side point is not finite"));
    }
    let curve = CubicBezier::fit(side)?;
    let mut out = sample_equal_arc_length(|u| curve.eval(u), &[(0.0, 1.0)], m);
    out[0] = side[0];
    out[m - 1] = side[side.len() - 1];
    Ok(out)
}
