use alloc::vec::Vec;

use super::contour::TextContour;
use super::point::Point2;
use super::polygon::Polygon;
use super::resample::{resample_side_with, SideFit};
use crate::{Error, Result};

/// One quadrilateral slice of a text instance.
///
/// Vertices are top-left, top-right, bottom-right, bottom-left relative to
/// reading direction: `v[0], v[1]` lie on the first long side and
/// `v[3], v[2]` on the second.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentQuad {
    pub v: [Point2; 4],
}

impl ComponentQuad {
    pub const fn new(v: [Point2; 4]) -> Self {
        Self { v }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().all(|p| p.is_finite())
    }

    /// Coordinates flattened as `x0, y0, ..., x3, y3`.
    pub fn coords(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (k, p) in self.v.iter().enumerate() {
            out[2 * k] = p.x;
            out[2 * k + 1] = p.y;
        }
        out
    }

    pub fn from_coords(c: [f64; 8]) -> Self {
        Self {
            v: [
                Point2::new(c[0], c[1]),
                Point2::new(c[2], c[3]),
                Point2::new(c[4], c[5]),
                Point2::new(c[6], c[7]),
            ],
        }
    }

    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> ComponentQuad {
        ComponentQuad { v: self.v.map(f) }
    }
}

/// Class of a component sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Label {
    #[default]
    Text,
    /// The "no object" padding class.
    Empty,
}

/// `t` ordered components forming one text instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSequence {
    quads: Vec<ComponentQuad>,
    scores: Option<Vec<f64>>,
    label: Label,
}

impl ComponentSequence {
    /// Validates length, finiteness, and score range. The shared-edge
    /// property is not enforced here since predictions need not satisfy
    /// it; see [`ComponentSequence::shares_edges`].
    pub fn new(quads: Vec<ComponentQuad>, scores: Option<Vec<f64>>, label: Label) -> Result<Self> {
        if quads.is_empty() {
            return Err(Error::pre("component sequence needs at least one quad"));
        }
        if !quads.iter().all(ComponentQuad::is_finite) {
            return Err(Error::pre("component vertex is not finite"));
        }
        if let Some(s) = &scores {
            if s.len() != quads.len() {
                return Err(Error::pre("one score per component required"));
            }
            if !s.iter().all(|x| (0.0..=1.0).contains(x)) {
                return Err(Error::pre("scores must lie in [0, 1]"));
            }
        }
        Ok(Self { quads, scores, label })
    }

    /// Ground-truth text sequence without scores.
    pub fn ground_truth(quads: Vec<ComponentQuad>) -> Result<Self> {
        Self::new(quads, None, Label::Text)
    }

    /// Prediction with per-component scores.
    pub fn prediction(quads: Vec<ComponentQuad>, scores: Vec<f64>) -> Result<Self> {
        Self::new(quads, Some(scores), Label::Text)
    }

    #[inline]
    pub fn quads(&self) -> &[ComponentQuad] {
        &self.quads
    }

    #[inline]
    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    #[inline]
    pub fn label(&self) -> Label {
        self.label
    }

    /// Sequence length `t`.
    #[inline]
    pub fn len(&self) -> usize {
        self.quads.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn with_scores(mut self, scores: Vec<f64>) -> Result<Self> {
        self.scores = Some(scores);
        Self::new(self.quads, self.scores, self.label)
    }

    /// True when consecutive quads share their junction edge within `tol`.
    pub fn shares_edges(&self, tol: f64) -> bool {
        self.quads.windows(2).all(|w| {
            w[0].v[1].distance(w[1].v[0]) <= tol && w[0].v[2].distance(w[1].v[3]) <= tol
        })
    }

    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Result<ComponentSequence> {
        ComponentSequence::new(
            self.quads.iter().map(|q| q.map_points(&f)).collect(),
            self.scores.clone(),
            self.label,
        )
    }

    /// Both long sides as `t + 1` points each, with junction points averaged
    /// where adjacent quads disagree.
    pub fn boundary(&self) -> (Vec<Point2>, Vec<Point2>) {
        let t = self.quads.len();
        let mut top = Vec::with_capacity(t + 1);
        let mut bottom = Vec::with_capacity(t + 1);
        top.push(self.quads[0].v[0]);
        bottom.push(self.quads[0].v[3]);
        for w in self.quads.windows(2) {
            top.push(w[0].v[1].midpoint(w[1].v[0]));
            bottom.push(w[0].v[2].midpoint(w[1].v[3]));
        }
        top.push(self.quads[t - 1].v[1]);
        bottom.push(self.quads[t - 1].v[2]);
        (top, bottom)
    }
}

/// Splits a contour into `t` components using the default side fit.
pub fn decompose(contour: &TextContour, t: usize) -> Result<ComponentSequence> {
    decompose_with(contour, t, SideFit::default())
}

/// Resamples each long side to `t + 1` points and pairs consecutive samples
/// across the two sides into quads.
pub fn decompose_with(contour: &TextContour, t: usize, fit: SideFit) -> Result<ComponentSequence> {
    if t == 0 {
        return Err(Error::pre("sequence length t must be >= 1"));
    }
    let top = resample_side_with(contour.side_a(), t + 1, fit)?;
    let bottom = resample_side_with(contour.side_b(), t + 1, fit)?;
    let quads = (0..t)
        .map(|i| ComponentQuad::new([top[i], top[i + 1], bottom[i + 1], bottom[i]]))
        .collect();
    ComponentSequence::ground_truth(quads)
}

/// Rebuilds the instance outline: top points forward, then bottom points
/// backward, `2 (t + 1)` vertices in total.
pub fn assemble(seq: &ComponentSequence) -> Polygon {
    let (mut top, bottom) = seq.boundary();
    top.extend(bottom.into_iter().rev());
    Polygon::from_vertices_unchecked(top)
}
