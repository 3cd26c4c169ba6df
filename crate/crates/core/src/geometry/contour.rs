use alloc::vec::Vec;

use super::point::Point2;
use super::polygon::Polygon;
use crate::{math, Error, Result};

/// A text polygon split into its two long sides.
///
/// Both sides run in reading direction and start at the same text end, so
/// `side_a` forward followed by `side_b` backward traces the polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct TextContour {
    side_a: Vec<Point2>,
    side_b: Vec<Point2>,
}

impl TextContour {
    pub fn new(side_a: Vec<Point2>, side_b: Vec<Point2>) -> Result<Self> {
        if side_a.len() < 2 || side_b.len() < 2 {
            return Err(Error::pre("each long side needs at least 2 vertices"));
        }
        if !side_a.iter().chain(&side_b).all(|p| p.is_finite()) {
            return Err(Error::pre("contour vertex is not finite"));
        }
        Ok(Self { side_a, side_b })
    }

    #[inline]
    pub fn side_a(&self) -> &[Point2] {
        &self.side_a
    }

    #[inline]
    pub fn side_b(&self) -> &[Point2] {
        &self.side_b
    }

    /// The closed outline: `side_a` forward, then `side_b` reversed.
    pub fn to_polygon(&self) -> Polygon {
        let mut v = self.side_a.clone();
        v.extend(self.side_b.iter().rev());
        Polygon::from_vertices_unchecked(v)
    }

    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Result<TextContour> {
        TextContour::new(
            self.side_a.iter().map(|&p| f(p)).collect(),
            self.side_b.iter().map(|&p| f(p)).collect(),
        )
    }
}

/// Annotation layouts with a known vertex convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatHint {
    /// CTW1500-style 14-point polygons: the first half of the vertices is
    /// the top side in reading order, the second half runs back along the
    /// bottom side.
    Ctw1500,
}

/// Splits a text polygon into two long sides.
///
/// With a fixed-format hint the polygon is cut in half by index. Otherwise
/// the head and tail edges are the pair of non-adjacent edges with the
/// largest summed exterior turning at their endpoints; near-ties prefer the
/// most balanced sides, then the shortest head and tail edges. The side
/// containing vertex 0 becomes `side_a`.
pub fn split_long_sides(poly: &Polygon, hint: Option<FormatHint>) -> Result<TextContour> {
    let v = poly.vertices();
    let n = v.len();
    match hint {
        Some(FormatHint::Ctw1500) => {
            if n % 2 != 0 || n < 4 {
                return Err(Error::Format(alloc::format!(
                    "fixed-format polygon needs an even vertex count >= 4, got {n}"
                )));
            }
            let half = n / 2;
            let side_a = v[..half].to_vec();
            let side_b = v[half..].iter().rev().copied().collect();
            TextContour::new(side_a, side_b)
        }
        None => split_by_corners(poly),
    }
}

const TIE_EPS: f64 = 1e-9;

fn split_by_corners(poly: &Polygon) -> Result<TextContour> {
    let v = poly.vertices();
    let n = v.len();
    if n < 4 {
        return Err(Error::pre("need at least 4 vertices to find two long sides"));
    }
    let area = poly.signed_area();
    if area == 0.0 || !area.is_finite() {
        return Err(Error::pre("degenerate polygon has zero area"));
    }
    let sign = area.signum();

    // Exterior turning at each vertex, positive at convex corners.
    let turn: Vec<f64> = (0..n)
        .map(|i| {
            let a = v[(i + n - 1) % n];
            let b = v[i];
            let c = v[(i + 1) % n];
            let (d1, d2) = (b - a, c - b);
            sign * math::atan2(d1.cross(d2), d1.dot(d2))
        })
        .collect();
    let edge_len: Vec<f64> = (0..n).map(|i| v[i].distance(v[(i + 1) % n])).collect();
    let edge_turn: Vec<f64> = (0..n).map(|i| turn[i] + turn[(i + 1) % n]).collect();
    let perimeter: f64 = edge_len.iter().sum();

    // Prefix sums of edge lengths for chain arc lengths.
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &l in &edge_len {
        prefix.push(prefix[prefix.len() - 1] + l);
    }

    struct Candidate {
        i: usize,
        j: usize,
        score: f64,
        balance: f64,
        cap_len: f64,
    }
    let mut best: Option<Candidate> = None;
    for i in 0..n {
        for j in (i + 2)..n {
            // Both chains keep at least two vertices.
            if j - i > n - 2 {
                continue;
            }
            // Chain i+1..=j spans edges i+1..j-1.
            let len1 = prefix[j] - prefix[i + 1];
            let len2 = perimeter - len1 - edge_len[i] - edge_len[j];
            let hi = len1.max(len2);
            let cand = Candidate {
                i,
                j,
                score: edge_turn[i] + edge_turn[j],
                balance: if hi > 0.0 { len1.min(len2) / hi } else { 1.0 },
                cap_len: edge_len[i] + edge_len[j],
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    if cand.score > b.score + TIE_EPS {
                        true
                    } else if cand.score < b.score - TIE_EPS {
                        false
                    } else if cand.balance > b.balance + TIE_EPS {
                        true
                    } else if cand.balance < b.balance - TIE_EPS {
                        false
                    } else {
                        cand.cap_len < b.cap_len - TIE_EPS
                    }
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let Candidate { i, j, .. } = best.expect("n >= 4 yields a candidate");

    // Chains in polygon order: j+1..=i (wrapping, always holds vertex 0)
    // and i+1..=j.
    let side_a: Vec<Point2> = (j + 1..=i + n).map(|k| v[k % n]).collect();
    let side_b: Vec<Point2> = (i + 1..=j).rev().map(|k| v[k]).collect();
    TextContour::new(side_a, side_b)
}
