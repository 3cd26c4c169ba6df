use alloc::vec::Vec;

use super::point::{BBox, Point2};
use crate::{Error, Result};

/// A closed polygon given by its ordered vertices; the closing edge is
/// implicit.
///
/// Construction only checks vertex count and finiteness. Predicted polygons
/// may self-intersect or collapse to zero area, so simplicity and
/// orientation are exposed as queries instead of construction invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::pre("polygon needs at least 3 vertices"));
        }
        if !vertices.iter().all(|p| p.is_finite()) {
            return Err(Error::pre("polygon vertex is not finite"));
        }
        Ok(Self { vertices })
    }

    /// Caller guarantees >= 3 finite vertices.
    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point2>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Self { vertices }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn into_vertices(self) -> Vec<Point2> {
        self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterator over edges `(v[i], v[i+1])`, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive for counter-clockwise order in a y-up frame.
    pub fn signed_area(&self) -> f64 {
        // Translate to the first vertex to limit cancellation.
        let o = self.vertices[0];
        let mut twice = 0.0;
        for w in self.vertices.windows(2).skip(1) {
            twice += (w[0] - o).cross(w[1] - o);
        }
        twice * 0.5
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.vertices).expect("polygon has vertices")
    }

    /// Even-odd containment test. Points on the boundary count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if on_segment(a, b, p) {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when no two edges meet except adjacent edges at their shared
    /// vertex. Zero-length edges make a polygon non-simple.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let v = &self.vertices;
        for i in 0..n {
            if v[i] == v[(i + 1) % n] {
                return false;
            }
        }
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            for j in (i + 1)..n {
                let (c, d) = (v[j], v[(j + 1) % n]);
                let adjacent_next = j == i + 1;
                let adjacent_wrap = i == 0 && j == n - 1;
                if adjacent_next {
                    // Shared vertex b == c; fold-back along the same line.
                    if orient(a, b, d) == 0.0 && (d - b).dot(a - b) > 0.0 {
                        return false;
                    }
                } else if adjacent_wrap {
                    // Shared vertex d == a.
                    if orient(c, a, b) == 0.0 && (b - a).dot(c - a) > 0.0 {
                        return false;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Applies `f` to every vertex.
    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Result<Polygon> {
        Polygon::new(self.vertices.iter().map(|&p| f(p)).collect())
    }

    /// Same polygon with the vertex order reversed.
    pub fn reversed(&self) -> Polygon {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Polygon { vertices }
    }
}

#[inline]
pub(crate) fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    orient(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching counts.
pub(crate) fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn poly(pts: &[(f64, f64)]) -> Polygon {
        Polygon::new(pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    fn unit_square() -> Polygon {
        poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    #[test]
    fn unit_square_area_and_orientation() {
        assert_eq!(unit_square().signed_area(), 1.0);
        assert_eq!(unit_square().reversed().signed_area(), -1.0);
    }

    #[test]
    fn containment_includes_boundary() {
        let sq = unit_square();
        assert!(sq.contains(Point2::new(0.5, 0.5)));
        assert!(sq.contains(Point2::new(0.0, 0.3)));
        assert!(sq.contains(Point2::new(1.0, 1.0)));
        assert!(sq.contains(Point2::new(0.5, 1.0)));
        assert!(!sq.contains(Point2::new(1.5, 0.5)));
        assert!(!sq.contains(Point2::new(-1e-9, 0.5)));
    }

    #[test]
    fn concave_containment() {
        // U shape opening upward.
        let u = poly(&[(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (2.0, 3.0), (2.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0)]);
        assert!(u.contains(Point2::new(0.5, 2.0)));
        assert!(!u.contains(Point2::new(1.5, 2.0)));
        assert!(u.contains(Point2::new(1.5, 0.5)));
        assert_eq!(u.area(), 7.0);
    }

    #[test]
    fn simplicity() {
        assert!(unit_square().is_simple());
        let bowtie = poly(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(!bowtie.is_simple());
        let dup = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(!dup.is_simple());
        // Spike folding back onto its incoming edge.
        let spike = poly(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        assert!(!spike.is_simple());
        // Vertex touching a non-adjacent edge.
        let touch = poly(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (2.0, 0.0), (0.0, 4.0)]);
        assert!(!touch.is_simple());
    }

    #[test]
    fn bbox_is_tight() {
        let p = poly(&[(1.0, 2.0), (5.0, -1.0), (3.0, 7.0)]);
        let bb = p.bbox();
        assert_eq!(bb.min, Point2::new(1.0, -1.0));
        assert_eq!(bb.max, Point2::new(5.0, 7.0));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(Polygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]).is_err());
        assert!(Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(f64::NAN, 0.0),
            Point2::new(0.0, 1.0)
        ])
        .is_err());
    }
}
