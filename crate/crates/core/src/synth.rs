//! Seeded synthetic curved-text generator.
//!
//! A ribbon is a smooth centerline offset by a varying half-width on both
//! sides. The centerline curvature is piecewise linear between a few random
//! knots bounded by the curvature scale, which produces arcs and S-bends.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{decompose, BBox, ComponentQuad, ComponentSequence, Point2, Polygon, TextContour};
use crate::{math, Error, Result};

const MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonParams {
    /// Curvature control knots along the centerline.
    pub curvature_knots: usize,
    /// Largest absolute curvature (radians of turning per pixel).
    pub curvature_scale: f64,
    /// Half-width range in pixels, sampled independently at both ends.
    pub half_width: (f64, f64),
    /// Centerline length range in pixels.
    pub length: (f64, f64),
    /// Annotated vertices per long side.
    pub side_vertices: usize,
    /// Centerline segments in the dense reference outline.
    pub reference_segments: usize,
}

impl Default for RibbonParams {
    fn default() -> Self {
        Self::moderate()
    }
}

impl RibbonParams {
    pub fn straight() -> Self {
        Self { curvature_scale: 0.0, ..Self::moderate() }
    }

    pub fn moderate() -> Self {
        Self {
            curvature_knots: 4,
            curvature_scale: 0.006,
            half_width: (8.0, 16.0),
            length: (150.0, 300.0),
            side_vertices: 7,
            reference_segments: 256,
        }
    }

    pub fn high_curvature() -> Self {
        Self { curvature_knots: 5, curvature_scale: 0.012, ..Self::moderate() }
    }

    pub fn validate(&self) -> Result<()> {
        let (w0, w1) = self.half_width;
        let (l0, l1) = self.length;
        if !(w0 > 0.0 && w1 >= w0 && w1.is_finite()) {
            return Err(Error::pre("half-width range must be positive and ordered"));
        }
        if !(l0 > 0.0 && l1 >= l0 && l1.is_finite()) {
            return Err(Error::pre("length range must be positive and ordered"));
        }
        if !(self.curvature_scale >= 0.0 && self.curvature_scale.is_finite()) {
            return Err(Error::pre("curvature scale must be non-negative"));
        }
        if self.curvature_knots == 0 || self.side_vertices < 2 {
            return Err(Error::pre("need >= 1 curvature knot and >= 2 side vertices"));
        }
        if self.reference_segments < self.side_vertices - 1 {
            return Err(Error::pre("reference outline coarser than the annotation"));
        }
        Ok(())
    }
}

/// A generated instance: the annotation-style contour with its generator
/// sides, and a dense outline of the underlying smooth shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRibbon {
    pub contour: TextContour,
    pub reference: Polygon,
}

impl SyntheticRibbon {
    pub fn bbox(&self) -> BBox {
        self.reference.bbox().union(&self.contour.to_polygon().bbox())
    }

    fn translated(&self, offset: Point2, scale: f64, pivot: Point2) -> Result<SyntheticRibbon> {
        let f = |p: Point2| pivot + (p - pivot) * scale + offset;
        Ok(SyntheticRibbon { contour: self.contour.map_points(f)?, reference: self.reference.map_points(f)? })
    }
}

/// Generates one ribbon. Regenerates on self-intersection, up to a fixed
/// number of attempts from the same seeded stream.
pub fn gen_ribbon(seed: u64, params: &RibbonParams) -> Result<SyntheticRibbon> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let ribbon = draw_ribbon(&mut rng, params);
        if ribbon.contour.to_polygon().is_simple() && ribbon.reference.is_simple() {
            return Ok(ribbon);
        }
    }
    Err(Error::Generation(format!("no simple ribbon after {MAX_ATTEMPTS} attempts (seed {seed})")))
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn draw_ribbon(rng: &mut ChaCha8Rng, params: &RibbonParams) -> SyntheticRibbon {
    let length = uniform(rng, params.length);
    let kappa = params.curvature_scale;
    let knots: Vec<f64> =
        (0..params.curvature_knots).map(|_| if kappa > 0.0 { rng.gen_range(-kappa..=kappa) } else { 0.0 }).collect();
    let heading0 = rng.gen_range(-core::f64::consts::FRAC_PI_4..core::f64::consts::FRAC_PI_4);
    let w_start = uniform(rng, params.half_width);
    let w_end = uniform(rng, params.half_width);

    // Integrate the heading on a fine grid, then keep `reference_segments`
    // evenly spaced stations.
    let stations = params.reference_segments;
    let substeps = 8;
    let steps = stations * substeps;
    let ds = length / steps as f64;
    let curvature_at = |s: f64| -> f64 {
        if knots.len() == 1 {
            return knots[0];
        }
        let x = s * (knots.len() - 1) as f64;
        let i = (math::floor(x) as usize).min(knots.len() - 2);
        let f = x - i as f64;
        knots[i] * (1.0 - f) + knots[i + 1] * f
    };
    let mut centers = Vec::with_capacity(stations + 1);
    let mut headings = Vec::with_capacity(stations + 1);
    let mut p = Point2::default();
    let mut heading = heading0;
    centers.push(p);
    headings.push(heading);
    for step in 0..steps {
        let s_mid = (step as f64 + 0.5) / steps as f64;
        let h_mid = heading + 0.5 * curvature_at(s_mid) * ds;
        p += Point2::new(math::cos(h_mid), math::sin(h_mid)) * ds;
        heading += curvature_at(s_mid) * ds;
        if (step + 1) % substeps == 0 {
            centers.push(p);
            headings.push(heading);
        }
    }

    let offset = |i: usize, sign: f64| -> Point2 {
        let s = i as f64 / stations as f64;
        let w = w_start + (w_end - w_start) * s;
        let h = headings[i];
        // Image frame (y down): the normal (sin h, -cos h) points up for h = 0.
        centers[i] + Point2::new(math::sin(h), -math::cos(h)) * (w * sign)
    };
    let top: Vec<Point2> = (0..=stations).map(|i| offset(i, 1.0)).collect();
    let bottom: Vec<Point2> = (0..=stations).map(|i| offset(i, -1.0)).collect();

    let pick = |side: &[Point2]| -> Vec<Point2> {
        let m = params.side_vertices;
        (0..m)
            .map(|j| {
                let x = j as f64 * stations as f64 / (m - 1) as f64;
                let i = (math::floor(x) as usize).min(stations - 1);
                side[i].lerp(side[i + 1], x - i as f64)
            })
            .collect()
    };
    let contour = TextContour::new(pick(&top), pick(&bottom)).expect("sides have >= 2 finite points");
    let mut outline = top;
    outline.extend(bottom.into_iter().rev());
    SyntheticRibbon { contour, reference: Polygon::new(outline).expect("outline has finite vertices") }
}

/// Simulated prediction settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbParams {
    /// Sequence length.
    pub t: usize,
    /// Vertex jitter amplitude in pixels.
    pub noise_px: f64,
    /// Score decrease per pixel of noise.
    pub score_decay: f64,
}

impl Default for PerturbParams {
    fn default() -> Self {
        Self { t: 6, noise_px: 0.0, score_decay: 0.1 }
    }
}

/// Decomposes the contour and jitters every quad vertex independently by
/// uniform noise in `[-noise, noise]^2`. All components get the score
/// `clamp(1 - decay * noise, 0, 1)`.
pub fn perturb(contour: &TextContour, params: &PerturbParams, seed: u64) -> Result<ComponentSequence> {
    let noise = params.noise_px;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::pre("noise must be non-negative"));
    }
    if !(params.score_decay >= 0.0) {
        return Err(Error::pre("score decay must be non-negative"));
    }
    let seq = decompose(contour, params.t)?;
    let score = (1.0 - params.score_decay * noise).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quads = seq
        .quads()
        .iter()
        .map(|q| {
            let mut v = q.v;
            if noise > 0.0 {
                for p in &mut v {
                    let dx = rng.gen_range(-noise..=noise);
                    let dy = rng.gen_range(-noise..=noise);
                    *p += Point2::new(dx, dy);
                }
            }
            ComponentQuad::new(v)
        })
        .collect();
    ComponentSequence::prediction(quads, alloc::vec![score; params.t])
}

/// Per-instance seed derived from a scene seed (SplitMix64 step).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Places `count` ribbons inside a `width x height` canvas. Ribbons larger
/// than the canvas are scaled down to fit; overlap between ribbons is
/// allowed.
pub fn gen_scene(seed: u64, count: usize, canvas: (f64, f64), params: &RibbonParams) -> Result<Vec<SyntheticRibbon>> {
    let (cw, ch) = canvas;
    if !(cw > 0.0 && ch > 0.0 && cw.is_finite() && ch.is_finite()) {
        return Err(Error::pre("canvas must have positive size"));
    }
    (0..count as u64)
        .map(|i| {
            let s = derive_seed(seed, i);
            let ribbon = gen_ribbon(s, params)?;
            let bb = ribbon.bbox();
            let scale = (cw / bb.width()).min(ch / bb.height()).min(1.0);
            let (w, h) = (bb.width() * scale, bb.height() * scale);
            let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5CE7_E000);
            let x = if cw > w { rng.gen_range(0.0..(cw - w)) } else { 0.0 };
            let y = if ch > h { rng.gen_range(0.0..(ch - h)) } else { 0.0 };
            let placed = ribbon.translated(Point2::new(x, y) - bb.min, scale, bb.min)?;
            Ok(placed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let p = RibbonParams::high_curvature();
        assert_eq!(gen_ribbon(11, &p).unwrap(), gen_ribbon(11, &p).unwrap());
        assert_ne!(gen_ribbon(11, &p).unwrap(), gen_ribbon(12, &p).unwrap());
    }

    #[test]
    fn requested_vertex_counts() {
        for n in [2, 7, 10] {
            let p = RibbonParams { side_vertices: n, ..RibbonParams::moderate() };
            let r = gen_ribbon(3, &p).unwrap();
            assert_eq!(r.contour.side_a().len(), n);
            assert_eq!(r.contour.side_b().len(), n);
        }
    }

    #[test]
    fn straight_ribbon_is_a_trapezoid() {
        let r = gen_ribbon(5, &RibbonParams::straight()).unwrap();
        let a = r.contour.side_a();
        // Collinear top side.
        for w in a.windows(3) {
            assert!((w[1] - w[0]).cross(w[2] - w[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_params() {
        let p = RibbonParams { half_width: (0.0, 1.0), ..RibbonParams::moderate() };
        assert!(gen_ribbon(0, &p).is_err());
        let p = RibbonParams { curvature_knots: 0, ..RibbonParams::moderate() };
        assert!(gen_ribbon(0, &p).is_err());
    }

    #[test]
    fn pathological_params_exhaust_retries() {
        // Radius of curvature far below the half-width folds the inner side.
        let p = RibbonParams {
            curvature_knots: 12,
            curvature_scale: 0.5,
            half_width: (40.0, 40.0),
            length: (400.0, 400.0),
            ..RibbonParams::moderate()
        };
        assert!(matches!(gen_ribbon(0, &p), Err(Error::Generation(_))));
    }

    #[test]
    fn scene_counts() {
        let p = RibbonParams::moderate();
        assert!(gen_scene(1, 0, (640.0, 480.0), &p).unwrap().is_empty());
        assert_eq!(gen_scene(1, 3, (640.0, 480.0), &p).unwrap().len(), 3);
    }

    #[test]
    fn zero_noise_keeps_geometry() {
        let r = gen_ribbon(2, &RibbonParams::moderate()).unwrap();
        let p = perturb(&r.contour, &PerturbParams::default(), 9).unwrap();
        assert_eq!(p.quads(), decompose(&r.contour, 6).unwrap().quads());
        assert_eq!(p.scores().unwrap(), &[1.0; 6]);
    }
}
