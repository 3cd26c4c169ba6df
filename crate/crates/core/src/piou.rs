//! Polygon IoU: the structured Monte-Carlo estimator used for localization
//! quality, plus a rasterized exact reference and bounding-box IoU.
//!
//! The Monte-Carlo estimator samples `K` points inside each instance on a
//! grid aligned to its component quads, snaps them to tolerance-sized cells,
//! and takes the ratio of shared cells to all occupied cells.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{BBox, ComponentSequence, Point2, Polygon};
use crate::{math, Error, Result};

/// Default sample count per instance.
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Default quantization cell size as a fraction of the joint bbox diagonal.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 0.005;
/// Default raster resolution along the longer side of the joint bbox.
pub const DEFAULT_RASTER_RESOLUTION: usize = 4096;

/// Quantization cell size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Fixed size in pixels.
    Absolute(f64),
    /// Fraction of the diagonal of the joint bounding box of both instances.
    RelativeToDiagonal(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PIoUConfig {
    pub k_samples: usize,
    pub tolerance: Tolerance,
    pub seed: u64,
    /// Value reported when neither instance occupies any cell.
    pub empty_value: f64,
}

impl Default for PIoUConfig {
    fn default() -> Self {
        Self {
            k_samples: DEFAULT_SAMPLES,
            tolerance: Tolerance::RelativeToDiagonal(DEFAULT_RELATIVE_TOLERANCE),
            seed: 0,
            empty_value: 1.0,
        }
    }
}

impl PIoUConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_samples == 0 {
            return Err(Error::pre("k_samples must be >= 1"));
        }
        let tol = match self.tolerance {
            Tolerance::Absolute(t) | Tolerance::RelativeToDiagonal(t) => t,
        };
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::pre("tolerance must be positive"));
        }
        if !(0.0..=1.0).contains(&self.empty_value) {
            return Err(Error::pre("empty_value must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Cell size in pixels for a pair of instances.
    ///
    /// A relative tolerance over a zero-size bbox falls back to one pixel.
    pub fn resolve_tolerance(&self, a: &ComponentSequence, b: &ComponentSequence) -> f64 {
        match self.tolerance {
            Tolerance::Absolute(t) => t,
            Tolerance::RelativeToDiagonal(f) => {
                let diag = sequence_bbox(a).union(&sequence_bbox(b)).diagonal();
                if diag > 0.0 {
                    f * diag
                } else {
                    1.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PIoUEstimate {
    pub value: f64,
    pub intersection_cells: usize,
    pub union_cells: usize,
    /// Resolved cell size in pixels.
    pub tolerance_px: f64,
    pub config: PIoUConfig,
}

/// Sorted, deduplicated set of quantization cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellSet(Vec<(i64, i64)>);

impl CellSet {
    pub fn cells(&self) -> &[(i64, i64)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn intersection_len(&self, other: &CellSet) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Snaps points to `(floor(x / tol), floor(y / tol))` cells.
pub fn quantize(points: &[Point2], tolerance: f64) -> Result<CellSet> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::pre("tolerance must be positive"));
    }
    let mut cells: Vec<(i64, i64)> = points
        .iter()
        .map(|p| (math::floor(p.x / tolerance) as i64, math::floor(p.y / tolerance) as i64))
        .collect();
    cells.sort_unstable();
    cells.dedup();
    Ok(CellSet(cells))
}

fn sequence_bbox(seq: &ComponentSequence) -> BBox {
    BBox::of_points(seq.quads().iter().flat_map(|q| q.v.iter())).expect("sequence is non-empty")
}

/// Structured interior sampling of a component sequence.
///
/// Builds a `rows x cols` cell-centred grid over the unit square whose
/// aspect follows the instance's length-to-width ratio, so samples are
/// roughly evenly spaced in pixels. Columns advance along the sequence in
/// proportion to each quad's mean top/bottom edge length; rows run across
/// the quad. Grid positions map through the bilinear patch of the quad.
/// When `k` is not a product of the chosen grid the remaining samples are
/// drawn uniformly from the unit square with `seed`.
pub fn sample_interior(seq: &ComponentSequence, k: usize, seed: u64) -> Vec<Point2> {
    let quads = seq.quads();
    let lengths: Vec<f64> = quads
        .iter()
        .map(|q| 0.5 * (q.v[0].distance(q.v[1]) + q.v[3].distance(q.v[2])))
        .collect();
    let total_len: f64 = lengths.iter().sum();
    let mean_width = if total_len > 0.0 {
        quads
            .iter()
            .zip(&lengths)
            .map(|(q, l)| l * 0.5 * (q.v[0].distance(q.v[3]) + q.v[1].distance(q.v[2])))
            .sum::<f64>()
            / total_len
    } else {
        quads.iter().map(|q| 0.5 * (q.v[0].distance(q.v[3]) + q.v[1].distance(q.v[2]))).sum::<f64>()
            / quads.len() as f64
    };
    let aspect = match (total_len > 0.0, mean_width > 0.0) {
        (true, true) => total_len / mean_width,
        (true, false) => k as f64,
        (false, true) => 1.0 / k as f64,
        (false, false) => 1.0,
    };
    let rows = (math::round(math::sqrt(k as f64 / aspect)) as usize).clamp(1, k);
    let cols = (k / rows).max(1);

    // Cumulative arc position of each quad's left edge, normalized.
    let weights: Vec<f64> = if total_len > 0.0 {
        lengths.iter().map(|l| l / total_len).collect()
    } else {
        alloc::vec![1.0 / quads.len() as f64; quads.len()]
    };
    let mut starts = Vec::with_capacity(quads.len() + 1);
    starts.push(0.0);
    for w in &weights {
        starts.push(starts[starts.len() - 1] + w);
    }

    let map = |along: f64, across: f64| -> Point2 {
        let mut i = starts.partition_point(|&s| s <= along).saturating_sub(1);
        i = i.min(quads.len() - 1);
        while weights[i] == 0.0 && i + 1 < quads.len() {
            i += 1;
        }
        let local = if weights[i] > 0.0 { ((along - starts[i]) / weights[i]).clamp(0.0, 1.0) } else { 0.5 };
        bilinear(&quads[i].v, local, across)
    };

    let mut out = Vec::with_capacity(k);
    for r in 0..rows {
        let across = (r as f64 + 0.5) / rows as f64;
        for c in 0..cols {
            let along = (c as f64 + 0.5) / cols as f64;
            out.push(map(along, across));
        }
    }
    if out.len() < k {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < k {
            let along: f64 = rng.gen();
            let across: f64 = rng.gen();
            out.push(map(along, across));
        }
    }
    out
}

#[inline]
fn bilinear(v: &[Point2; 4], a: f64, b: f64) -> Point2 {
    v[0].lerp(v[1], a).lerp(v[3].lerp(v[2], a), b)
}

/// Monte-Carlo PIoU between two component sequences.
///
/// Symmetric in its arguments: both instances use the same sample count,
/// seed, and cell grid.
pub fn piou_mc(gt: &ComponentSequence, pred: &ComponentSequence, cfg: &PIoUConfig) -> Result<PIoUEstimate> {
    cfg.validate()?;
    let tol = cfg.resolve_tolerance(gt, pred);
    let a = quantize(&sample_interior(gt, cfg.k_samples, cfg.seed), tol)?;
    let b = quantize(&sample_interior(pred, cfg.k_samples, cfg.seed), tol)?;
    let inter = a.intersection_len(&b);
    let union = a.len() + b.len() - inter;
    let value = if union == 0 { cfg.empty_value } else { inter as f64 / union as f64 };
    Ok(PIoUEstimate { value, intersection_cells: inter, union_cells: union, tolerance_px: tol, config: *cfg })
}

/// Rasterized IoU with [`DEFAULT_RASTER_RESOLUTION`].
pub fn piou_exact(a: &Polygon, b: &Polygon) -> f64 {
    piou_exact_with(a, b, DEFAULT_RASTER_RESOLUTION)
}

/// IoU of two polygons by scanline rasterization on a shared grid with
/// `resolution` cells along the longer side of their joint bbox.
///
/// Pixel centres are classified with the even-odd rule. Zero-area inputs:
/// both empty gives 1, one empty gives 0.
pub fn piou_exact_with(a: &Polygon, b: &Polygon, resolution: usize) -> f64 {
    let (area_a, area_b) = (a.area(), b.area());
    match (area_a == 0.0, area_b == 0.0) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let bb = a.bbox().union(&b.bbox());
    let res = resolution.max(1) as f64;
    let h = bb.width().max(bb.height()) / res;
    let cols = math::ceil(bb.width() / h).max(1.0) as i64;
    let rows = math::ceil(bb.height() / h).max(1.0) as i64;

    let mut xs_a = Vec::new();
    let mut xs_b = Vec::new();
    let mut runs_a = Vec::new();
    let mut runs_b = Vec::new();
    let (mut count_a, mut count_b, mut count_i) = (0u64, 0u64, 0u64);
    for r in 0..rows {
        let y = bb.min.y + (r as f64 + 0.5) * h;
        scan_runs(a, y, bb.min.x, h, cols, &mut xs_a, &mut runs_a);
        scan_runs(b, y, bb.min.x, h, cols, &mut xs_b, &mut runs_b);
        count_a += runs_a.iter().map(|&(lo, hi)| (hi - lo + 1) as u64).sum::<u64>();
        count_b += runs_b.iter().map(|&(lo, hi)| (hi - lo + 1) as u64).sum::<u64>();
        count_i += overlap(&runs_a, &runs_b);
    }
    let union = count_a + count_b - count_i;
    if union == 0 {
        return if count_a == 0 && count_b == 0 { 1.0 } else { 0.0 };
    }
    count_i as f64 / union as f64
}

/// Inclusive column ranges of pixel centres inside `poly` on scanline `y`.
fn scan_runs(poly: &Polygon, y: f64, x0: f64, h: f64, cols: i64, xs: &mut Vec<f64>, runs: &mut Vec<(i64, i64)>) {
    xs.clear();
    runs.clear();
    for (p, q) in poly.edges() {
        if (p.y > y) != (q.y > y) {
            xs.push(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
        }
    }
    xs.sort_unstable_by(f64::total_cmp);
    for pair in xs.chunks_exact(2) {
        let lo = (math::ceil((pair[0] - x0) / h - 0.5) as i64).max(0);
        let hi = (math::floor((pair[1] - x0) / h - 0.5) as i64).min(cols - 1);
        if hi >= lo {
            match runs.last_mut() {
                Some(last) if last.1 + 1 >= lo => last.1 = last.1.max(hi),
                _ => runs.push((lo, hi)),
            }
        }
    }
}

fn overlap(a: &[(i64, i64)], b: &[(i64, i64)]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi >= lo {
            n += (hi - lo + 1) as u64;
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    n
}

/// IoU of the axis-aligned bounding boxes. Two identical zero-area boxes
/// give 1.
pub fn biou(a: &Polygon, b: &Polygon) -> f64 {
    bbox_iou(&a.bbox(), &b.bbox())
}

pub fn bbox_iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection(b).map_or(0.0, |r| r.area());
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    (inter / union).clamp(0.0, 1.0)
}
