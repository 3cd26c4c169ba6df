use alloc::vec;
use alloc::vec::Vec;

use super::point::Point2;
use crate::{Error, Result};

/// Cox-de Boor basis function `N_{i,k}(u)` over `knots`.
///
/// Spans are half-open `[u_i, u_{i+1})`, except that the last non-empty
/// span also contains the final knot so the basis still sums to one at the
/// right end of a clamped domain. `0/0` terms evaluate to zero.
pub fn bspline_basis(i: usize, degree: usize, u: f64, knots: &[f64]) -> Result<f64> {
    check_knots(knots)?;
    if knots.len() < degree + 2 || i > knots.len() - degree - 2 {
        return Err(Error::pre("basis index out of range for knot vector"));
    }
    Ok(basis_unchecked(i, degree, u, knots))
}

fn check_knots(knots: &[f64]) -> Result<()> {
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::pre("knot is not finite"));
    }
    if knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::pre("knots must be non-decreasing"));
    }
    Ok(())
}

fn basis_unchecked(i: usize, k: usize, u: f64, knots: &[f64]) -> f64 {
    if k == 0 {
        let (lo, hi) = (knots[i], knots[i + 1]);
        let last = knots[knots.len() - 1];
        let inside = lo <= u && u < hi;
        let closing = u == last && hi == last && lo < hi;
        return if inside || closing { 1.0 } else { 0.0 };
    }
    let mut value = 0.0;
    let left_den = knots[i + k] - knots[i];
    if left_den != 0.0 {
        value += (u - knots[i]) / left_den * basis_unchecked(i, k - 1, u, knots);
    }
    let right_den = knots[i + k + 1] - knots[i + 1];
    if right_den != 0.0 {
        value += (knots[i + k + 1] - u) / right_den * basis_unchecked(i + 1, k - 1, u, knots);
    }
    value
}

/// A B-spline curve `C(u) = sum_i N_{i,k}(u) P_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineCurve {
    control_points: Vec<Point2>,
    degree: usize,
    knots: Vec<f64>,
}

impl BSplineCurve {
    pub fn new(control_points: Vec<Point2>, degree: usize, knots: Vec<f64>) -> Result<Self> {
        if control_points.len() < degree + 1 {
            return Err(Error::pre("need at least degree + 1 control points"));
        }
        if knots.len() != control_points.len() + degree + 1 {
            return Err(Error::pre("knot count must be control points + degree + 1"));
        }
        if !control_points.iter().all(|p| p.is_finite()) {
            return Err(Error::pre("control point is not finite"));
        }
        check_knots(&knots)?;
        if knots[degree] >= knots[control_points.len()] {
            return Err(Error::pre("curve domain is empty"));
        }
        Ok(Self { control_points, degree, knots })
    }

    /// Clamped knot vector over `[0, 1]`: `degree + 1` repeated knots at each
    /// end, interior knots uniform.
    pub fn clamped_uniform(control_points: Vec<Point2>, degree: usize) -> Result<Self> {
        if control_points.len() < degree + 1 {
            return Err(Error::pre("need at least degree + 1 control points"));
        }
        let knots = clamped_uniform_knots(control_points.len(), degree);
        Self::new(control_points, degree, knots)
    }

    /// Clamped curve that passes through every point of `points`.
    ///
    /// Parameters follow chord length and interior knots are averages of
    /// `degree` consecutive parameters, which keeps the collocation matrix
    /// nonsingular. Consecutive duplicate points must be removed by the
    /// caller.
    pub fn interpolating(points: &[Point2], degree: usize) -> Result<Self> {
        let n = points.len();
        if n < degree + 1 || degree == 0 {
            return Err(Error::pre("need at least degree + 1 points and degree >= 1"));
        }
        let params = chord_length_params(points)?;
        let mut knots = vec![0.0; degree + 1];
        for j in 1..(n - degree) {
            let s: f64 = params[j..j + degree].iter().sum();
            knots.push(s / degree as f64);
        }
        knots.extend(core::iter::repeat(1.0).take(degree + 1));

        let mut matrix = vec![0.0; n * n];
        for (row, &u) in params.iter().enumerate() {
            for col in 0..n {
                matrix[row * n + col] = basis_unchecked(col, degree, u, &knots);
            }
        }
        let control_points = solve_points(&mut matrix, points, n)?;
        Self::new(control_points, degree, knots)
    }

    #[inline]
    pub fn control_points(&self) -> &[Point2] {
        &self.control_points
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Valid parameter range `[u_k, u_n]`.
    #[inline]
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.control_points.len()])
    }

    /// Distinct non-empty knot spans inside the domain.
    pub fn spans(&self) -> Vec<(f64, f64)> {
        let n = self.control_points.len();
        (self.degree..n)
            .filter(|&s| self.knots[s] < self.knots[s + 1])
            .map(|s| (self.knots[s], self.knots[s + 1]))
            .collect()
    }

    pub fn eval(&self, u: f64) -> Result<Point2> {
        let (lo, hi) = self.domain();
        if !(u >= lo && u <= hi) {
            return Err(Error::Domain { value: u, lo, hi });
        }
        Ok(self.eval_in_domain(u))
    }

    /// De Boor evaluation; `u` must already lie in the domain.
    pub(crate) fn eval_in_domain(&self, u: f64) -> Point2 {
        let k = self.degree;
        let span = self.find_span(u);
        let mut d: [Point2; 8] = [Point2::default(); 8];
        let mut buf;
        let work: &mut [Point2] = if k < 8 {
            &mut d[..=k]
        } else {
            buf = vec![Point2::default(); k + 1];
            &mut buf
        };
        for (j, slot) in work.iter_mut().enumerate() {
            *slot = self.control_points[span - k + j];
        }
        for r in 1..=k {
            for j in (r..=k).rev() {
                let i = span - k + j;
                let den = self.knots[i + k + 1 - r] - self.knots[i];
                let alpha = if den == 0.0 { 0.0 } else { (u - self.knots[i]) / den };
                work[j] = work[j - 1].lerp(work[j], alpha);
            }
        }
        work[k]
    }

    fn find_span(&self, u: f64) -> usize {
        let n = self.control_points.len();
        let k = self.degree;
        if u >= self.knots[n] {
            // Last non-empty span, closed on the right.
            let mut s = n - 1;
            while s > k && self.knots[s] >= self.knots[s + 1] {
                s -= 1;
            }
            return s;
        }
        // knots[k..=n] is sorted; find s with knots[s] <= u < knots[s+1].
        let upper = self.knots[k..=n].partition_point(|&x| x <= u);
        (k + upper - 1).clamp(k, n - 1)
    }
}

pub(crate) fn clamped_uniform_knots(count: usize, degree: usize) -> Vec<f64> {
    let interior = count - degree - 1;
    let mut knots = vec![0.0; degree + 1];
    for j in 1..=interior {
        knots.push(j as f64 / (interior + 1) as f64);
    }
    knots.extend(core::iter::repeat(1.0).take(degree + 1));
    knots
}

fn chord_length_params(points: &[Point2]) -> Result<Vec<f64>> {
    let mut params = Vec::with_capacity(points.len());
    params.push(0.0);
    let mut total = 0.0;
    for w in points.windows(2) {
        let d = w[0].distance(w[1]);
        if d == 0.0 {
            return Err(Error::pre("consecutive duplicate points"));
        }
        total += d;
        params.push(total);
    }
    for p in params.iter_mut() {
        *p /= total;
    }
    // Exact end parameter regardless of rounding.
    *params.last_mut().unwrap() = 1.0;
    Ok(params)
}

/// Solves `A X = B` for two right-hand sides by Gaussian elimination with
/// partial pivoting. `matrix` is row-major `n x n` and is overwritten.
fn solve_points(matrix: &mut [f64], rhs: &[Point2], n: usize) -> Result<Vec<Point2>> {
    let mut b: Vec<Point2> = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &c| matrix[a * n + col].abs().total_cmp(&matrix[c * n + col].abs()))
            .unwrap();
        if matrix[pivot * n + col].abs() < 1e-14 {
            return Err(Error::pre("singular interpolation system"));
        }
        if pivot != col {
            for j in 0..n {
                matrix.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = matrix[col * n + col];
        for row in (col + 1)..n {
            let f = matrix[row * n + col] / diag;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                matrix[row * n + j] -= f * matrix[col * n + j];
            }
            let bc = b[col];
            b[row] = b[row] - bc * f;
        }
    }
    let mut x = vec![Point2::default(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in (row + 1)..n {
            acc = acc - x[j] * matrix[row * n + j];
        }
        x[row] = acc / matrix[row * n + row];
    }
    Ok(x)
}
