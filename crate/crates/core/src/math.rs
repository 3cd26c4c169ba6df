//! Float helpers over `libm` so the crate builds without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// `gamma * base^(gamma - 1)`, the derivative of `base^gamma`.
///
/// Zero when `gamma == 0`, and zero at `base == 0` when `gamma < 1` where the
/// derivative is unbounded.
#[inline]
pub fn pow_deriv(base: f64, gamma: f64) -> f64 {
    if gamma == 0.0 || (base == 0.0 && gamma < 1.0) {
        0.0
    } else {
        gamma * powf(base, gamma - 1.0)
    }
}
