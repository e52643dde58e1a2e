// Float intrinsics are not available in `core`.
pub(crate) use libm::{ceil, exp, log, sqrt};

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}
