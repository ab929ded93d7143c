//! Scalar numerical kernels shared by the rest of the crate.

mod quad;
mod roots;
mod spline;
mod tridiag;

pub use quad::{adaptive_simpson, sech_power_integral};
pub use roots::{bisect, Bisection};
pub use spline::CubicSpline;
pub use tridiag::Tridiagonal;

/// `sech(z)`, evaluated without overflow for large `|z|`.
#[inline]
pub fn sech(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    2.0 * e / (1.0 + e * e)
}
