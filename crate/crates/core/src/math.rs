//! Float functions that `core` does not provide, backed by `libm` so results
//! do not depend on whether `std` is linked.

use crate::scalar::Scalar;

#[cfg(not(feature = "f32"))]
mod imp {
    pub use libm::{ceil, exp, fabs as abs, floor, log, log10, pow, round, sqrt, tanh};
}

#[cfg(feature = "f32")]
mod imp {
    pub use libm::{
        ceilf as ceil, expf as exp, fabsf as abs, floorf as floor, log10f as log10, logf as log,
        powf as pow, roundf as round, sqrtf as sqrt, tanhf as tanh,
    };
}

#[inline]
pub fn abs(x: Scalar) -> Scalar {
    imp::abs(x)
}
#[inline]
pub fn sqrt(x: Scalar) -> Scalar {
    imp::sqrt(x)
}
#[inline]
pub fn exp(x: Scalar) -> Scalar {
    imp::exp(x)
}
#[inline]
pub fn ln(x: Scalar) -> Scalar {
    imp::log(x)
}
#[inline]
pub fn log10(x: Scalar) -> Scalar {
    imp::log10(x)
}
#[inline]
pub fn tanh(x: Scalar) -> Scalar {
    imp::tanh(x)
}
#[inline]
pub fn floor(x: Scalar) -> Scalar {
    imp::floor(x)
}
#[inline]
pub fn ceil(x: Scalar) -> Scalar {
    imp::ceil(x)
}
#[inline]
pub fn round(x: Scalar) -> Scalar {
    imp::round(x)
}
#[inline]
pub fn powi(x: Scalar, n: i32) -> Scalar {
    imp::pow(x, n as Scalar)
}
