/// Floating-point type used for every sample, weight and loss value.
#[cfg(not(feature = "f32"))]
pub type Scalar = f64;

/// Floating-point type used for every sample, weight and loss value.
#[cfg(feature = "f32")]
pub type Scalar = f32;

