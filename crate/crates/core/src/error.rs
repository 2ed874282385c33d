use alloc::string::String;
use core::fmt;

use crate::image::Shape;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands that must agree in shape do not.
    ShapeMismatch { expected: Shape, found: Shape },
    /// Operation does not support this channel count.
    Channels { found: usize, expected: &'static str },
    /// Image is below the minimum size an operation needs.
    TooSmall {
        height: usize,
        width: usize,
        min_height: usize,
        min_width: usize,
    },
    /// Spatial dimensions are not multiples of the patch or scale size.
    NotDivisible {
        height: usize,
        width: usize,
        divisor: usize,
    },
    /// Sample buffer length disagrees with the declared shape.
    Length { expected: usize, found: usize },
    InvalidArgument(String),
    /// NaN or infinity where only finite values are allowed.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected {expected}, found {found}")
            }
            Error::Channels { found, expected } => {
                write!(f, "unsupported channel count {found} (expected {expected})")
            }
            Error::TooSmall {
                height,
                width,
                min_height,
                min_width,
            } => write!(
                f,
                "image {height}x{width} is smaller than the required {min_height}x{min_width}"
            ),
            Error::NotDivisible {
                height,
                width,
                divisor,
            } => write!(f, "dimensions {height}x{width} are not divisible by {divisor}"),
            Error::Length { expected, found } => {
                write!(f, "sample buffer has {found} values, shape needs {expected}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
