//! Planar floating-point images.
//!
//! Samples are stored channel-major: all of channel 0 row by row, then
//! channel 1, and so on. The nominal range is `[0, 1]`, but nothing clamps
//! intermediate results; only PNG export clamps.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// BT.601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [Scalar; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub const fn new(channels: usize, height: usize, width: usize) -> Self {
        Shape {
            channels,
            height,
            width,
        }
    }

    pub const fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn plane_len(&self) -> usize {
        self.height * self.width
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

/// Integer upscaling ratio, at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScaleFactor(usize);

impl ScaleFactor {
    pub fn new(s: usize) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "scale factor must be at least 2, got {s}"
            )));
        }
        Ok(ScaleFactor(s))
    }

    #[inline]
    pub const fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x", self.0)
    }
}

/// Channel-major raster of [`Scalar`] samples.
///
/// Any channel count is representable so the same type also carries network
/// feature maps; colour operations accept 1 or 3 channels only.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    shape: Shape,
    data: Vec<Scalar>,
}

impl Image {
    /// Wraps `data`, checking its length and that every sample is finite.
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<Scalar>) -> Result<Self> {
        let shape = Shape::new(channels, height, width);
        if data.len() != shape.len() {
            return Err(Error::Length {
                expected: shape.len(),
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(alloc::format!("sample {i} of {shape} image")));
        }
        Ok(Image { shape, data })
    }

    pub(crate) fn from_parts(shape: Shape, data: Vec<Scalar>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        Image { shape, data }
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: Scalar) -> Self {
        let shape = Shape::new(channels, height, width);
        Image {
            shape,
            data: vec![value; shape.len()],
        }
    }

    /// Builds an image by evaluating `f(channel, y, x)` at every sample.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> Scalar,
    ) -> Self {
        let shape = Shape::new(channels, height, width);
        let mut data = Vec::with_capacity(shape.len());
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Image { shape, data }
    }

    #[inline]
    pub fn shape(&self) -> Shape {
        self.shape
    }
    #[inline]
    pub fn channels(&self) -> usize {
        self.shape.channels
    }
    #[inline]
    pub fn height(&self) -> usize {
        self.shape.height
    }
    #[inline]
    pub fn width(&self) -> usize {
        self.shape.width
    }
    #[inline]
    pub fn data(&self) -> &[Scalar] {
        &self.data
    }
    #[inline]
    pub fn data_mut(&mut self) -> &mut [Scalar] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<Scalar> {
        self.data
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.shape.height + y) * self.shape.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> Scalar {
        self.data[self.index(c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: Scalar) {
        let i = self.index(c, y, x);
        self.data[i] = v;
    }

    pub fn plane(&self, c: usize) -> &[Scalar] {
        let n = self.shape.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [Scalar] {
        let n = self.shape.plane_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn map(&self, f: impl Fn(Scalar) -> Scalar) -> Image {
        Image::from_parts(self.shape, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Errors unless `other` has exactly this image's shape.
    pub fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                found: other.shape,
            });
        }
        Ok(())
    }

    /// `self + other`, shapes must match.
    pub fn add(&self, other: &Image) -> Result<Image> {
        self.check_same_shape(other)?;
        Ok(Image::from_parts(
            self.shape,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        ))
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Scalar, other: &Image) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&self, alpha: Scalar) -> Image {
        self.map(|v| alpha * v)
    }

    /// Sum of elementwise products, accumulated in storage order.
    pub fn dot(&self, other: &Image) -> Result<Scalar> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn is_all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies the rectangle starting at `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Image> {
        if top + height > self.height() || left + width > self.width() || height == 0 || width == 0
        {
            return Err(Error::InvalidArgument(alloc::format!(
                "crop {height}x{width} at ({top},{left}) does not fit in {}",
                self.shape
            )));
        }
        let mut out = Vec::with_capacity(self.channels() * height * width);
        for c in 0..self.channels() {
            let plane = self.plane(c);
            for y in top..top + height {
                let row = y * self.width();
                out.extend_from_slice(&plane[row + left..row + left + width]);
            }
        }
        Ok(Image::from_parts(
            Shape::new(self.channels(), height, width),
            out,
        ))
    }
}

/// Converts a 1- or 3-channel image to one luma channel.
///
/// Three channels use `0.299 R + 0.587 G + 0.114 B`; a single channel is
/// copied unchanged.
pub fn to_grayscale(img: &Image) -> Result<Image> {
    match img.channels() {
        1 => Ok(img.clone()),
        3 => {
            let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
            let [wr, wg, wb] = LUMA_WEIGHTS;
            let data = r
                .iter()
                .zip(g)
                .zip(b)
                .map(|((r, g), b)| wr * r + wg * g + wb * b)
                .collect();
            Ok(Image::from_parts(
                Shape::new(1, img.height(), img.width()),
                data,
            ))
        }
        found => Err(Error::Channels {
            found,
            expected: "1 or 3",
        }),
    }
}

/// Adjoint of [`to_grayscale`]: spreads a luma cotangent back onto
/// `channels` colour planes.
pub fn grayscale_backward(gray_cot: &Image, channels: usize) -> Result<Image> {
    if gray_cot.channels() != 1 {
        return Err(Error::Channels {
            found: gray_cot.channels(),
            expected: "1",
        });
    }
    match channels {
        1 => Ok(gray_cot.clone()),
        3 => {
            let n = gray_cot.shape().plane_len();
            let mut data = Vec::with_capacity(3 * n);
            for w in LUMA_WEIGHTS {
                data.extend(gray_cot.data().iter().map(|g| w * g));
            }
            Ok(Image::from_parts(
                Shape::new(3, gray_cot.height(), gray_cot.width()),
                data,
            ))
        }
        found => Err(Error::Channels {
            found,
            expected: "1 or 3",
        }),
    }
}

/// Removes `px` pixels from every side.
pub fn crop_border(img: &Image, px: usize) -> Result<Image> {
    if px == 0 {
        return Ok(img.clone());
    }
    if 2 * px >= img.height().min(img.width()) {
        return Err(Error::TooSmall {
            height: img.height(),
            width: img.width(),
            min_height: 2 * px + 1,
            min_width: 2 * px + 1,
        });
    }
    img.crop(px, px, img.height() - 2 * px, img.width() - 2 * px)
}

/// Center-crops so both dimensions are multiples of `multiple`.
///
/// Odd leftovers are split with the extra row/column removed from the
/// bottom/right.
pub fn crop_to_multiple(img: &Image, multiple: usize) -> Result<Image> {
    if multiple == 0 {
        return Err(Error::InvalidArgument("crop multiple must be positive".into()));
    }
    let h = img.height() / multiple * multiple;
    let w = img.width() / multiple * multiple;
    if h == 0 || w == 0 {
        return Err(Error::TooSmall {
            height: img.height(),
            width: img.width(),
            min_height: multiple,
            min_width: multiple,
        });
    }
    if h == img.height() && w == img.width() {
        return Ok(img.clone());
    }
    img.crop((img.height() - h) / 2, (img.width() - w) / 2, h, w)
}
