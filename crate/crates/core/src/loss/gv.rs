//! Gradient variance loss.
//!
//! Pipeline for each of SR and HR: luma → Sobel (`gx`, `gy`) → unfold into
//! non-overlapping `n × n` patches → unbiased per-patch variance. The loss
//! compares the SR and HR variance maps axis by axis and sums the two axes.

use alloc::vec;
use alloc::vec::Vec;


use super::LossResult;
use crate::error::{Error, Result};
use crate::gradients::{sobel_backward, sobel_forward, GradientPair};
use crate::image::{grayscale_backward, to_grayscale, Image, Shape};
use crate::math;
use crate::scalar::Scalar;

/// Matrix of flattened patches, one column per patch.
///
/// Stored column-major: column `j` occupies `data[j*n*n .. (j+1)*n*n]`
/// and lists the patch row by row. Columns follow row-major patch order.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedPatches {
    patch: usize,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl UnfoldedPatches {
    pub fn patch_size(&self) -> usize {
        self.patch
    }
    /// Patch grid rows (`h / n`).
    pub fn grid_rows(&self) -> usize {
        self.rows
    }
    /// Patch grid columns (`w / n`).
    pub fn grid_cols(&self) -> usize {
        self.cols
    }
    /// Number of matrix rows, `n²`.
    pub fn column_len(&self) -> usize {
        self.patch * self.patch
    }
    /// Number of matrix columns (patches).
    pub fn column_count(&self) -> usize {
        self.rows * self.cols
    }
    pub fn column(&self, j: usize) -> &[Scalar] {
        let len = self.column_len();
        &self.data[j * len..(j + 1) * len]
    }
    pub fn columns(&self) -> impl Iterator<Item = &[Scalar]> {
        self.data.chunks_exact(self.column_len())
    }
    /// Entry at matrix row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.data[j * self.column_len() + i]
    }

    /// Builds patches from raw column data, for callers that already hold
    /// per-patch values.
    pub fn from_columns(patch: usize, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        let expected = patch * patch * rows * cols;
        if data.len() != expected {
            return Err(Error::Length {
                expected,
                found: data.len(),
            });
        }
        Ok(UnfoldedPatches {
            patch,
            rows,
            cols,
            data,
        })
    }
}

/// Per-patch variance grid of shape `(h/n) × (w/n)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceMap {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Scalar>,
}

impl VarianceMap {
    pub fn mean(&self) -> Scalar {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<Scalar>() / self.values.len() as Scalar
    }
}

/// How the two variance maps are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GvReduction {
    /// Mean over patches of squared differences (default).
    #[default]
    MeanSquared,
    /// Plain Euclidean norm of the difference vector.
    Euclidean,
}

/// Cuts a single-channel map into non-overlapping `n × n` patches.
pub fn unfold(map: &Image, n: usize) -> Result<UnfoldedPatches> {
    if map.channels() != 1 {
        return Err(Error::Channels {
            found: map.channels(),
            expected: "1",
        });
    }
    if n == 0 || map.height() % n != 0 || map.width() % n != 0 || map.height() == 0 || map.width() == 0 {
        return Err(Error::NotDivisible {
            height: map.height(),
            width: map.width(),
            divisor: n,
        });
    }
    let (w, rows, cols) = (map.width(), map.height() / n, map.width() / n);
    let src = map.data();
    let mut data = Vec::with_capacity(src.len());
    for py in 0..rows {
        for px in 0..cols {
            for dy in 0..n {
                let start = (py * n + dy) * w + px * n;
                data.extend_from_slice(&src[start..start + n]);
            }
        }
    }
    Ok(UnfoldedPatches {
        patch: n,
        rows,
        cols,
        data,
    })
}

/// Inverse of [`unfold`].
pub fn fold(patches: &UnfoldedPatches) -> Image {
    let n = patches.patch;
    let (h, w) = (patches.rows * n, patches.cols * n);
    let mut out = vec![0.0; h * w];
    for (j, col) in patches.columns().enumerate() {
        let (py, px) = (j / patches.cols, j % patches.cols);
        for dy in 0..n {
            let start = (py * n + dy) * w + px * n;
            out[start..start + n].copy_from_slice(&col[dy * n..(dy + 1) * n]);
        }
    }
    Image::from_parts(Shape::new(1, h, w), out)
}

/// Unbiased variance of each column: `Σ (g - μ)² / (n² - 1)`.
pub fn patch_variance(patches: &UnfoldedPatches) -> Result<VarianceMap> {
    if patches.patch < 2 {
        return Err(Error::InvalidArgument(
            "patch size must be at least 2 for an unbiased variance".into(),
        ));
    }
    let len = patches.column_len() as Scalar;
    let values = patches
        .columns()
        .map(|col| {
            let mean = col.iter().sum::<Scalar>() / len;
            col.iter().map(|g| (g - mean) * (g - mean)).sum::<Scalar>() / (len - 1.0)
        })
        .collect();
    Ok(VarianceMap {
        rows: patches.rows,
        cols: patches.cols,
        values,
    })
}

/// Pulls a per-patch variance cotangent back onto the patch entries:
/// `∂v/∂g_j = 2 (g_j - μ) / (n² - 1)`.
pub fn patch_variance_backward(patches: &UnfoldedPatches, cot: &[Scalar]) -> Result<UnfoldedPatches> {
    if cot.len() != patches.column_count() {
        return Err(Error::Length {
            expected: patches.column_count(),
            found: cot.len(),
        });
    }
    let len = patches.column_len() as Scalar;
    let mut data = Vec::with_capacity(patches.data.len());
    for (col, &c) in patches.columns().zip(cot) {
        let mean = col.iter().sum::<Scalar>() / len;
        let k = 2.0 * c / (len - 1.0);
        data.extend(col.iter().map(|g| k * (g - mean)));
    }
    Ok(UnfoldedPatches {
        data,
        ..*patches
    })
}

/// Variance maps of both gradient directions.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVariance {
    pub vx: VarianceMap,
    pub vy: VarianceMap,
}

struct GvIntermediates {
    ux: UnfoldedPatches,
    uy: UnfoldedPatches,
    var: GradientVariance,
}

fn gv_forward(img: &Image, n: usize) -> Result<GvIntermediates> {
    let gray = to_grayscale(img)?;
    let grads = sobel_forward(&gray)?;
    let ux = unfold(&grads.gx, n)?;
    let uy = unfold(&grads.gy, n)?;
    let vx = patch_variance(&ux)?;
    let vy = patch_variance(&uy)?;
    Ok(GvIntermediates {
        ux,
        uy,
        var: GradientVariance { vx, vy },
    })
}

/// Runs luma → Sobel → unfold → variance on `img`.
pub fn gradient_variance(img: &Image, n: usize) -> Result<GradientVariance> {
    Ok(gv_forward(img, n)?.var)
}

fn check_gv_inputs(sr: &Image, hr: &Image, n: usize) -> Result<()> {
    sr.check_same_shape(hr)?;
    if n < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "GV patch size must be at least 2, got {n}"
        )));
    }
    if sr.height() % n != 0 || sr.width() % n != 0 {
        return Err(Error::NotDivisible {
            height: sr.height(),
            width: sr.width(),
            divisor: n,
        });
    }
    Ok(())
}

/// Distance between two variance maps and its cotangent w.r.t. `sr`.
fn distance(sr: &[Scalar], hr: &[Scalar], reduction: GvReduction) -> (Scalar, Vec<Scalar>) {
    let diff: Vec<Scalar> = sr.iter().zip(hr).map(|(a, b)| a - b).collect();
    let sq: Scalar = diff.iter().map(|d| d * d).sum();
    match reduction {
        GvReduction::MeanSquared => {
            let count = diff.len() as Scalar;
            (sq / count, diff.iter().map(|d| 2.0 * d / count).collect())
        }
        GvReduction::Euclidean => {
            let norm = math::sqrt(sq);
            let grad = if norm > 0.0 {
                diff.iter().map(|d| d / norm).collect()
            } else {
                vec![0.0; diff.len()]
            };
            (norm, grad)
        }
    }
}

/// Gradient variance loss with the default mean-squared reduction.
pub fn gv_loss(sr: &Image, hr: &Image, n: usize) -> Result<LossResult> {
    gv_loss_with(sr, hr, n, GvReduction::MeanSquared)
}

/// Gradient variance loss of `sr` against `hr` with patch size `n`.
///
/// `hr` is treated as a constant; `grad_sr` is the full cotangent through
/// the variance, unfold, Sobel and luma steps.
pub fn gv_loss_with(sr: &Image, hr: &Image, n: usize, reduction: GvReduction) -> Result<LossResult> {
    check_gv_inputs(sr, hr, n)?;
    let fsr = gv_forward(sr, n)?;
    let vhr = gradient_variance(hr, n)?;

    let (lx, cx) = distance(&fsr.var.vx.values, &vhr.vx.values, reduction);
    let (ly, cy) = distance(&fsr.var.vy.values, &vhr.vy.values, reduction);

    let gx = fold(&patch_variance_backward(&fsr.ux, &cx)?);
    let gy = fold(&patch_variance_backward(&fsr.uy, &cy)?);
    let gray_cot = sobel_backward(&GradientPair { gx, gy })?;
    let grad_sr = grayscale_backward(&gray_cot, sr.channels())?;
    Ok(LossResult {
        value: lx + ly,
        grad_sr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfold_shapes() {
        let m = Image::zeros(1, 8, 8);
        let u = unfold(&m, 8).unwrap();
        assert_eq!((u.column_len(), u.column_count()), (64, 1));
        let m = Image::zeros(1, 16, 16);
        let u = unfold(&m, 8).unwrap();
        assert_eq!((u.column_len(), u.column_count()), (64, 4));
        assert!(unfold(&Image::zeros(1, 8, 8), 3).is_err());
    }

    #[test]
    fn unfold_column_order_is_row_major() {
        let m = Image::from_fn(1, 4, 6, |_, y, x| (y * 6 + x) as Scalar);
        let u = unfold(&m, 2).unwrap();
        assert_eq!(u.column(0), &[0.0, 1.0, 6.0, 7.0]);
        assert_eq!(u.column(1), &[2.0, 3.0, 8.0, 9.0]);
        assert_eq!(u.column(3), &[12.0, 13.0, 18.0, 19.0]);
        assert_eq!(u.get(3, 2), 11.0);
        assert_eq!(fold(&u), m);
    }

    #[test]
    fn variance_hand_value() {
        let u = UnfoldedPatches::from_columns(2, 1, 1, alloc::vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let v = patch_variance(&u).unwrap();
        assert_eq!(v.values, alloc::vec![0.25]);
    }

    #[test]
    fn variance_of_constant_patch_is_zero() {
        let u = UnfoldedPatches::from_columns(3, 1, 1, alloc::vec![0.5; 9]).unwrap();
        assert_eq!(patch_variance(&u).unwrap().values[0], 0.0);
        // Inexact means leave only rounding noise.
        let u = UnfoldedPatches::from_columns(3, 1, 1, alloc::vec![0.4; 9]).unwrap();
        assert!(patch_variance(&u).unwrap().values[0] < 1e-30);
    }

    #[test]
    fn variance_rejects_unit_patch() {
        let u = UnfoldedPatches::from_columns(1, 2, 2, alloc::vec![0.0; 4]).unwrap();
        assert!(patch_variance(&u).is_err());
    }

    #[test]
    fn gv_of_identical_images_is_zero() {
        let img = Image::from_fn(3, 16, 16, |c, y, x| ((c * 5 + y * 3 + x * 7) % 13) as Scalar / 13.0);
        let r = gv_loss(&img, &img, 8).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.grad_sr.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gv_ignores_constant_offset_of_reference() {
        let sr = Image::from_fn(1, 16, 16, |_, y, x| ((y * 3 + x * 5) % 7) as Scalar / 7.0);
        let hr = Image::from_fn(1, 16, 16, |_, y, x| ((y * y + x) % 5) as Scalar / 5.0);
        let shifted = hr.map(|v| v + 0.25);
        let a = gv_loss(&sr, &hr, 8).unwrap().value;
        let b = gv_loss(&sr, &shifted, 8).unwrap().value;
        assert!((a - b).abs() <= 4.0 * Scalar::EPSILON * a.abs());
    }

    #[test]
    fn gv_rejects_bad_inputs() {
        let a = Image::zeros(1, 16, 16);
        assert!(gv_loss(&a, &Image::zeros(1, 16, 8), 8).is_err());
        assert!(gv_loss(&Image::zeros(1, 12, 12), &Image::zeros(1, 12, 12), 8).is_err());
        assert!(gv_loss(&a, &a, 1).is_err());
    }

    #[test]
    fn euclidean_reduction_is_norm() {
        let sr = Image::from_fn(1, 8, 16, |_, y, x| ((y + 2 * x) % 4) as Scalar / 4.0);
        let hr = Image::zeros(1, 8, 16);
        let v = gradient_variance(&sr, 8).unwrap();
        let expected = v.vx.values.iter().map(|a| a * a).sum::<Scalar>().sqrt()
            + v.vy.values.iter().map(|a| a * a).sum::<Scalar>().sqrt();
        let r = gv_loss_with(&sr, &hr, 8, GvReduction::Euclidean).unwrap();
        assert!((r.value - expected).abs() < 1e-12);
    }
}
