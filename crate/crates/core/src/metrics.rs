//! Evaluation metrics: PSNR, SSIM and patch-variance distributions.
//!
//! PSNR and SSIM are measured on BT.601 luma with a peak value of 1.0.
//! SSIM shares its window and constants with [`crate::loss::ssim_loss`].

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::image::{crop_border, crop_to_multiple, to_grayscale, Image};
use crate::loss::{gradient_variance, ssim_index};
use crate::math;
use crate::scalar::Scalar;

/// Lower edge of the default log-spaced variance histogram.
pub const HISTOGRAM_FLOOR: Scalar = 1e-8;
pub const HISTOGRAM_BINS: usize = 64;

/// Peak signal-to-noise ratio in dB between the lumas of `a` and `b` after
/// removing `border` pixels from each side.
///
/// Identical images give `+inf`.
pub fn psnr(a: &Image, b: &Image, border: usize) -> Result<Scalar> {
    a.check_same_shape(b)?;
    let ga = crop_border(&to_grayscale(a)?, border)?;
    let gb = crop_border(&to_grayscale(b)?, border)?;
    let n = ga.data().len() as Scalar;
    let mse = ga
        .data()
        .iter()
        .zip(gb.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<Scalar>()
        / n;
    if mse == 0.0 {
        return Ok(Scalar::INFINITY);
    }
    Ok(10.0 * math::log10(1.0 / mse))
}

/// Mean structural similarity of the lumas of `a` and `b`.
pub fn ssim(a: &Image, b: &Image) -> Result<Scalar> {
    ssim_index(a, b)
}

/// Raw per-patch gradient variances of one image plus their histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceHistogram {
    /// Patch size used.
    pub patch: usize,
    /// `v_x` values in row-major patch order.
    pub vx: Vec<Scalar>,
    /// `v_y` values in row-major patch order.
    pub vy: Vec<Scalar>,
    /// `bins + 1` strictly increasing edges.
    pub edges: Vec<Scalar>,
    pub counts_x: Vec<usize>,
    pub counts_y: Vec<usize>,
}

impl VarianceHistogram {
    pub fn mean_vx(&self) -> Scalar {
        mean(&self.vx)
    }
    pub fn mean_vy(&self) -> Scalar {
        mean(&self.vy)
    }
    pub fn max_value(&self) -> Scalar {
        self.vx.iter().chain(&self.vy).fold(0.0, |m, &v| m.max(v))
    }
    /// Re-bins the raw values onto `edges`, so several profiles can share
    /// one axis.
    pub fn rebin(&self, edges: &[Scalar]) -> VarianceHistogram {
        VarianceHistogram {
            patch: self.patch,
            vx: self.vx.clone(),
            vy: self.vy.clone(),
            edges: edges.to_vec(),
            counts_x: bin_counts(&self.vx, edges),
            counts_y: bin_counts(&self.vy, edges),
        }
    }
}

fn mean(v: &[Scalar]) -> Scalar {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<Scalar>() / v.len() as Scalar
    }
}

/// `bins` log-spaced bins over `[lo, hi]`. A degenerate range (`hi <= lo`)
/// becomes one decade above `lo`.
pub fn log_edges(lo: Scalar, hi: Scalar, bins: usize) -> Vec<Scalar> {
    let bins = bins.max(1);
    let hi = if hi > lo { hi } else { lo * 10.0 };
    let ratio = math::ln(hi / lo);
    let mut edges: Vec<Scalar> = (0..=bins)
        .map(|k| lo * math::exp(ratio * k as Scalar / bins as Scalar))
        .collect();
    edges[0] = lo;
    edges[bins] = hi;
    edges
}

/// Counts values per bin. Values below the first edge land in bin 0 and
/// values at or above the last edge land in the last bin.
pub fn bin_counts(values: &[Scalar], edges: &[Scalar]) -> Vec<usize> {
    let bins = edges.len().saturating_sub(1).max(1);
    let mut counts = vec![0usize; bins];
    for &v in values {
        // Index of the first edge strictly greater than v, minus one.
        let k = edges.partition_point(|&e| e <= v);
        counts[k.saturating_sub(1).min(bins - 1)] += 1;
    }
    counts
}

/// Gradient-map patch variances of `img`, center-cropped to multiples of `n`,
/// with the default 64-bin log histogram over `[1e-8, max]`.
pub fn variance_profile(img: &Image, n: usize) -> Result<VarianceHistogram> {
    if img.height() < n || img.width() < n {
        return Err(Error::TooSmall {
            height: img.height(),
            width: img.width(),
            min_height: n,
            min_width: n,
        });
    }
    let cropped = crop_to_multiple(img, n)?;
    let gv = gradient_variance(&cropped, n)?;
    let vx = gv.vx.values;
    let vy = gv.vy.values;
    let max = vx.iter().chain(&vy).fold(0.0, |m: Scalar, &v| m.max(v));
    let edges = log_edges(HISTOGRAM_FLOOR, max, HISTOGRAM_BINS);
    Ok(VarianceHistogram {
        patch: n,
        counts_x: bin_counts(&vx, &edges),
        counts_y: bin_counts(&vy, &edges),
        vx,
        vy,
        edges,
    })
}
