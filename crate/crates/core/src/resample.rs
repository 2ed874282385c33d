//! Separable cubic-convolution resampling.
//!
//! Coordinates are half-pixel centred (`src = (dst + 0.5) * in / out - 0.5`),
//! taps outside the frame replicate the nearest edge sample, and the kernel
//! uses `a = -0.5`. When shrinking, the kernel is stretched by the reduction
//! ratio and its taps renormalised, so the cubic itself acts as the
//! anti-aliasing filter. Results are not clamped.

use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::image::{crop_to_multiple, Image, ScaleFactor, Shape};
use crate::math;
use crate::scalar::Scalar;

/// Cubic convolution kernel parameter.
pub const CUBIC_A: Scalar = -0.5;

/// Keys' cubic convolution kernel with `a = -0.5`.
pub fn cubic_kernel(t: Scalar) -> Scalar {
    let a = CUBIC_A;
    let t = t.abs();
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

/// Per-output-sample list of `(source index, weight)` along one axis.
struct AxisWeights {
    taps: Vec<Vec<(usize, Scalar)>>,
}

impl AxisWeights {
    fn new(in_len: usize, out_len: usize) -> Self {
        let ratio = in_len as Scalar / out_len as Scalar;
        let stretch = if ratio > 1.0 { ratio } else { 1.0 };
        let radius = 2.0 * stretch;
        let last = in_len as isize - 1;
        let taps = (0..out_len)
            .map(|i| {
                let center = (i as Scalar + 0.5) * ratio - 0.5;
                let lo = math::ceil(center - radius) as isize;
                let hi = math::floor(center + radius) as isize;
                let mut row: Vec<(usize, Scalar)> = Vec::with_capacity((hi - lo + 1) as usize);
                let mut sum = 0.0;
                for j in lo..=hi {
                    let w = cubic_kernel((j as Scalar - center) / stretch);
                    if w == 0.0 {
                        continue;
                    }
                    sum += w;
                    let src = j.clamp(0, last) as usize;
                    match row.iter_mut().find(|(k, _)| *k == src) {
                        Some(entry) => entry.1 += w,
                        None => row.push((src, w)),
                    }
                }
                for entry in &mut row {
                    entry.1 /= sum;
                }
                row
            })
            .collect();
        AxisWeights { taps }
    }
}

/// Resizes every channel to `out_h × out_w`.
pub fn bicubic_resize(img: &Image, out_h: usize, out_w: usize) -> Result<Image> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "target size {out_h}x{out_w} has a zero dimension"
        )));
    }
    if img.height() == 0 || img.width() == 0 {
        return Err(Error::TooSmall {
            height: img.height(),
            width: img.width(),
            min_height: 1,
            min_width: 1,
        });
    }
    let (c, h, w) = (img.channels(), img.height(), img.width());
    let wx = AxisWeights::new(w, out_w);
    let wy = AxisWeights::new(h, out_h);

    // Horizontal pass: c × h × out_w.
    let mut tmp = Vec::with_capacity(c * h * out_w);
    for ch in 0..c {
        let plane = img.plane(ch);
        for y in 0..h {
            let row = &plane[y * w..(y + 1) * w];
            for taps in &wx.taps {
                tmp.push(taps.iter().map(|&(k, wt)| wt * row[k]).sum::<Scalar>());
            }
        }
    }

    // Vertical pass: c × out_h × out_w.
    let mut out = Vec::with_capacity(c * out_h * out_w);
    for ch in 0..c {
        let plane = &tmp[ch * h * out_w..(ch + 1) * h * out_w];
        for taps in &wy.taps {
            for x in 0..out_w {
                out.push(
                    taps.iter()
                        .map(|&(k, wt)| wt * plane[k * out_w + x])
                        .sum::<Scalar>(),
                );
            }
        }
    }
    Ok(Image::from_parts(Shape::new(c, out_h, out_w), out))
}

/// Produces the low-resolution counterpart of `hr`.
///
/// `hr` is center-cropped to multiples of `s` and then shrunk by `s` with
/// [`bicubic_resize`].
pub fn make_lr(hr: &Image, s: ScaleFactor) -> Result<Image> {
    let s = s.get();
    let cropped = crop_to_multiple(hr, s)?;
    bicubic_resize(&cropped, cropped.height() / s, cropped.width() / s)
}

/// Bicubic upscaling baseline: `lr` enlarged by `s`.
pub fn upscale_bicubic(lr: &Image, s: ScaleFactor) -> Result<Image> {
    bicubic_resize(lr, lr.height() * s.get(), lr.width() * s.get())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_interpolates_nodes() {
        assert_eq!(cubic_kernel(0.0), 1.0);
        assert_eq!(cubic_kernel(1.0), 0.0);
        assert_eq!(cubic_kernel(-1.0), 0.0);
        assert_eq!(cubic_kernel(2.0), 0.0);
        assert_eq!(cubic_kernel(2.5), 0.0);
    }

    #[test]
    fn same_size_is_identity() {
        let img = Image::from_fn(3, 7, 5, |c, y, x| ((c * 31 + y * 7 + x * 3) % 11) as Scalar / 11.0);
        let out = bicubic_resize(&img, 7, 5).unwrap();
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((a - b).abs() <= 4.0 * Scalar::EPSILON * a.abs().max(1.0));
        }
    }

    #[test]
    fn ramp_upscale_matches_hand_weights() {
        // Weights at offset 0.25 (taps at distance 1.25, 0.25, 0.75, 1.75):
        // -0.0703125, 0.8671875, 0.2265625, -0.0234375. Edge replication
        // turns the missing tap at -1 into a copy of sample 0.
        let img = Image::new(1, 1, 4, alloc::vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let out = bicubic_resize(&img, 1, 8).unwrap();
        let expected = [
            -0.0703125, 0.1796875, 0.7265625, 1.25, 1.75, 2.2734375, 2.8203125, 3.0703125,
        ];
        for (a, e) in out.data().iter().zip(expected) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
    }

    #[test]
    fn zero_target_rejected() {
        let img = Image::zeros(1, 4, 4);
        assert!(bicubic_resize(&img, 0, 4).is_err());
        assert!(bicubic_resize(&img, 4, 0).is_err());
    }

    #[test]
    fn make_lr_crops_then_shrinks() {
        let hr = Image::from_fn(3, 65, 65, |c, y, x| ((c + y + x) % 9) as Scalar / 9.0);
        let lr = make_lr(&hr, ScaleFactor::new(2).unwrap()).unwrap();
        assert_eq!(lr.shape(), Shape::new(3, 32, 32));
    }

    #[test]
    fn make_lr_of_constant_is_constant() {
        let hr = Image::filled(1, 24, 36, 0.3);
        let lr = make_lr(&hr, ScaleFactor::new(3).unwrap()).unwrap();
        assert_eq!(lr.shape(), Shape::new(1, 8, 12));
        assert!(lr.data().iter().all(|v| (v - 0.3).abs() <= 1e-6));
    }

    #[test]
    fn make_lr_rejects_tiny_images() {
        let hr = Image::zeros(1, 1, 8);
        assert!(make_lr(&hr, ScaleFactor::new(2).unwrap()).is_err());
    }
}
