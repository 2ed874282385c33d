use alloc::vec;
use alloc::vec::Vec;

use super::LossResult;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Mean squared error over all samples.
pub fn l2_loss(sr: &Image, hr: &Image) -> Result<LossResult> {
    sr.check_same_shape(hr)?;
    let count = sr.data().len() as Scalar;
    let mut value = 0.0;
    let grad: Vec<Scalar> = sr
        .data()
        .iter()
        .zip(hr.data())
        .map(|(a, b)| {
            let d = a - b;
            value += d * d;
            2.0 * d / count
        })
        .collect();
    Ok(LossResult {
        value: value / count,
        grad_sr: Image::from_parts(sr.shape(), grad),
    })
}

/// Mean absolute error over all samples; the subgradient at zero is zero.
pub fn l1_loss(sr: &Image, hr: &Image) -> Result<LossResult> {
    sr.check_same_shape(hr)?;
    let count = sr.data().len() as Scalar;
    let mut value = 0.0;
    let grad: Vec<Scalar> = sr
        .data()
        .iter()
        .zip(hr.data())
        .map(|(a, b)| {
            let d = a - b;
            if d > 0.0 {
                value += d;
                1.0 / count
            } else if d < 0.0 {
                value -= d;
                -1.0 / count
            } else {
                0.0
            }
        })
        .collect();
    Ok(LossResult {
        value: value / count,
        grad_sr: Image::from_parts(sr.shape(), grad),
    })
}

/// Anisotropic total variation.
///
/// Mean of squared forward differences along x plus the same along y, both
/// taken per channel. An axis of length 1 has no differences and adds 0.
pub fn tv_loss(sr: &Image) -> Result<LossResult> {
    let (c, h, w) = (sr.channels(), sr.height(), sr.width());
    if h * w < 2 {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min_height: 1,
            min_width: 2,
        });
    }
    let nx = (c * h * (w - 1)) as Scalar;
    let ny = (c * (h - 1) * w) as Scalar;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut grad = vec![0.0; sr.data().len()];
    for ch in 0..c {
        let p = sr.plane(ch);
        let base = ch * h * w;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    let d = p[i + 1] - p[i];
                    sum_x += d * d;
                    let g = 2.0 * d / nx;
                    grad[base + i + 1] += g;
                    grad[base + i] -= g;
                }
                if y + 1 < h {
                    let d = p[i + w] - p[i];
                    sum_y += d * d;
                    let g = 2.0 * d / ny;
                    grad[base + i + w] += g;
                    grad[base + i] -= g;
                }
            }
        }
    }
    let mut value = 0.0;
    if w > 1 {
        value += sum_x / nx;
    }
    if h > 1 {
        value += sum_y / ny;
    }
    Ok(LossResult {
        value,
        grad_sr: Image::from_parts(sr.shape(), grad),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Image {
        Image::from_fn(3, 5, 4, |c, y, x| ((c * 7 + y * 5 + x * 3) % 10) as Scalar / 10.0)
    }

    #[test]
    fn identical_images_are_zero() {
        let a = sample();
        for r in [l1_loss(&a, &a).unwrap(), l2_loss(&a, &a).unwrap()] {
            assert_eq!(r.value, 0.0);
            assert!(r.grad_sr.data().iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn uniform_offset_closed_form() {
        let hr = sample().map(|v| v * 0.5);
        let sr = hr.map(|v| v + 0.1);
        assert!((l2_loss(&sr, &hr).unwrap().value - 0.01).abs() < 1e-15);
        assert!((l1_loss(&sr, &hr).unwrap().value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn l2_gradient_closed_form() {
        let hr = sample();
        let sr = Image::from_fn(3, 5, 4, |c, y, x| ((c + y * x) % 3) as Scalar / 3.0);
        let r = l2_loss(&sr, &hr).unwrap();
        let n = sr.data().len() as Scalar;
        for ((g, a), b) in r.grad_sr.data().iter().zip(sr.data()).zip(hr.data()) {
            assert_eq!(*g, 2.0 * (a - b) / n);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(l2_loss(&Image::zeros(1, 2, 2), &Image::zeros(1, 2, 3)).is_err());
        assert!(l1_loss(&Image::zeros(3, 2, 2), &Image::zeros(1, 2, 2)).is_err());
    }

    #[test]
    fn tv_of_constant_is_zero() {
        assert_eq!(tv_loss(&Image::filled(3, 4, 4, 0.3)).unwrap().value, 0.0);
    }

    #[test]
    fn tv_two_pixel_row() {
        let img = Image::new(1, 1, 2, alloc::vec![0.0, 1.0]).unwrap();
        let r = tv_loss(&img).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.grad_sr.data(), &[-2.0, 2.0]);
    }

    #[test]
    fn tv_rejects_single_pixel() {
        assert!(tv_loss(&Image::zeros(3, 1, 1)).is_err());
    }

    #[test]
    fn checkerboard_beats_its_blur() {
        let board = Image::from_fn(1, 8, 8, |_, y, x| ((x + y) % 2) as Scalar);
        // 3x3 box blur with clamped borders.
        let blur = Image::from_fn(1, 8, 8, |_, y, x| {
            let mut s = 0.0;
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    let yy = (y as i32 + dy).clamp(0, 7) as usize;
                    let xx = (x as i32 + dx).clamp(0, 7) as usize;
                    s += board.get(0, yy, xx);
                }
            }
            s / 9.0
        });
        let a = tv_loss(&board).unwrap().value;
        let b = tv_loss(&blur).unwrap().value;
        assert!(a > b, "{a} <= {b}");
        assert!((a - 2.0).abs() < 1e-15);
    }
}
