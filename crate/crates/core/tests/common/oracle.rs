//! Reference implementations used only by tests.
//!
//! Nothing here calls into the library's loss or gradient code paths: the
//! GV reference indexes pixels directly, and gradients are checked with
//! central differences.

#![allow(dead_code)]

use gradvar_core::{Image, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_EPS: Scalar = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Image {
    Image::from_fn(c, h, w, |_, _, _| rng.random_range(0.0..1.0))
}

/// `base` plus per-sample offsets of magnitude in `[lo, hi)` with random sign.
pub fn offset_image(rng: &mut ChaCha8Rng, base: &Image, lo: Scalar, hi: Scalar) -> Image {
    let data = base
        .data()
        .iter()
        .map(|&v| {
            let m = rng.random_range(lo..hi);
            if rng.random_bool(0.5) {
                v + m
            } else {
                v - m
            }
        })
        .collect();
    Image::new(base.channels(), base.height(), base.width(), data).unwrap()
}

/// Central-difference gradient of `f` at `x`.
pub fn numeric_gradient(f: impl Fn(&Image) -> Scalar, x: &Image, eps: Scalar) -> Vec<Scalar> {
    let mut probe = x.clone();
    (0..x.data().len())
        .map(|i| {
            let orig = probe.data()[i];
            probe.data_mut()[i] = orig + eps;
            let up = f(&probe);
            probe.data_mut()[i] = orig - eps;
            let down = f(&probe);
            probe.data_mut()[i] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Central-difference gradient over a flat parameter vector.
pub fn numeric_gradient_vec(
    f: impl Fn(&[Scalar]) -> Scalar,
    x: &[Scalar],
    eps: Scalar,
) -> Vec<Scalar> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + eps;
            let up = f(&probe);
            probe[i] = orig - eps;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// `max |a - n| / max |n|`: worst entrywise error relative to the gradient's
/// scale.
pub fn max_rel_error(analytic: &[Scalar], numeric: &[Scalar]) -> Scalar {
    assert_eq!(analytic.len(), numeric.len());
    let scale = numeric.iter().fold(0.0 as Scalar, |m, v| m.max(v.abs()));
    let err = analytic
        .iter()
        .zip(numeric)
        .fold(0.0 as Scalar, |m, (a, n)| m.max((a - n).abs()));
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}

/// Luma with the BT.601 weights, or a copy for one channel.
pub fn naive_luma(img: &Image) -> Vec<Vec<Scalar>> {
    let (h, w) = (img.height(), img.width());
    let mut out = vec![vec![0.0; w]; h];
    for (y, row) in out.iter_mut().enumerate() {
        for (x, v) in row.iter_mut().enumerate() {
            *v = if img.channels() == 1 {
                img.get(0, y, x)
            } else {
                0.299 * img.get(0, y, x) + 0.587 * img.get(1, y, x) + 0.114 * img.get(2, y, x)
            };
        }
    }
    out
}

/// Sobel by explicit 3×3 loops with clamped reads.
pub fn naive_sobel(gray: &[Vec<Scalar>]) -> (Vec<Vec<Scalar>>, Vec<Vec<Scalar>>) {
    const KX: [[Scalar; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let (h, w) = (gray.len() as i64, gray[0].len() as i64);
    let at = |y: i64, x: i64| gray[y.clamp(0, h - 1) as usize][x.clamp(0, w - 1) as usize];
    let mut gx = vec![vec![0.0; w as usize]; h as usize];
    let mut gy = gx.clone();
    for y in 0..h {
        for x in 0..w {
            let (mut sx, mut sy) = (0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let v = at(y + i as i64 - 1, x + j as i64 - 1);
                    sx += KX[i][j] * v;
                    sy += KX[j][i] * v;
                }
            }
            gx[y as usize][x as usize] = sx;
            gy[y as usize][x as usize] = sy;
        }
    }
    (gx, gy)
}

/// Textbook two-pass unbiased variance.
pub fn two_pass_variance(values: &[Scalar]) -> Scalar {
    let n = values.len() as Scalar;
    let mean = values.iter().sum::<Scalar>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<Scalar>() / (n - 1.0)
}

/// Per-patch variances read straight out of the map, patches in row-major
/// order.
pub fn naive_patch_variances(map: &[Vec<Scalar>], n: usize) -> Vec<Scalar> {
    let (h, w) = (map.len(), map[0].len());
    let mut out = Vec::new();
    for py in 0..h / n {
        for px in 0..w / n {
            let mut vals = Vec::with_capacity(n * n);
            for dy in 0..n {
                for dx in 0..n {
                    vals.push(map[py * n + dy][px * n + dx]);
                }
            }
            out.push(two_pass_variance(&vals));
        }
    }
    out
}

/// GV loss with mean-squared reduction, computed without unfolding.
pub fn naive_gv_loss(sr: &Image, hr: &Image, n: usize) -> Scalar {
    let (sx, sy) = naive_sobel(&naive_luma(sr));
    let (hx, hy) = naive_sobel(&naive_luma(hr));
    let mse = |a: &[Scalar], b: &[Scalar]| {
        a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<Scalar>() / a.len() as Scalar
    };
    mse(&naive_patch_variances(&sx, n), &naive_patch_variances(&hx, n))
        + mse(&naive_patch_variances(&sy, n), &naive_patch_variances(&hy, n))
}

pub fn inner(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
