//! Structural similarity on luma with an 11-tap Gaussian window (σ = 1.5).
//!
//! Local statistics are computed over "valid" window positions only, so an
//! `h × w` image yields `(h-10) × (w-10)` SSIM values whose mean is the
//! index. The loss `1 - SSIM` differentiates through the windowed means,
//! second moments and cross moment of the SR luma.

use alloc::vec;
use alloc::vec::Vec;


use super::LossResult;
use crate::error::{Error, Result};
use crate::image::{grayscale_backward, to_grayscale, Image, Shape};
use crate::math;
use crate::scalar::Scalar;

pub const WINDOW: usize = 11;
pub const SIGMA: Scalar = 1.5;
pub const K1: Scalar = 0.01;
pub const K2: Scalar = 0.03;
pub const DYNAMIC_RANGE: Scalar = 1.0;

/// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [Scalar; WINDOW] {
    let mut taps = [0.0; WINDOW];
    let center = (WINDOW / 2) as Scalar;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as Scalar - center;
        *t = math::exp(-(d * d) / (2.0 * SIGMA * SIGMA));
    }
    let sum: Scalar = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Valid-mode separable filtering of an `h × w` plane.
fn filter_valid(taps: &[Scalar; WINDOW], plane: &[Scalar], h: usize, w: usize) -> Vec<Scalar> {
    let (oh, ow) = (h + 1 - WINDOW, w + 1 - WINDOW);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        let src = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().zip(&src[x..x + WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for (k, t) in taps.iter().enumerate() {
            let src = &rows[(y + k) * ow..(y + k + 1) * ow];
            for (o, v) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *o += t * v;
            }
        }
    }
    out
}

/// Adjoint of [`filter_valid`]: scatters an `(h-10) × (w-10)` map back to
/// `h × w`.
fn filter_valid_adjoint(taps: &[Scalar; WINDOW], cot: &[Scalar], h: usize, w: usize) -> Vec<Scalar> {
    let (oh, ow) = (h + 1 - WINDOW, w + 1 - WINDOW);
    let mut rows = vec![0.0; h * ow];
    for y in 0..oh {
        let src = &cot[y * ow..(y + 1) * ow];
        for (k, t) in taps.iter().enumerate() {
            for (r, v) in rows[(y + k) * ow..(y + k + 1) * ow].iter_mut().zip(src) {
                *r += t * v;
            }
        }
    }
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        let dst = &mut out[y * w..(y + 1) * w];
        for x in 0..ow {
            let v = rows[y * ow + x];
            for (k, t) in taps.iter().enumerate() {
                dst[x + k] += t * v;
            }
        }
    }
    out
}

struct LocalStats {
    mu_x: Vec<Scalar>,
    mu_y: Vec<Scalar>,
    exx: Vec<Scalar>,
    eyy: Vec<Scalar>,
    exy: Vec<Scalar>,
}

fn luma_pair(a: &Image, b: &Image) -> Result<(Image, Image)> {
    a.check_same_shape(b)?;
    if a.height() < WINDOW || a.width() < WINDOW {
        return Err(Error::TooSmall {
            height: a.height(),
            width: a.width(),
            min_height: WINDOW,
            min_width: WINDOW,
        });
    }
    Ok((to_grayscale(a)?, to_grayscale(b)?))
}

fn local_stats(taps: &[Scalar; WINDOW], x: &[Scalar], y: &[Scalar], h: usize, w: usize) -> LocalStats {
    let xx: Vec<Scalar> = x.iter().map(|v| v * v).collect();
    let yy: Vec<Scalar> = y.iter().map(|v| v * v).collect();
    let xy: Vec<Scalar> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    LocalStats {
        mu_x: filter_valid(taps, x, h, w),
        mu_y: filter_valid(taps, y, h, w),
        exx: filter_valid(taps, &xx, h, w),
        eyy: filter_valid(taps, &yy, h, w),
        exy: filter_valid(taps, &xy, h, w),
    }
}

fn constants() -> (Scalar, Scalar) {
    let c1 = (K1 * DYNAMIC_RANGE) * (K1 * DYNAMIC_RANGE);
    let c2 = (K2 * DYNAMIC_RANGE) * (K2 * DYNAMIC_RANGE);
    (c1, c2)
}

/// Per-window SSIM values of `x` against `y`.
fn ssim_terms(s: &LocalStats) -> Vec<Scalar> {
    let (c1, c2) = constants();
    (0..s.mu_x.len())
        .map(|i| {
            let (mx, my) = (s.mu_x[i], s.mu_y[i]);
            let vx = s.exx[i] - mx * mx;
            let vy = s.eyy[i] - my * my;
            let cxy = s.exy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .collect()
}

/// Mean SSIM between the lumas of `a` and `b`.
pub fn ssim_index(a: &Image, b: &Image) -> Result<Scalar> {
    let (ga, gb) = luma_pair(a, b)?;
    let taps = gaussian_taps();
    let stats = local_stats(&taps, ga.data(), gb.data(), ga.height(), ga.width());
    let terms = ssim_terms(&stats);
    Ok(terms.iter().sum::<Scalar>() / terms.len() as Scalar)
}

/// `1 - SSIM(sr, hr)` with its exact gradient w.r.t. `sr`.
pub fn ssim_loss(sr: &Image, hr: &Image) -> Result<LossResult> {
    let (gx, gy) = luma_pair(sr, hr)?;
    let (h, w) = (gx.height(), gx.width());
    let (x, y) = (gx.data(), gy.data());
    let taps = gaussian_taps();
    let s = local_stats(&taps, x, y, h, w);
    let (c1, c2) = constants();
    let count = s.mu_x.len();
    let scale = -1.0 / count as Scalar;

    // Partials of each window's SSIM w.r.t. the raw moments of x:
    // the mean, E[x²] and E[xy].
    let mut d_mu = vec![0.0; count];
    let mut d_exx = vec![0.0; count];
    let mut d_exy = vec![0.0; count];
    let mut total = 0.0;
    for i in 0..count {
        let (mx, my) = (s.mu_x[i], s.mu_y[i]);
        let vx = s.exx[i] - mx * mx;
        let vy = s.eyy[i] - my * my;
        let cxy = s.exy[i] - mx * my;
        let n1 = 2.0 * mx * my + c1;
        let n2 = 2.0 * cxy + c2;
        let d1 = mx * mx + my * my + c1;
        let d2 = vx + vy + c2;
        let denom = d1 * d2;
        let ssim = n1 * n2 / denom;
        total += ssim;
        d_mu[i] = scale
            * (2.0 * my * (n2 - n1) / denom - 2.0 * mx * ssim / d1 + 2.0 * mx * ssim / d2);
        d_exx[i] = scale * (-ssim / d2);
        d_exy[i] = scale * (2.0 * n1 / denom);
    }

    let a = filter_valid_adjoint(&taps, &d_mu, h, w);
    let b = filter_valid_adjoint(&taps, &d_exx, h, w);
    let c = filter_valid_adjoint(&taps, &d_exy, h, w);
    let gray_grad: Vec<Scalar> = (0..h * w)
        .map(|k| a[k] + 2.0 * x[k] * b[k] + y[k] * c[k])
        .collect();
    let gray_grad = Image::from_parts(Shape::new(1, h, w), gray_grad);
    Ok(LossResult {
        value: 1.0 - total / count as Scalar,
        grad_sr: grayscale_backward(&gray_grad, sr.channels())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(c: usize, h: usize, w: usize, k: usize) -> Image {
        Image::from_fn(c, h, w, |ch, y, x| ((ch * 5 + y * k + x * 3) % 17) as Scalar / 17.0)
    }

    #[test]
    fn taps_are_normalised_and_symmetric() {
        let t = gaussian_taps();
        assert!((t.iter().sum::<Scalar>() - 1.0).abs() < 1e-15);
        for i in 0..WINDOW {
            assert_eq!(t[i], t[WINDOW - 1 - i]);
        }
    }

    #[test]
    fn adjoint_filter_identity() {
        let taps = gaussian_taps();
        let (h, w) = (14, 13);
        let p: Vec<Scalar> = (0..h * w).map(|i| ((i * 37) % 11) as Scalar / 11.0).collect();
        let q: Vec<Scalar> = (0..4 * 3).map(|i| ((i * 5) % 7) as Scalar - 3.0).collect();
        let fp = filter_valid(&taps, &p, h, w);
        let ftq = filter_valid_adjoint(&taps, &q, h, w);
        let lhs: Scalar = fp.iter().zip(&q).map(|(a, b)| a * b).sum();
        let rhs: Scalar = p.iter().zip(&ftq).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn identical_images_score_one() {
        let a = pattern(3, 16, 16, 7);
        assert!((ssim_index(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(ssim_loss(&a, &a).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn loss_in_range() {
        let a = pattern(1, 12, 15, 7);
        let b = pattern(1, 12, 15, 2).map(|v| 1.0 - v);
        let l = ssim_loss(&a, &b).unwrap().value;
        assert!((0.0..=2.0).contains(&l));
    }

    #[test]
    fn rejects_small_images() {
        let a = Image::zeros(1, 10, 20);
        assert!(ssim_index(&a, &a).is_err());
        assert!(ssim_loss(&a, &a).is_err());
    }
}
