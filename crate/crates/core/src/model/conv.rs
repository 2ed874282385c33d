//! Same-size 2-D convolution with replicate padding.
//!
//! Weights are laid out `out_ch × in_ch × k × k`. The input is padded once
//! by `(k-1)/2` replicated pixels and kept on the tape, so the backward pass
//! reuses it for the weight gradient and folds the padded-input gradient
//! back onto the edge pixels.

use alloc::vec;

use crate::image::{Image, Shape};
use crate::scalar::Scalar;

/// Pads every channel by `p` pixels on each side, replicating edge samples.
pub fn pad_replicate(input: &Image, p: usize) -> Image {
    if p == 0 {
        return input.clone();
    }
    let (c, h, w) = (input.channels(), input.height(), input.width());
    let (ph, pw) = (h + 2 * p, w + 2 * p);
    let mut out = vec![0.0; c * ph * pw];
    for ch in 0..c {
        let src = input.plane(ch);
        let dst = &mut out[ch * ph * pw..(ch + 1) * ph * pw];
        for py in 0..ph {
            let sy = py.saturating_sub(p).min(h - 1);
            let row = &src[sy * w..(sy + 1) * w];
            let drow = &mut dst[py * pw..(py + 1) * pw];
            drow[..p].fill(row[0]);
            drow[p..p + w].copy_from_slice(row);
            drow[p + w..].fill(row[w - 1]);
        }
    }
    Image::from_parts(Shape::new(c, ph, pw), out)
}

/// Adjoint of [`pad_replicate`]: sums padded-border gradients onto the edge
/// pixels they copied.
pub fn unpad_replicate_adjoint(grad_padded: &Image, p: usize) -> Image {
    if p == 0 {
        return grad_padded.clone();
    }
    let (c, ph, pw) = (grad_padded.channels(), grad_padded.height(), grad_padded.width());
    let (h, w) = (ph - 2 * p, pw - 2 * p);
    let mut out = vec![0.0; c * h * w];
    for ch in 0..c {
        let src = grad_padded.plane(ch);
        let dst = &mut out[ch * h * w..(ch + 1) * h * w];
        for py in 0..ph {
            let sy = py.saturating_sub(p).min(h - 1);
            let srow = &src[py * pw..(py + 1) * pw];
            let drow = &mut dst[sy * w..(sy + 1) * w];
            for (d, s) in drow.iter_mut().zip(&srow[p..p + w]) {
                *d += s;
            }
            drow[0] += srow[..p].iter().sum::<Scalar>();
            drow[w - 1] += srow[p + w..].iter().sum::<Scalar>();
        }
    }
    Image::from_parts(Shape::new(c, h, w), out)
}

/// Convolves an already padded input; output keeps the unpadded size.
pub fn conv_forward(
    padded: &Image,
    out_ch: usize,
    k: usize,
    weights: &[Scalar],
    bias: &[Scalar],
) -> Image {
    let in_ch = padded.channels();
    let (pw, h, w) = (padded.width(), padded.height() + 1 - k, padded.width() + 1 - k);
    debug_assert_eq!(weights.len(), out_ch * in_ch * k * k);
    let mut out = vec![0.0; out_ch * h * w];
    for oc in 0..out_ch {
        let dst = &mut out[oc * h * w..(oc + 1) * h * w];
        dst.fill(bias[oc]);
        for ic in 0..in_ch {
            let src = padded.plane(ic);
            let wk = &weights[(oc * in_ch + ic) * k * k..][..k * k];
            for ky in 0..k {
                for kx in 0..k {
                    let wv = wk[ky * k + kx];
                    for y in 0..h {
                        let s = &src[(y + ky) * pw + kx..][..w];
                        let d = &mut dst[y * w..(y + 1) * w];
                        for (d, s) in d.iter_mut().zip(s) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
    Image::from_parts(Shape::new(out_ch, h, w), out)
}

/// Backward pass of [`conv_forward`].
///
/// Accumulates into `grad_w` and `grad_b`; returns the gradient w.r.t. the
/// padded input when `want_input` is set.
pub fn conv_backward(
    padded: &Image,
    grad_out: &Image,
    k: usize,
    weights: &[Scalar],
    grad_w: &mut [Scalar],
    grad_b: &mut [Scalar],
    want_input: bool,
) -> Option<Image> {
    let in_ch = padded.channels();
    let out_ch = grad_out.channels();
    let (pw, h, w) = (padded.width(), grad_out.height(), grad_out.width());
    let mut grad_in = if want_input {
        vec![0.0; padded.data().len()]
    } else {
        vec![]
    };
    let plane_len = padded.height() * pw;
    for oc in 0..out_ch {
        let g = grad_out.plane(oc);
        grad_b[oc] += g.iter().sum::<Scalar>();
        for ic in 0..in_ch {
            let src = padded.plane(ic);
            let base = (oc * in_ch + ic) * k * k;
            for ky in 0..k {
                for kx in 0..k {
                    let mut acc = 0.0;
                    for y in 0..h {
                        let s = &src[(y + ky) * pw + kx..][..w];
                        let gr = &g[y * w..(y + 1) * w];
                        acc += gr.iter().zip(s).map(|(a, b)| a * b).sum::<Scalar>();
                    }
                    grad_w[base + ky * k + kx] += acc;
                    if want_input {
                        let wv = weights[base + ky * k + kx];
                        let gin = &mut grad_in[ic * plane_len..(ic + 1) * plane_len];
                        for y in 0..h {
                            let d = &mut gin[(y + ky) * pw + kx..][..w];
                            let gr = &g[y * w..(y + 1) * w];
                            for (d, gv) in d.iter_mut().zip(gr) {
                                *d += wv * gv;
                            }
                        }
                    }
                }
            }
        }
    }
    want_input.then(|| Image::from_parts(padded.shape(), grad_in))
}
