//! Sobel gradient maps and their exact adjoint.
//!
//! Both directions are cross-correlations with
//! `K_x = [[-1,0,1],[-2,0,2],[-1,0,1]]` and `K_y = K_xᵀ` over a one-pixel
//! replicate-padded border, so the maps keep the source size.

use alloc::vec;

use crate::error::{Error, Result};
use crate::image::{Image, Shape};
use crate::scalar::Scalar;

pub const SOBEL_X: [[Scalar; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
pub const SOBEL_Y: [[Scalar; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Horizontal and vertical gradient maps of one grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub gx: Image,
    pub gy: Image,
}

impl GradientPair {
    pub fn shape(&self) -> Shape {
        self.gx.shape()
    }
}

fn check_input(gray: &Image) -> Result<()> {
    if gray.channels() != 1 {
        return Err(Error::Channels {
            found: gray.channels(),
            expected: "1",
        });
    }
    if gray.height() < 3 || gray.width() < 3 {
        return Err(Error::TooSmall {
            height: gray.height(),
            width: gray.width(),
            min_height: 3,
            min_width: 3,
        });
    }
    Ok(())
}

/// Clamped neighbour indices `[i-1, i, i+1]`.
#[inline]
fn neighbours(i: usize, len: usize) -> [usize; 3] {
    [i.saturating_sub(1), i, (i + 1).min(len - 1)]
}

/// Sobel gradients of a single-channel image.
pub fn sobel_forward(gray: &Image) -> Result<GradientPair> {
    check_input(gray)?;
    let (h, w) = (gray.height(), gray.width());
    let src = gray.data();
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    for y in 0..h {
        let [ym, _, yp] = neighbours(y, h);
        let (up, mid, down) = (&src[ym * w..][..w], &src[y * w..][..w], &src[yp * w..][..w]);
        for x in 0..w {
            let [xm, _, xp] = neighbours(x, w);
            gx[y * w + x] =
                (up[xp] - up[xm]) + 2.0 * (mid[xp] - mid[xm]) + (down[xp] - down[xm]);
            gy[y * w + x] =
                (down[xm] - up[xm]) + 2.0 * (down[x] - up[x]) + (down[xp] - up[xp]);
        }
    }
    let shape = Shape::new(1, h, w);
    Ok(GradientPair {
        gx: Image::from_parts(shape, gx),
        gy: Image::from_parts(shape, gy),
    })
}

/// Vector-Jacobian product of [`sobel_forward`].
///
/// Contributions that the forward pass read from the padded border are
/// added back onto the edge pixels they replicated.
pub fn sobel_backward(cot: &GradientPair) -> Result<Image> {
    cot.gx.check_same_shape(&cot.gy)?;
    check_input(&cot.gx)?;
    let (h, w) = (cot.gx.height(), cot.gx.width());
    let (cx, cy) = (cot.gx.data(), cot.gy.data());
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        let rows = neighbours(y, h);
        for x in 0..w {
            let cols = neighbours(x, w);
            let (gx, gy) = (cx[y * w + x], cy[y * w + x]);
            if gx == 0.0 && gy == 0.0 {
                continue;
            }
            for (ky, &yy) in rows.iter().enumerate() {
                for (kx, &xx) in cols.iter().enumerate() {
                    out[yy * w + xx] += SOBEL_X[ky][kx] * gx + SOBEL_Y[ky][kx] * gy;
                }
            }
        }
    }
    Ok(Image::from_parts(Shape::new(1, h, w), out))
}
