use alloc::vec;

use crate::error::{Error, Result};
use crate::image::{Image, Shape};

/// Rearranges `c·s² × h × w` features into a `c × s·h × s·w` image.
///
/// Output sample `(ch, s·y + dy, s·x + dx)` comes from input channel
/// `ch·s² + dy·s + dx` at `(y, x)`.
pub fn pixel_shuffle(t: &Image, s: usize) -> Result<Image> {
    if s == 0 || t.channels() % (s * s) != 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "{} channels are not divisible by {}²",
            t.channels(),
            s
        )));
    }
    let (c, h, w) = (t.channels() / (s * s), t.height(), t.width());
    let (oh, ow) = (h * s, w * s);
    let mut out = vec![0.0; t.data().len()];
    for ch in 0..c {
        for dy in 0..s {
            for dx in 0..s {
                let src = t.plane(ch * s * s + dy * s + dx);
                for y in 0..h {
                    let row = &src[y * w..(y + 1) * w];
                    let base = ch * oh * ow + (s * y + dy) * ow + dx;
                    for (x, &v) in row.iter().enumerate() {
                        out[base + s * x] = v;
                    }
                }
            }
        }
    }
    Ok(Image::from_parts(Shape::new(c, oh, ow), out))
}

/// Inverse of [`pixel_shuffle`], also its adjoint.
pub fn pixel_unshuffle(img: &Image, s: usize) -> Result<Image> {
    if s == 0 || img.height() % s != 0 || img.width() % s != 0 {
        return Err(Error::NotDivisible {
            height: img.height(),
            width: img.width(),
            divisor: s,
        });
    }
    let (c, oh, ow) = (img.channels(), img.height(), img.width());
    let (h, w) = (oh / s, ow / s);
    let mut out = vec![0.0; img.data().len()];
    for ch in 0..c {
        let src = img.plane(ch);
        for dy in 0..s {
            for dx in 0..s {
                let dst = &mut out[(ch * s * s + dy * s + dx) * h * w..][..h * w];
                for y in 0..h {
                    for x in 0..w {
                        dst[y * w + x] = src[(s * y + dy) * ow + s * x + dx];
                    }
                }
            }
        }
    }
    Ok(Image::from_parts(Shape::new(c * s * s, h, w), out))
}
