//! Procedural hard-edged RGB images for desk-scale training.
//!
//! Every image is a flat background with a handful of filled shapes drawn
//! without anti-aliasing. Colours are quantised to multiples of 1/255 so an
//! 8-bit PNG round trip is lossless. Image `i` depends only on the seed and
//! `i`, so subsets can be regenerated independently.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gradients::sobel_forward;
use crate::image::{to_grayscale, Image, LUMA_WEIGHTS};
use crate::math;
use crate::scalar::Scalar;

/// Shape families the generator can draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Rectangle,
    Circle,
    Line,
    /// Polyline of short axis-aligned strokes, loosely glyph-like.
    Stroke,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [
        ShapeKind::Rectangle,
        ShapeKind::Circle,
        ShapeKind::Line,
        ShapeKind::Stroke,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Circle => "circle",
            ShapeKind::Line => "line",
            ShapeKind::Stroke => "stroke",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSetSpec {
    pub count: usize,
    pub height: usize,
    pub width: usize,
    pub shapes: Vec<ShapeKind>,
    /// Inclusive range of shapes per image.
    pub shapes_per_image: (usize, usize),
    /// Minimum luma difference between a shape and the background.
    pub min_contrast: Scalar,
    pub seed: u64,
}

impl Default for SyntheticSetSpec {
    fn default() -> Self {
        SyntheticSetSpec {
            count: 200,
            height: 96,
            width: 96,
            shapes: ShapeKind::ALL.to_vec(),
            shapes_per_image: (4, 10),
            min_contrast: 0.25,
            seed: 0,
        }
    }
}

impl SyntheticSetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height < 8 || self.width < 8 {
            return Err(Error::TooSmall {
                height: self.height,
                width: self.width,
                min_height: 8,
                min_width: 8,
            });
        }
        if self.shapes.is_empty() {
            return Err(Error::InvalidArgument("shape vocabulary is empty".into()));
        }
        let (lo, hi) = self.shapes_per_image;
        if lo > hi {
            return Err(Error::InvalidArgument(alloc::format!(
                "shapes per image range {lo}..={hi} is empty"
            )));
        }
        if !(0.0..=1.0).contains(&self.min_contrast) {
            return Err(Error::InvalidArgument("contrast must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

type Rgb = [Scalar; 3];

fn luma(c: &Rgb) -> Scalar {
    c.iter().zip(LUMA_WEIGHTS).map(|(v, w)| v * w).sum()
}

fn random_color(rng: &mut ChaCha8Rng) -> Rgb {
    core::array::from_fn(|_| rng.random_range(0..=255u32) as Scalar / 255.0)
}

fn contrasting_color(rng: &mut ChaCha8Rng, background: &Rgb, min_contrast: Scalar) -> Rgb {
    let bg = luma(background);
    for _ in 0..32 {
        let c = random_color(rng);
        if (luma(&c) - bg).abs() >= min_contrast {
            return c;
        }
    }
    if bg > 0.5 {
        [0.0; 3]
    } else {
        [1.0; 3]
    }
}

struct Canvas {
    img: Image,
}

impl Canvas {
    fn set(&mut self, y: isize, x: isize, c: &Rgb) {
        let (h, w) = (self.img.height() as isize, self.img.width() as isize);
        if y < 0 || x < 0 || y >= h || x >= w {
            return;
        }
        for (ch, &v) in c.iter().enumerate() {
            self.img.set(ch, y as usize, x as usize, v);
        }
    }

    fn rect(&mut self, y0: isize, x0: isize, h: isize, w: isize, c: &Rgb) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                self.set(y, x, c);
            }
        }
    }

    fn circle(&mut self, cy: Scalar, cx: Scalar, r: Scalar, c: &Rgb) {
        let (y0, y1) = (math::floor(cy - r) as isize, math::ceil(cy + r) as isize);
        let (x0, x1) = (math::floor(cx - r) as isize, math::ceil(cx + r) as isize);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dy = y as Scalar + 0.5 - cy;
                let dx = x as Scalar + 0.5 - cx;
                if dy * dy + dx * dx <= r * r {
                    self.set(y, x, c);
                }
            }
        }
    }

    /// Pixels whose centres lie within `half` of segment `a`–`b`.
    fn segment(&mut self, a: (Scalar, Scalar), b: (Scalar, Scalar), half: Scalar, c: &Rgb) {
        let (y0, y1) = (a.0.min(b.0) - half, a.0.max(b.0) + half);
        let (x0, x1) = (a.1.min(b.1) - half, a.1.max(b.1) + half);
        let (dy, dx) = (b.0 - a.0, b.1 - a.1);
        let len2 = dy * dy + dx * dx;
        for y in math::floor(y0) as isize..=math::ceil(y1) as isize {
            for x in math::floor(x0) as isize..=math::ceil(x1) as isize {
                let (py, px) = (y as Scalar + 0.5 - a.0, x as Scalar + 0.5 - a.1);
                let t = if len2 > 0.0 {
                    ((py * dy + px * dx) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let (ey, ex) = (py - t * dy, px - t * dx);
                if ey * ey + ex * ex <= half * half {
                    self.set(y, x, c);
                }
            }
        }
    }
}

fn draw_shape(canvas: &mut Canvas, rng: &mut ChaCha8Rng, kind: ShapeKind, c: &Rgb) {
    let (h, w) = (canvas.img.height(), canvas.img.width());
    let (hf, wf) = (h as Scalar, w as Scalar);
    match kind {
        ShapeKind::Rectangle => {
            let rh = rng.random_range(h as u32 / 8..=h as u32 / 2).max(3) as isize;
            let rw = rng.random_range(w as u32 / 8..=w as u32 / 2).max(3) as isize;
            let y0 = rng.random_range(-(rh as i64 / 2)..h as i64 - rh as i64 / 2) as isize;
            let x0 = rng.random_range(-(rw as i64 / 2)..w as i64 - rw as i64 / 2) as isize;
            canvas.rect(y0, x0, rh, rw, c);
        }
        ShapeKind::Circle => {
            let r = rng.random_range(hf.min(wf) / 16.0..hf.min(wf) / 4.0);
            let cy = rng.random_range(0.0..hf);
            let cx = rng.random_range(0.0..wf);
            canvas.circle(cy, cx, r, c);
        }
        ShapeKind::Line => {
            let a = (rng.random_range(0.0..hf), rng.random_range(0.0..wf));
            let b = (rng.random_range(0.0..hf), rng.random_range(0.0..wf));
            let half = rng.random_range(1..=3u32) as Scalar / 2.0 + 0.25;
            canvas.segment(a, b, half, c);
        }
        ShapeKind::Stroke => {
            let mut p = (rng.random_range(0.0..hf), rng.random_range(0.0..wf));
            let half = rng.random_range(1..=2u32) as Scalar / 2.0 + 0.25;
            let reach = hf.min(wf) / 6.0;
            for _ in 0..rng.random_range(2..=4u32) {
                let len = rng.random_range(reach / 3.0..reach);
                let q = if rng.random_bool(0.5) {
                    (p.0, (p.1 + if rng.random_bool(0.5) { len } else { -len }).clamp(0.0, wf))
                } else {
                    ((p.0 + if rng.random_bool(0.5) { len } else { -len }).clamp(0.0, hf), p.1)
                };
                canvas.segment(p, q, half, c);
                p = q;
            }
        }
    }
}

/// Largest `|gx|` of the image's luma Sobel map.
pub fn max_abs_gx(img: &Image) -> Result<Scalar> {
    let g = sobel_forward(&to_grayscale(img)?)?;
    Ok(g.gx.data().iter().fold(0.0, |m: Scalar, v| m.max(v.abs())))
}

/// Generates image `index` of the set described by `spec`.
pub fn generate_image(spec: &SyntheticSetSpec, index: usize) -> Result<Image> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let bg = random_color(&mut rng);
    let mut canvas = Canvas {
        img: Image::from_fn(3, spec.height, spec.width, |c, _, _| bg[c]),
    };
    let (lo, hi) = spec.shapes_per_image;
    for _ in 0..rng.random_range(lo as u32..=hi as u32) {
        let kind = spec.shapes[rng.random_range(0..spec.shapes.len() as u32) as usize];
        let color = contrasting_color(&mut rng, &bg, spec.min_contrast);
        draw_shape(&mut canvas, &mut rng, kind, &color);
    }
    // Every image must contain at least one strong vertical edge.
    if max_abs_gx(&canvas.img)? < 1.0 {
        let (h, w) = (spec.height as isize, spec.width as isize);
        let (rh, rw) = ((h / 4).max(3), (w / 4).max(2) & !1);
        let y0 = rng.random_range(0..=(h - rh) as i64) as isize;
        let x0 = rng.random_range(0..=(w - rw) as i64) as isize;
        canvas.rect(y0, x0, rh, rw / 2, &[0.0; 3]);
        canvas.rect(y0, x0 + rw / 2, rh, rw / 2, &[1.0; 3]);
    }
    Ok(canvas.img)
}

/// Generates the whole set in index order.
pub fn generate_set(spec: &SyntheticSetSpec) -> Result<Vec<Image>> {
    spec.validate()?;
    (0..spec.count).map(|i| generate_image(spec, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SyntheticSetSpec {
        SyntheticSetSpec {
            count: 12,
            height: 32,
            width: 40,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_per_index() {
        let spec = small_spec();
        let a = generate_set(&spec).unwrap();
        let b = generate_set(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(generate_image(&spec, 7).unwrap(), a[7]);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn every_image_has_a_hard_edge() {
        for img in generate_set(&small_spec()).unwrap() {
            assert!(max_abs_gx(&img).unwrap() >= 1.0);
        }
    }

    #[test]
    fn samples_are_quantised() {
        let img = generate_image(&small_spec(), 0).unwrap();
        for &v in img.data() {
            let q = (v * 255.0).round() / 255.0;
            assert_eq!(q, v);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn empty_set_is_fine() {
        let spec = SyntheticSetSpec {
            count: 0,
            ..small_spec()
        };
        assert!(generate_set(&spec).unwrap().is_empty());
    }

    #[test]
    fn shape_names_round_trip() {
        for k in ShapeKind::ALL {
            assert_eq!(ShapeKind::from_name(k.name()), Some(k));
        }
    }
}
