//! PNG, CSV and small file helpers.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use gradvar_core::{Image, Scalar};
use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};

/// Loads an 8- or 16-bit grayscale or RGB PNG into `[0, 1]` samples.
/// Alpha channels are dropped; palettes are expanded.
pub fn load_png(path: &Path) -> Result<Image> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, e.to_string()))?;
    let mut buf = vec![0; reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "image too large"))?];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let (stored, keep) = match info.color_type {
        ColorType::Grayscale => (1, 1),
        ColorType::GrayscaleAlpha => (2, 1),
        ColorType::Rgb => (3, 3),
        ColorType::Rgba => (4, 3),
        ColorType::Indexed => {
            return Err(Error::format(path, "unsupported color type: indexed"));
        }
    };
    let samples: Vec<Scalar> = match info.bit_depth {
        BitDepth::Eight => buf[..info.buffer_size()]
            .iter()
            .map(|&b| b as Scalar / 255.0)
            .collect(),
        BitDepth::Sixteen => buf[..info.buffer_size()]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as Scalar / 65535.0)
            .collect(),
        other => {
            return Err(Error::format(
                path,
                format!("unsupported bit depth {other:?}"),
            ))
        }
    };
    let mut data = vec![0.0; keep * h * w];
    for (p, px) in samples.chunks_exact(stored).enumerate() {
        for c in 0..keep {
            data[c * h * w + p] = px[c];
        }
    }
    Ok(Image::new(keep, h, w, data)?)
}

/// Clamps to `[0, 1]` and quantizes with round-half-up.
pub fn quantize(v: Scalar) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Writes an 8-bit PNG (grayscale for 1 channel, RGB for 3).
pub fn save_png(img: &Image, path: &Path) -> Result<()> {
    let color = match img.channels() {
        1 => ColorType::Grayscale,
        3 => ColorType::Rgb,
        c => {
            return Err(Error::format(
                path,
                format!("cannot write {c}-channel image as PNG"),
            ))
        }
    };
    let (c, h, w) = (img.channels(), img.height(), img.width());
    let mut bytes = Vec::with_capacity(c * h * w);
    for p in 0..h * w {
        for ch in 0..c {
            bytes.push(quantize(img.data()[ch * h * w + p]));
        }
    }
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    encoder.set_color(color);
    encoder.set_depth(BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::format(path, e.to_string()))?;
    writer
        .write_image_data(&bytes)
        .map_err(|e| Error::format(path, e.to_string()))?;
    writer
        .finish()
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Fixed affine map `[-4, 4] → [0, 1]` for viewing gradient-like maps.
pub fn gradient_to_display(map: &Image) -> Image {
    map.map(|v| (v + 4.0) / 8.0)
}

/// Nearest-neighbour upsampling by an integer factor, for viewing
/// per-patch maps at image size.
pub fn upsample_nearest(map: &Image, factor: usize) -> Image {
    Image::from_fn(
        map.channels(),
        map.height() * factor,
        map.width() * factor,
        |c, y, x| map.get(c, y / factor, x / factor),
    )
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Writes `rows` under `header` as CSV.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    ensure_parent(path)?;
    let to_err = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Shortest round-trippable decimal form; bit-stable across runs.
pub fn fmt_scalar(v: Scalar) -> String {
    if v == Scalar::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Sorted PNG files directly under `dir`.
pub fn list_pngs(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
