use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use gradvar::core::{Image, Scalar};
use gradvar::io::{load_png, save_png};
use png::{BitDepth, ColorType};

fn write_raw(path: &Path, w: u32, h: u32, color: ColorType, depth: BitDepth, data: &[u8]) {
    let mut enc = png::Encoder::new(BufWriter::new(File::create(path).unwrap()), w, h);
    enc.set_color(color);
    enc.set_depth(depth);
    let mut writer = enc.write_header().unwrap();
    writer.write_image_data(data).unwrap();
}

#[test]
fn eight_bit_gray_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.png");
    write_raw(&p, 3, 1, ColorType::Grayscale, BitDepth::Eight, &[0, 128, 255]);
    let img = load_png(&p).unwrap();
    assert_eq!(img.channels(), 1);
    assert_eq!(img.data(), &[0.0, 128.0 / 255.0, 1.0]);
}

#[test]
fn sixteen_bit_rgba_drops_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.png");
    let px: [u16; 8] = [65535, 0, 32768, 7, 0, 65535, 0, 65535];
    let bytes: Vec<u8> = px.iter().flat_map(|v| v.to_be_bytes()).collect();
    write_raw(&p, 2, 1, ColorType::Rgba, BitDepth::Sixteen, &bytes);
    let img = load_png(&p).unwrap();
    assert_eq!((img.channels(), img.height(), img.width()), (3, 1, 2));
    assert_eq!(img.get(0, 0, 0), 1.0);
    assert_eq!(img.get(2, 0, 0), 32768.0 / 65535.0);
    assert_eq!(img.get(1, 0, 1), 1.0);
}

#[test]
fn gray_alpha_becomes_gray() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ga.png");
    write_raw(&p, 2, 1, ColorType::GrayscaleAlpha, BitDepth::Eight, &[51, 0, 204, 255]);
    let img = load_png(&p).unwrap();
    assert_eq!(img.data(), &[0.2, 0.8]);
}

#[test]
fn save_quantizes_and_clamps() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("q.png");
    let img = Image::new(1, 1, 4, vec![1.0, -0.2, 0.5, 1.3]).unwrap();
    save_png(&img, &p).unwrap();
    let back = load_png(&p).unwrap();
    let bytes: Vec<u8> = back.data().iter().map(|v| (v * 255.0).round() as u8).collect();
    assert_eq!(bytes, [255, 0, 128, 255]);
}

#[test]
fn round_trip_within_half_step() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("rt.png");
    let img = Image::from_fn(3, 9, 7, |c, y, x| ((c * 131 + y * 17 + x * 29) % 1000) as Scalar / 999.0);
    save_png(&img, &p).unwrap();
    let back = load_png(&p).unwrap();
    for (a, b) in img.data().iter().zip(back.data()) {
        assert!((a - b).abs() <= 1.0 / 510.0 + 1e-12);
    }
}

#[test]
fn unreadable_inputs_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(load_png(&dir.path().join("missing.png")).unwrap_err().exit_code(), 1);
    let junk = dir.path().join("junk.png");
    std::fs::write(&junk, b"not a png").unwrap();
    assert_eq!(load_png(&junk).unwrap_err().exit_code(), 1);
    let two = Image::zeros(2, 2, 2);
    assert!(save_png(&two, &dir.path().join("x.png")).is_err());
}
