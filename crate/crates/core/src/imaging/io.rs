//! Raster file I/O. Decoding (PNG, binary PGM/PPM) goes through the `image`
//! crate; PGM output is written directly.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};
use crate::imaging::filters::{to_grayscale, Rgb8};
use crate::imaging::raster::{BinaryImage, GrayImage};
use crate::scalar::Scalar;

fn unreadable(path: &Path, reason: impl ToString) -> Error {
    Error::UnreadableFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Reads any supported raster as normalised grayscale. Colour inputs go
/// through [`to_grayscale`]; single-channel inputs are scaled by 1/255.
pub fn read_gray<T: Scalar>(path: &Path) -> Result<GrayImage<T>> {
    let decoded = ImageReader::open(path)
        .map_err(|e| unreadable(path, e))?
        .with_guessed_format()
        .map_err(|e| unreadable(path, e))?
        .decode()
        .map_err(|e| unreadable(path, e))?;
    decoded_to_gray(decoded).map_err(|e| unreadable(path, e))
}

fn decoded_to_gray<T: Scalar>(decoded: DynamicImage) -> Result<GrayImage<T>> {
    match decoded {
        DynamicImage::ImageLuma8(luma) => {
            let (w, h) = (luma.width() as usize, luma.height() as usize);
            let scale = T::from_count(255);
            GrayImage::new(
                w,
                h,
                luma.into_raw()
                    .into_iter()
                    .map(|v| T::from_count(v as usize) / scale)
                    .collect(),
            )
        }
        other => {
            let rgb = other.into_rgb8();
            to_grayscale(&Rgb8 {
                width: rgb.width() as usize,
                height: rgb.height() as usize,
                data: rgb.into_raw(),
            })
        }
    }
}

/// Reads a raster and binarises it: intensities above `cutoff` become 1.
pub fn read_binary(path: &Path, cutoff: f64) -> Result<BinaryImage> {
    let gray = read_gray::<f64>(path)?;
    Ok(crate::imaging::filters::threshold(&gray, cutoff))
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn pgm_bytes(width: usize, height: usize, pixels: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels);
    out
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let write = || -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut f = fs::File::create(path)?;
        f.write_all(bytes)?;
        f.flush()
    };
    write().map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Binary P5 PGM; values are clamped to `[0, 1]` and scaled to 0..=255.
pub fn write_pgm<T: Scalar>(path: &Path, img: &GrayImage<T>) -> Result<()> {
    let bytes = pgm_bytes(img.width(), img.height(), img.data().iter().map(|v| quantize(v.to_f64())));
    write_file(path, &bytes)
}

/// Binary P5 PGM with set pixels as 255.
pub fn write_binary_pgm(path: &Path, img: &BinaryImage) -> Result<()> {
    let bytes = pgm_bytes(img.width(), img.height(), img.data().iter().map(|&b| b * 255));
    write_file(path, &bytes)
}

/// 8-bit grayscale PNG.
pub fn write_png<T: Scalar>(path: &Path, img: &GrayImage<T>) -> Result<()> {
    let raw: Vec<u8> = img.data().iter().map(|v| quantize(v.to_f64())).collect();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, raw)
        .expect("buffer sized from image");
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    buf.save(path).map_err(|e| Error::Write {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })
}
