//! Grayscale image container, PNG loading and gray-level quantization.

use std::path::Path;

use image::{ColorType, DynamicImage, ImageReader};

use crate::error::{arg, Error, Result};

/// An 8-bit grayscale image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width < 2 || height < 2 {
            return arg(format!(
                "image must be at least 2x2, got {width}x{height}"
            ));
        }
        if pixels.len() != width * height {
            return arg(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn constant(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Writes the image as an 8-bit grayscale PNG.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .expect("dimensions checked at construction");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::Format {
                    path: path.to_path_buf(),
                    reason: other.to_string(),
                },
            })
    }
}

/// Rec.601 luma, rounded half-up.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    (y + 0.5).floor().min(255.0) as u8
}

/// Loads an 8-bit PNG (gray, gray+alpha, RGB or RGBA) as a grayscale image.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(image::ImageFormat::Png) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: "not a PNG file".into(),
        });
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    from_dynamic(&decoded).map_err(|reason| Error::Format {
        path: path.to_path_buf(),
        reason,
    })
}

fn from_dynamic(img: &DynamicImage) -> std::result::Result<GrayImage, String> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<u8> = match img.color() {
        ColorType::L8 => img.as_luma8().unwrap().as_raw().clone(),
        ColorType::La8 => img
            .as_luma_alpha8()
            .unwrap()
            .pixels()
            .map(|p| p.0[0])
            .collect(),
        ColorType::Rgb8 => img
            .as_rgb8()
            .unwrap()
            .pixels()
            .map(|p| luma(p.0[0], p.0[1], p.0[2]))
            .collect(),
        ColorType::Rgba8 => img
            .as_rgba8()
            .unwrap()
            .pixels()
            .map(|p| luma(p.0[0], p.0[1], p.0[2]))
            .collect(),
        other => return Err(format!("unsupported color type {other:?}; expected 8-bit channels")),
    };
    GrayImage::new(w, h, pixels).map_err(|e| e.to_string())
}

/// Gray levels reduced to `levels` uniform-width buckets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    values: Vec<u16>,
}

impl QuantizedImage {
    /// Builds a quantized grid directly from level indices. Unlike
    /// [`GrayImage`], single-row or single-column grids are allowed.
    pub fn from_levels(width: usize, height: usize, levels: usize, values: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return arg("quantized image must be non-empty");
        }
        if levels < 2 {
            return arg(format!("levels must be >= 2, got {levels}"));
        }
        if values.len() != width * height {
            return arg(format!(
                "value count {} does not match {width}x{height}",
                values.len()
            ));
        }
        if let Some(v) = values.iter().find(|&&v| usize::from(v) >= levels) {
            return arg(format!("value {v} out of range for {levels} levels"));
        }
        Ok(Self {
            width,
            height,
            levels,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> usize {
        usize::from(self.values[y * self.width + x])
    }
}

/// Maps a single intensity to its bucket: `floor(v * levels / 256)`.
#[inline]
pub fn quantize_value(v: u8, levels: usize) -> u16 {
    (usize::from(v) * levels / 256) as u16
}

pub fn quantize(img: &GrayImage, levels: usize) -> Result<QuantizedImage> {
    if !(2..=256).contains(&levels) {
        return arg(format!("levels must be in [2, 256], got {levels}"));
    }
    let values = img.pixels.iter().map(|&v| quantize_value(v, levels)).collect();
    Ok(QuantizedImage {
        width: img.width,
        height: img.height,
        levels,
        values,
    })
}
