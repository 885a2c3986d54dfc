//! RGB pixel grid produced by the renderer, with PNG import/export.

use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageFormat};
use thiserror::Error;

use crate::codebook::Color;
use crate::render::RenderConfig;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("pixel buffer of {actual} bytes does not match {height}x{width}x3")]
    BufferSize {
        height: usize,
        width: usize,
        actual: usize,
    },
    #[error("png: {0}")]
    Png(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Provenance carried alongside the pixels. Decoding never reads it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ImageMeta {
    pub source_id: Option<String>,
    pub codebook_digest: Option<String>,
    pub config: Option<RenderConfig>,
}

/// Row-major `height x width x 3` grid of 8-bit channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRep {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
    pub meta: ImageMeta,
}

impl ImageRep {
    pub fn filled(height: usize, width: usize, color: Color) -> Self {
        let pixels = color.to_array().repeat(height * width);
        Self {
            height,
            width,
            pixels,
            meta: ImageMeta::default(),
        }
    }

    pub fn white(height: usize, width: usize) -> Self {
        Self::filled(height, width, Color::WHITE)
    }

    pub fn from_raw(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if pixels.len() != height * width * 3 {
            return Err(ImageError::BufferSize {
                height,
                width,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
            meta: ImageMeta::default(),
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Color {
        let i = (y * self.width + x) * 3;
        Color::new(self.pixels[i], self.pixels[i + 1], self.pixels[i + 2])
    }

    pub fn set(&mut self, x: usize, y: usize, color: Color) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color.to_array());
    }

    /// Fills the half-open rectangle `[x0, x1) x [y0, y1)`.
    pub fn fill_rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, color: Color) {
        for y in y0..y1 {
            for x in x0..x1 {
                self.set(x, y, color);
            }
        }
    }

    /// Raw bytes of row `y`.
    pub fn row(&self, y: usize) -> &[u8] {
        let stride = self.width * 3;
        &self.pixels[y * stride..(y + 1) * stride]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.pixels.chunks_exact((self.width * 3).max(1)).take(self.height)
    }

    pub fn count(&self, color: Color) -> usize {
        let target = color.to_array();
        self.pixels.chunks_exact(3).filter(|px| **px == target).count()
    }

    pub fn is_all_white(&self) -> bool {
        self.pixels.iter().all(|&b| b == 255)
    }

    /// True when dimensions and pixels agree; metadata is ignored.
    pub fn same_pixels(&self, other: &ImageRep) -> bool {
        self.height == other.height && self.width == other.width && self.pixels == other.pixels
    }

    pub fn to_png(&self) -> Result<Vec<u8>, ImageError> {
        let mut out = Vec::new();
        PngEncoder::new(&mut out)
            .write_image(
                &self.pixels,
                self.width as u32,
                self.height as u32,
                ExtendedColorType::Rgb8,
            )
            .map_err(|e| ImageError::Png(e.to_string()))?;
        Ok(out)
    }

    /// Decodes a PNG; any alpha channel is dropped.
    pub fn from_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let img = image::ImageReader::with_format(Cursor::new(bytes), ImageFormat::Png)
            .decode()
            .map_err(|e| ImageError::Png(e.to_string()))?
            .to_rgb8();
        let (w, h) = img.dimensions();
        Self::from_raw(h as usize, w as usize, img.into_raw())
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        std::fs::write(path, self.to_png()?)?;
        Ok(())
    }

    pub fn read_png(path: impl AsRef<Path>) -> Result<Self, ImageError> {
        Self::from_png(&std::fs::read(path)?)
    }

    /// Copy of the rectangle starting at the top-left corner.
    pub fn crop_top_left(&self, height: usize, width: usize) -> Self {
        let mut pixels = Vec::with_capacity(height * width * 3);
        for y in 0..height {
            pixels.extend_from_slice(&self.row(y)[..width * 3]);
        }
        Self {
            height,
            width,
            pixels,
            meta: self.meta.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let mut img = ImageRep::white(3, 5);
        img.set(1, 2, Color::new(10, 20, 30));
        img.set(4, 0, Color::BLACK);
        let back = ImageRep::from_png(&img.to_png().unwrap()).unwrap();
        assert!(back.same_pixels(&img));
    }

    #[test]
    fn raw_size_checked() {
        assert!(ImageRep::from_raw(2, 2, vec![0; 11]).is_err());
        assert!(ImageRep::from_raw(2, 2, vec![0; 12]).is_ok());
    }

    #[test]
    fn counts_and_rows() {
        let mut img = ImageRep::white(2, 2);
        img.fill_rect(0, 0, 2, 1, Color::new(1, 2, 3));
        assert_eq!(img.count(Color::new(1, 2, 3)), 2);
        assert_eq!(img.row(0), &[1, 2, 3, 1, 2, 3]);
        assert_eq!(img.rows().count(), 2);
        assert!(!img.is_all_white());
    }
}
