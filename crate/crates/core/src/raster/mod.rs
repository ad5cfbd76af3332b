//! Page images and the pixel-level scan-simulation transforms.

mod ops;
mod seed;

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};
use thiserror::Error;

use crate::geometry::GeometryError;

pub use ops::{
    additive_gaussian_noise, gaussian_blur, gaussian_kernel, jittered_quad, linear_contrast,
    perspective_warp, rotate_affine, salt_and_pepper, BACKGROUND,
};
pub use seed::{RandomSeed, GENERATOR_NAME};

#[derive(Debug, Error)]
pub enum RasterError {
    #[error(
        "pixel buffer has {actual} bytes, expected {expected} for {width}x{height}x{channels}"
    )]
    BufferSize {
        width: u32,
        height: u32,
        channels: u8,
        expected: usize,
        actual: usize,
    },
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: u32, height: u32 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("target quadrilateral is not convex")]
    NonConvexQuad,
    #[error("degenerate warp: {0}")]
    DegenerateWarp(#[from] GeometryError),
    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channels {
    Gray,
    Rgb,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb => 3,
        }
    }
}

/// Rasterized page, 8 bits per channel, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageImage {
    width: u32,
    height: u32,
    channels: Channels,
    data: Vec<u8>,
}

impl PageImage {
    pub fn new(
        width: u32,
        height: u32,
        channels: Channels,
        data: Vec<u8>,
    ) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage { width, height });
        }
        let expected = width as usize * height as usize * channels.count();
        if data.len() != expected {
            return Err(RasterError::BufferSize {
                width,
                height,
                channels: channels.count() as u8,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every channel of every pixel set to `value`.
    pub fn filled(
        width: u32,
        height: u32,
        channels: Channels,
        value: u8,
    ) -> Result<Self, RasterError> {
        let len = width as usize * height as usize * channels.count();
        Self::new(width, height, channels, vec![value; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels.count()
    }

    /// Channel values of pixel `(x, y)`. Panics when out of bounds.
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x}, {y}) out of bounds"
        );
        let o = self.offset(x, y);
        &self.data[o..o + self.channels.count()]
    }

    /// Sets every channel of pixel `(x, y)` to `value`.
    pub fn set_pixel(&mut self, x: u32, y: u32, value: u8) {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x}, {y}) out of bounds"
        );
        let o = self.offset(x, y);
        let n = self.channels.count();
        self.data[o..o + n].fill(value);
    }

    /// Mean over channels; the luminance proxy used for dark-pixel tests.
    pub fn intensity(&self, x: u32, y: u32) -> f64 {
        let px = self.pixel(x, y);
        px.iter().map(|&v| v as f64).sum::<f64>() / px.len() as f64
    }

    /// Fills the half-open pixel rectangle `[x1, x2) x [y1, y2)`, clamped to the frame.
    pub fn fill_rect(&mut self, x1: u32, y1: u32, x2: u32, y2: u32, value: u8) {
        for y in y1.min(self.height)..y2.min(self.height) {
            for x in x1.min(self.width)..x2.min(self.width) {
                self.set_pixel(x, y, value);
            }
        }
    }

    /// Draws a rectangle outline whose outer edge is `[x1, x2) x [y1, y2)`.
    pub fn stroke_rect(&mut self, x1: u32, y1: u32, x2: u32, y2: u32, stroke: u32, value: u8) {
        self.fill_rect(x1, y1, x2, y1 + stroke, value);
        self.fill_rect(x1, y2.saturating_sub(stroke), x2, y2, value);
        self.fill_rect(x1, y1, x1 + stroke, y2, value);
        self.fill_rect(x2.saturating_sub(stroke), y1, x2, y2, value);
    }

    pub fn from_dynamic(img: DynamicImage) -> Result<Self, RasterError> {
        let color = img.color();
        if color.has_color() {
            let rgb = img.into_rgb8();
            let (w, h) = rgb.dimensions();
            Self::new(w, h, Channels::Rgb, rgb.into_raw())
        } else {
            let gray = img.into_luma8();
            let (w, h) = gray.dimensions();
            Self::new(w, h, Channels::Gray, gray.into_raw())
        }
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        match self.channels {
            Channels::Gray => DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(self.width, self.height, self.data.clone())
                    .expect("buffer size checked at construction"),
            ),
            Channels::Rgb => DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(self.width, self.height, self.data.clone())
                    .expect("buffer size checked at construction"),
            ),
        }
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, RasterError> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
        Self::from_dynamic(img)
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, RasterError> {
        let mut out = Cursor::new(Vec::new());
        self.to_dynamic().write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        let bytes = std::fs::read(path)?;
        Self::decode_png(&bytes)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        std::fs::write(path, self.encode_png()?)?;
        Ok(())
    }
}
