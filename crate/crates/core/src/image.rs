//! Decoded raster screenshots.

use std::io::Cursor;

use base64::Engine as _;
use image::{DynamicImage, ImageBuffer, ImageFormat, Rgb, Rgba, RgbaImage};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PixelLayout {
    Rgb,
    Rgba,
}

impl PixelLayout {
    pub fn channels(self) -> usize {
        match self {
            PixelLayout::Rgb => 3,
            PixelLayout::Rgba => 4,
        }
    }
}

/// Container format the image arrived in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodedFormat {
    Png,
    Jpeg,
}

/// A decoded screenshot. The pixel buffer always holds exactly
/// `width * height * channels` bytes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenImage {
    width: u32,
    height: u32,
    layout: PixelLayout,
    format: EncodedFormat,
    pixels: Vec<u8>,
}

impl ScreenImage {
    pub fn new(
        width: u32,
        height: u32,
        layout: PixelLayout,
        format: EncodedFormat,
        pixels: Vec<u8>,
    ) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * layout.channels();
        if pixels.len() != expected {
            return Err(CoreError::InvalidImage(format!(
                "pixel buffer has {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            layout,
            format,
            pixels,
        })
    }

    /// Solid-color RGBA image.
    pub fn filled(width: u32, height: u32, rgba: [u8; 4]) -> Result<Self, CoreError> {
        let pixels = rgba
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 4)
            .collect();
        Self::new(width, height, PixelLayout::Rgba, EncodedFormat::Png, pixels)
    }

    /// Decodes PNG or JPEG bytes. Anything else is rejected.
    pub fn decode(bytes: &[u8]) -> Result<Self, CoreError> {
        let format = match image::guess_format(bytes) {
            Ok(ImageFormat::Png) => EncodedFormat::Png,
            Ok(ImageFormat::Jpeg) => EncodedFormat::Jpeg,
            _ => return Err(CoreError::UnsupportedFormat),
        };
        let decoded = image::load_from_memory(bytes)
            .map_err(|e| CoreError::InvalidImage(e.to_string()))?;
        let mut img = Self::from_dynamic(decoded)?;
        img.format = format;
        Ok(img)
    }

    pub fn from_dynamic(image: DynamicImage) -> Result<Self, CoreError> {
        let (layout, width, height, pixels) = if image.color().has_alpha() {
            let buf = image.into_rgba8();
            (PixelLayout::Rgba, buf.width(), buf.height(), buf.into_raw())
        } else {
            let buf = image.into_rgb8();
            (PixelLayout::Rgb, buf.width(), buf.height(), buf.into_raw())
        };
        Self::new(width, height, layout, EncodedFormat::Png, pixels)
    }

    pub fn from_rgba(buffer: RgbaImage) -> Result<Self, CoreError> {
        let (width, height) = buffer.dimensions();
        Self::new(
            width,
            height,
            PixelLayout::Rgba,
            EncodedFormat::Png,
            buffer.into_raw(),
        )
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        match self.layout {
            PixelLayout::Rgb => DynamicImage::ImageRgb8(
                ImageBuffer::<Rgb<u8>, _>::from_raw(self.width, self.height, self.pixels.clone())
                    .expect("buffer length checked at construction"),
            ),
            PixelLayout::Rgba => DynamicImage::ImageRgba8(
                ImageBuffer::<Rgba<u8>, _>::from_raw(self.width, self.height, self.pixels.clone())
                    .expect("buffer length checked at construction"),
            ),
        }
    }

    pub fn to_rgba(&self) -> RgbaImage {
        self.to_dynamic().into_rgba8()
    }

    /// Lossless PNG encoding of the pixel buffer.
    pub fn encode_png(&self) -> Vec<u8> {
        let mut out = Cursor::new(Vec::new());
        self.to_dynamic()
            .write_to(&mut out, ImageFormat::Png)
            .expect("PNG encoding into memory cannot fail for a valid buffer");
        out.into_inner()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn layout(&self) -> PixelLayout {
        self.layout
    }

    pub fn format(&self) -> EncodedFormat {
        self.format
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Channel values of pixel (x, y). Panics when out of bounds.
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.layout.channels();
        let i = (y as usize * self.width as usize + x as usize) * c;
        &self.pixels[i..i + c]
    }
}

#[derive(Serialize, Deserialize)]
struct EncodedScreenImage {
    format: EncodedFormat,
    png_base64: String,
}

impl Serialize for ScreenImage {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EncodedScreenImage {
            format: self.format,
            png_base64: base64::engine::general_purpose::STANDARD.encode(self.encode_png()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ScreenImage {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = EncodedScreenImage::deserialize(deserializer)?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(raw.png_base64)
            .map_err(D::Error::custom)?;
        let mut img = ScreenImage::decode(&bytes).map_err(D::Error::custom)?;
        img.format = raw.format;
        Ok(img)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dims_and_bad_buffer() {
        assert!(ScreenImage::new(0, 5, PixelLayout::Rgb, EncodedFormat::Png, vec![]).is_err());
        assert!(
            ScreenImage::new(2, 2, PixelLayout::Rgb, EncodedFormat::Png, vec![0; 11]).is_err()
        );
        assert!(ScreenImage::new(2, 2, PixelLayout::Rgb, EncodedFormat::Png, vec![0; 12]).is_ok());
    }

    #[test]
    fn png_round_trip_preserves_pixels() {
        let img = ScreenImage::new(
            3,
            2,
            PixelLayout::Rgb,
            EncodedFormat::Png,
            (0..18).map(|v| v * 10).collect(),
        )
        .unwrap();
        let back = ScreenImage::decode(&img.encode_png()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn decode_rejects_text() {
        assert_eq!(
            ScreenImage::decode(b"hello, this is not an image"),
            Err(CoreError::UnsupportedFormat)
        );
    }

    #[test]
    fn jpeg_is_recognised() {
        let img = ScreenImage::filled(8, 8, [10, 20, 30, 255]).unwrap();
        let mut buf = Cursor::new(Vec::new());
        img.to_dynamic()
            .into_rgb8()
            .write_to(&mut buf, ImageFormat::Jpeg)
            .unwrap();
        let decoded = ScreenImage::decode(buf.get_ref()).unwrap();
        assert_eq!(decoded.format(), EncodedFormat::Jpeg);
        assert_eq!(decoded.dims(), (8, 8));
    }
}
