//! Region marks and the raster operations derived from them: editing masks,
//! white padding to a fixed aspect ratio, and the highlighted "marked
//! screenshot" overlay.

use serde::{Deserialize, Serialize};

use crate::image::ScreenImage;
use crate::CoreError;

const EDGE_TOLERANCE: f64 = 1e-9;
/// Pixel coordinates closer than this to an integer are snapped to it before
/// floor/ceil, so that 0.1 + 0.2 of 1000 px is 300 and not 301.
const SNAP: f64 = 1e-6;

/// A rectangle in normalized screen coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMark", into = "RawMark")]
pub struct RegionMark {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct RawMark {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl TryFrom<RawMark> for RegionMark {
    type Error = CoreError;

    fn try_from(raw: RawMark) -> Result<Self, Self::Error> {
        RegionMark::new(raw.x, raw.y, raw.w, raw.h)
    }
}

impl From<RegionMark> for RawMark {
    fn from(m: RegionMark) -> Self {
        RawMark {
            x: m.x,
            y: m.y,
            w: m.w,
            h: m.h,
        }
    }
}

impl RegionMark {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, CoreError> {
        if ![x, y, w, h].iter().all(|v| v.is_finite()) {
            return Err(CoreError::InvalidMark("coordinates must be finite".into()));
        }
        if x < 0.0 || y < 0.0 {
            return Err(CoreError::InvalidMark(format!(
                "origin ({x}, {y}) must be non-negative"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(CoreError::InvalidMark(format!(
                "size {w}x{h} must be positive"
            )));
        }
        if x + w > 1.0 + EDGE_TOLERANCE {
            return Err(CoreError::InvalidMark(format!("x + w = {} exceeds 1", x + w)));
        }
        if y + h > 1.0 + EDGE_TOLERANCE {
            return Err(CoreError::InvalidMark(format!("y + h = {} exceeds 1", y + h)));
        }
        Ok(Self { x, y, w, h })
    }

    /// The whole screen.
    pub fn full() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            w: 1.0,
            h: 1.0,
        }
    }

    /// Builds a mark from a pixel rectangle on a `width` x `height` screen.
    pub fn from_pixels(
        left: f64,
        top: f64,
        right: f64,
        bottom: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::InvalidMark("screen has no pixels".into()));
        }
        let (w, h) = (width as f64, height as f64);
        Self::new(
            left / w,
            top / h,
            (right - left) / w,
            (bottom - top) / h,
        )
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Pixel rectangle covered by this mark: floor of the top-left corner,
    /// ceil of the bottom-right corner, clamped to the image.
    ///
    /// A mark spanning less than half a pixel on either axis covers no
    /// pixel and yields [`CoreError::DegenerateMark`].
    pub fn pixel_rect(&self, width: u32, height: u32) -> Result<PixelRect, CoreError> {
        let (fw, fh) = (width as f64, height as f64);
        if self.w * fw < 0.5 || self.h * fh < 0.5 {
            return Err(CoreError::DegenerateMark { width, height });
        }
        let x0 = snap(self.x * fw).floor().max(0.0) as u32;
        let y0 = snap(self.y * fh).floor().max(0.0) as u32;
        let x1 = (snap((self.x + self.w) * fw).ceil() as u32).min(width);
        let y1 = (snap((self.y + self.h) * fh).ceil() as u32).min(height);
        if x1 <= x0 || y1 <= y0 {
            return Err(CoreError::DegenerateMark { width, height });
        }
        Ok(PixelRect { x0, y0, x1, y1 })
    }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// Share of the screen covered by `mark`. Marks are normalized, so the
/// screen dimensions do not enter the result.
pub fn area_fraction(mark: &RegionMark, _dims: (u32, u32)) -> f64 {
    mark.w * mark.h
}

/// Binary editing mask: 255 marks editable pixels, 0 preserved ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl MaskImage {
    pub const EDITABLE: u8 = 255;
    pub const PRESERVED: u8 = 0;

    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::InvalidImage("mask must be non-empty".into()));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(CoreError::InvalidImage(format!(
                "mask buffer has {} bytes, expected {}",
                pixels.len(),
                width as usize * height as usize
            )));
        }
        if let Some(v) = pixels
            .iter()
            .find(|&&v| v != Self::EDITABLE && v != Self::PRESERVED)
        {
            return Err(CoreError::InvalidImage(format!(
                "mask pixel value {v} is neither 0 nor 255"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
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

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn is_editable(&self, x: u32, y: u32) -> bool {
        self.pixels[y as usize * self.width as usize + x as usize] == Self::EDITABLE
    }

    pub fn editable_count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v == Self::EDITABLE).count()
    }

    /// Bounding box of the editable pixels, if any.
    pub fn editable_bounds(&self) -> Option<PixelRect> {
        let mut bounds: Option<PixelRect> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.is_editable(x, y) {
                    let b = bounds.get_or_insert(PixelRect {
                        x0: x,
                        y0: y,
                        x1: x + 1,
                        y1: y + 1,
                    });
                    b.x0 = b.x0.min(x);
                    b.y0 = b.y0.min(y);
                    b.x1 = b.x1.max(x + 1);
                    b.y1 = b.y1.max(y + 1);
                }
            }
        }
        bounds
    }

    /// Grayscale rendering as an RGB screen image (white = editable).
    pub fn to_screen_image(&self) -> ScreenImage {
        let pixels = self.pixels.iter().flat_map(|&v| [v, v, v]).collect();
        ScreenImage::new(
            self.width,
            self.height,
            crate::PixelLayout::Rgb,
            crate::EncodedFormat::Png,
            pixels,
        )
        .expect("dimensions validated at construction")
    }
}

/// Rasterizes `mark` into a mask of the given dimensions.
pub fn rect_to_mask(dims: (u32, u32), mark: &RegionMark) -> Result<MaskImage, CoreError> {
    let (width, height) = dims;
    let rect = mark.pixel_rect(width, height)?;
    let mut pixels = vec![MaskImage::PRESERVED; width as usize * height as usize];
    for y in rect.y0..rect.y1 {
        let row = y as usize * width as usize;
        pixels[row + rect.x0 as usize..row + rect.x1 as usize].fill(MaskImage::EDITABLE);
    }
    MaskImage::new(width, height, pixels)
}

/// Width:height ratio used for blinded comparison images.
pub const COMPARISON_ASPECT: (u32, u32) = (2, 3);

/// Pads `image` with white so that it reaches the `aspect` (width:height)
/// ratio to within one pixel. Only one axis grows and the original pixels
/// stay centered. Images already within tolerance are returned unchanged.
pub fn pad_to_aspect(image: &ScreenImage, aspect: (u32, u32)) -> ScreenImage {
    let (aw, ah) = (aspect.0 as u64, aspect.1 as u64);
    let (w, h) = (image.width() as u64, image.height() as u64);
    let skew = (ah * w) as i64 - (aw * h) as i64;
    if skew.unsigned_abs() <= aw.max(ah) {
        return image.clone();
    }
    let (new_w, new_h) = if skew > 0 {
        // too wide: grow height
        (w, div_round(ah * w, aw))
    } else {
        (div_round(aw * h, ah), h)
    };
    let (new_w, new_h) = (new_w.max(w) as u32, new_h.max(h) as u32);
    let off_x = (new_w - image.width()) / 2;
    let off_y = (new_h - image.height()) / 2;

    let c = image.layout().channels();
    let mut pixels = vec![255u8; new_w as usize * new_h as usize * c];
    let src_stride = image.width() as usize * c;
    for y in 0..image.height() as usize {
        let src = &image.pixels()[y * src_stride..(y + 1) * src_stride];
        let dst_start = ((y + off_y as usize) * new_w as usize + off_x as usize) * c;
        pixels[dst_start..dst_start + src_stride].copy_from_slice(src);
    }
    ScreenImage::new(new_w, new_h, image.layout(), image.format(), pixels)
        .expect("padded buffer sized from its own dimensions")
}

fn div_round(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

const OVERLAY_TINT: [u8; 3] = [255, 59, 48];
const OVERLAY_ALPHA: f32 = 0.3;

/// Copy of `image` with the marked area tinted and outlined. Pixels outside
/// the mark's pixel rectangle are untouched.
pub fn compose_marked_overlay(
    image: &ScreenImage,
    mark: &RegionMark,
) -> Result<ScreenImage, CoreError> {
    let rect = mark.pixel_rect(image.width(), image.height())?;
    let thickness = (image.width().min(image.height()) / 200)
        .max(1)
        .min(rect.width().min(rect.height()).div_ceil(2));
    let c = image.layout().channels();
    let mut pixels = image.pixels().to_vec();
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            let i = (y as usize * image.width() as usize + x as usize) * c;
            let border = x < rect.x0 + thickness
                || x >= rect.x1 - thickness
                || y < rect.y0 + thickness
                || y >= rect.y1 - thickness;
            for (ch, tint) in OVERLAY_TINT.iter().enumerate() {
                pixels[i + ch] = if border {
                    *tint
                } else {
                    let base = pixels[i + ch] as f32;
                    (base + (*tint as f32 - base) * OVERLAY_ALPHA).round() as u8
                };
            }
        }
    }
    ScreenImage::new(
        image.width(),
        image.height(),
        image.layout(),
        image.format(),
        pixels,
    )
}
