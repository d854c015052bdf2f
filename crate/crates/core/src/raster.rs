//! Raster image ingest: decoding, luminance conversion, and the
//! horizontal flip that puts images into the pipeline's canonical
//! orientation before quantization.
//!
//! PNG and binary PPM (P6) are first-class; PPM is the reference fixture
//! format because its bytes are trivially reproducible. JPEG decodes too,
//! but fixtures avoid it since it is lossy.

use crate::error::{Error, Result};

pub mod ppm;

/// Decoded color image. Pixels are row-major `[r, g, b]` with each channel
/// on a 0..=1 scale; row 0 is the top of the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl RasterImage {
    /// Builds an image from row-major pixels, validating dimensions and
    /// channel ranges.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image", "width and height must be >= 1"));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(
                "image",
                format!(
                    "pixel count {} does not match {}x{}",
                    pixels.len(),
                    width,
                    height
                ),
            ));
        }
        for (i, p) in pixels.iter().enumerate() {
            for c in p {
                if !(0.0..=1.0).contains(c) {
                    return Err(Error::invalid(
                        "image",
                        format!("channel {c} out of [0,1] at pixel {i}"),
                    ));
                }
            }
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }
}

/// Single-channel luminance image on a 0..=1 scale, same layout as the
/// [`RasterImage`] it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    luma: Vec<f64>,
}

impl GrayImage {
    pub fn from_luma(width: usize, height: usize, luma: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image", "width and height must be >= 1"));
        }
        if luma.len() != width * height {
            return Err(Error::invalid(
                "image",
                format!(
                    "luma count {} does not match {}x{}",
                    luma.len(),
                    width,
                    height
                ),
            ));
        }
        if let Some(v) = luma.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid("image", format!("luma {v} out of [0,1]")));
        }
        Ok(GrayImage {
            width,
            height,
            luma,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn luma_at(&self, row: usize, col: usize) -> f64 {
        self.luma[row * self.width + col]
    }

    pub fn luma(&self) -> &[f64] {
        &self.luma
    }
}

/// Formula used to collapse RGB to a single luminance value.
///
/// `Bt601` is the default. The HSL variant is provided because tools in
/// the wild disagree on what "luminance" means; neither claims to match
/// any particular paint program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LumaFormula {
    /// `0.299 r + 0.587 g + 0.114 b`.
    #[default]
    Bt601,
    /// HSL lightness, `(max + min) / 2`.
    HslLightness,
}

impl LumaFormula {
    pub fn apply(self, [r, g, b]: [f64; 3]) -> f64 {
        match self {
            LumaFormula::Bt601 => 0.299 * r + 0.587 * g + 0.114 * b,
            LumaFormula::HslLightness => {
                let max = r.max(g).max(b);
                let min = r.min(g).min(b);
                (max + min) / 2.0
            }
        }
    }
}

/// Decodes an encoded image byte stream (PPM P6, PNG, or JPEG).
///
/// Channels are normalized to 0..=1; grayscale sources are replicated
/// across all three channels.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.starts_with(b"P6") {
        return ppm::decode(bytes);
    }
    // PPM variants we deliberately do not read get a distinct error
    // instead of falling through to the generic decoder.
    if bytes.len() >= 2 && bytes[0] == b'P' && (b'1'..=b'7').contains(&bytes[1]) {
        return Err(Error::UnsupportedImageFormat(format!(
            "PNM magic {:?}; only binary PPM (P6) is supported",
            bytes[..2].escape_ascii().to_string()
        )));
    }
    let guessed = image::guess_format(bytes).map_err(|_| {
        Error::UnsupportedImageFormat("not PPM (P6), PNG, or JPEG".to_string())
    })?;
    let decoded = image::load_from_memory_with_format(bytes, guessed)
        .map_err(|e| Error::ImageDecode(e.to_string()))?;
    // 16-bit promotion keeps 8-bit values exact: v*257 / 65535 == v / 255.
    let rgb = decoded.to_rgb16();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb
        .pixels()
        .map(|p| {
            [
                p.0[0] as f64 / 65535.0,
                p.0[1] as f64 / 65535.0,
                p.0[2] as f64 / 65535.0,
            ]
        })
        .collect();
    RasterImage::from_pixels(w, h, pixels)
}

/// Collapses a color image to luminance, preserving dimensions.
pub fn to_luminance(img: &RasterImage, formula: LumaFormula) -> GrayImage {
    let luma = img.pixels.iter().map(|&p| formula.apply(p)).collect();
    GrayImage {
        width: img.width,
        height: img.height,
        luma,
    }
}

/// Reverses column order. An involution: flipping twice restores the input.
pub fn flip_horizontal(img: &GrayImage) -> GrayImage {
    let mut luma = Vec::with_capacity(img.luma.len());
    for row in 0..img.height {
        let base = row * img.width;
        luma.extend(img.luma[base..base + img.width].iter().rev());
    }
    GrayImage {
        width: img.width,
        height: img.height,
        luma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_ppm_normalizes_channels() {
        // 2x1 P6, pixels (255,0,0) and (0,0,0)
        let bytes = b"P6\n2 1\n255\n\xff\x00\x00\x00\x00\x00";
        let img = decode_image(bytes).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 1);
        assert_eq!(img.pixel(0, 0), [1.0, 0.0, 0.0]);
        assert_eq!(img.pixel(0, 1), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn decode_grayscale_png_replicates_channels() {
        let gray = image::GrayImage::from_pixel(1, 1, image::Luma([128u8]));
        let mut buf = std::io::Cursor::new(Vec::new());
        gray.write_to(&mut buf, image::ImageFormat::Png).unwrap();
        let img = decode_image(buf.get_ref()).unwrap();
        let expect = 128.0 / 255.0;
        let p = img.pixel(0, 0);
        for c in p {
            assert!((c - expect).abs() < 1e-12, "channel {c} != {expect}");
        }
        assert_eq!(p[0], p[1]);
        assert_eq!(p[1], p[2]);
    }

    #[test]
    fn truncated_stream_is_a_decode_error() {
        let gray = image::GrayImage::from_pixel(4, 4, image::Luma([10u8]));
        let mut buf = std::io::Cursor::new(Vec::new());
        gray.write_to(&mut buf, image::ImageFormat::Png).unwrap();
        let bytes = &buf.get_ref()[..buf.get_ref().len() / 2];
        match decode_image(bytes) {
            Err(Error::ImageDecode(_)) => {}
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn unsupported_format_is_distinct() {
        match decode_image(b"GIF89a rest of stream") {
            Err(Error::UnsupportedImageFormat(_)) | Err(Error::ImageDecode(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
        // ASCII PPM is recognized but rejected explicitly.
        match decode_image(b"P3\n1 1\n255\n255 0 0\n") {
            Err(Error::UnsupportedImageFormat(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bt601_known_values() {
        assert!((LumaFormula::Bt601.apply([1.0, 1.0, 1.0]) - 1.0).abs() < 1e-12);
        assert_eq!(LumaFormula::Bt601.apply([0.0, 0.0, 0.0]), 0.0);
        let v = LumaFormula::Bt601.apply([37.0 / 255.0, 140.0 / 255.0, 35.0 / 255.0]);
        assert!((v - 0.3813).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn hsl_lightness_known_value() {
        let v = LumaFormula::HslLightness.apply([37.0 / 255.0, 140.0 / 255.0, 35.0 / 255.0]);
        assert!((v - 0.343).abs() < 1e-3, "got {v}");
    }

    #[test]
    fn luminance_is_monotone_per_channel() {
        let lo = LumaFormula::Bt601.apply([0.2, 0.5, 0.7]);
        for ch in 0..3 {
            let mut p = [0.2, 0.5, 0.7];
            p[ch] += 0.1;
            assert!(LumaFormula::Bt601.apply(p) > lo);
        }
    }

    #[test]
    fn flip_reverses_columns() {
        let g = GrayImage::from_luma(2, 1, vec![0.2, 0.8]).unwrap();
        let f = flip_horizontal(&g);
        assert_eq!(f.luma(), &[0.8, 0.2]);
        let single = GrayImage::from_luma(1, 1, vec![0.5]).unwrap();
        assert_eq!(flip_horizontal(&single).luma(), &[0.5]);
    }

    #[test]
    fn flip_is_an_involution() {
        let g = GrayImage::from_luma(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        assert_eq!(flip_horizontal(&flip_horizontal(&g)), g);
    }

    #[test]
    fn invariants_rejected() {
        assert!(RasterImage::from_pixels(2, 1, vec![[0.0; 3]]).is_err());
        assert!(RasterImage::from_pixels(1, 1, vec![[1.5, 0.0, 0.0]]).is_err());
        assert!(GrayImage::from_luma(1, 1, vec![-0.1]).is_err());
    }
}
