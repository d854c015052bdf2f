//! Binary PPM (P6) reference codec.
//!
//! Maxval up to 65535 is accepted on read (two-byte samples are
//! big-endian per the format); writes always use maxval 255.

use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// Decodes a binary PPM (P6) stream.
pub fn decode(bytes: &[u8]) -> Result<RasterImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    cur.expect_magic()?;
    let width = cur.read_header_number("width")?;
    let height = cur.read_header_number("height")?;
    let maxval = cur.read_header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(cur.err(format!("maxval {maxval} out of 1..=65535")));
    }
    // Exactly one whitespace byte separates the header from the samples.
    match cur.next() {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err(cur.err("expected single whitespace before pixel data")),
    }
    let bytes_per_sample = if maxval > 255 { 2 } else { 1 };
    let need = width * height * 3 * bytes_per_sample;
    let data = &cur.bytes[cur.pos..];
    if data.len() < need {
        return Err(Error::ImageDecode(format!(
            "truncated P6 pixel data at byte {}: need {need} bytes, have {}",
            cur.pos,
            data.len()
        )));
    }
    let max = maxval as f64;
    let mut pixels = Vec::with_capacity(width * height);
    let mut i = 0;
    for _ in 0..width * height {
        let mut p = [0.0; 3];
        for c in &mut p {
            let v = if bytes_per_sample == 2 {
                let v = u16::from_be_bytes([data[i], data[i + 1]]) as usize;
                i += 2;
                v
            } else {
                let v = data[i] as usize;
                i += 1;
                v
            };
            if v > maxval {
                return Err(Error::ImageDecode(format!(
                    "sample {v} exceeds maxval {maxval} at byte {}",
                    cur.pos + i
                )));
            }
            *c = v as f64 / max;
        }
        pixels.push(p);
    }
    RasterImage::from_pixels(width, height, pixels)
}

/// Encodes to binary PPM (P6), maxval 255. Channels are rounded to the
/// nearest 8-bit sample; deterministic byte-for-byte.
pub fn encode(img: &RasterImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + img.width() * img.height() * 3);
    out.extend_from_slice(format!("P6\n{} {}\n255\n", img.width(), img.height()).as_bytes());
    for p in img.pixels() {
        for c in p {
            out.push((c * 255.0).round() as u8);
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::ImageDecode(format!("P6 header at byte {}: {}", self.pos, msg.into()))
    }

    fn next(&mut self) -> Option<u8> {
        let b = self.bytes.get(self.pos).copied();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn expect_magic(&mut self) -> Result<()> {
        if self.bytes.starts_with(b"P6") {
            self.pos = 2;
            Ok(())
        } else {
            Err(self.err("missing P6 magic"))
        }
    }

    /// Skips whitespace and `#` comments, then reads a decimal number.
    fn read_header_number(&mut self, what: &str) -> Result<usize> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(b) if b.is_ascii_digit() => break,
                Some(b) => return Err(self.err(format!("unexpected byte {b:#04x} in {what}"))),
                None => return Err(self.err(format!("unexpected end of header in {what}"))),
            }
        }
        let mut value: usize = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as usize))
                .ok_or_else(|| self.err(format!("{what} overflows")))?;
            self.pos += 1;
        }
        Ok(value)
    }
}
