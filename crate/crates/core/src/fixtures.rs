//! Programmatic sample images for the bundled recipe and for tests.
//!
//! Real logo scans are not redistributable, so the bundled pendant
//! recipe runs against these two generated images: block letters with a
//! dark outline and mid-luminance fill, and a toy mascot with four
//! luminance bands.

use crate::raster::RasterImage;

const WHITE: [u8; 3] = [255, 255, 255];
const BLACK: [u8; 3] = [0, 0, 0];
/// Fill green with luminance 82-ish out of 255.
const GREEN: [u8; 3] = [37, 140, 35];
/// Body tone, luminance band (0.6, 0.9).
const BODY: [u8; 3] = [250, 180, 190];
/// Mid gray, luminance band (0.1, 0.6).
const GRAY: [u8; 3] = [100, 100, 100];

fn to_image(width: usize, height: usize, rgb: Vec<[u8; 3]>) -> RasterImage {
    let pixels = rgb
        .into_iter()
        .map(|p| [p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0])
        .collect();
    RasterImage::from_pixels(width, height, pixels).expect("generated pixels are in range")
}

/// 112x40 banner with the four block letters: green interiors, black
/// outlines, white background. Quantizes to heights {0, 3, 5} under the
/// letters step function.
pub fn letters_image() -> RasterImage {
    const GLYPHS: [[&str; 7]; 4] = [
        ["#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"], // Z
        ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."], // U
        ["#####", "#....", "#....", "####.", "#....", "#....", "#...."], // F
        ["####.", "#...#", "#...#", "####.", "#....", "#....", "#...."], // P
    ];
    const SCALE: usize = 4;
    const W: usize = 112;
    const H: usize = 40;
    let (left, top) = (4usize, 6usize);
    let mut mask = vec![false; W * H];
    for (g, glyph) in GLYPHS.iter().enumerate() {
        let gx = left + g * (5 * SCALE + 8);
        for (r, row) in glyph.iter().enumerate() {
            for (c, ch) in row.bytes().enumerate() {
                if ch != b'#' {
                    continue;
                }
                for dy in 0..SCALE {
                    for dx in 0..SCALE {
                        mask[(top + r * SCALE + dy) * W + gx + c * SCALE + dx] = true;
                    }
                }
            }
        }
    }
    let mut rgb = vec![WHITE; W * H];
    for y in 0..H {
        for x in 0..W {
            if !mask[y * W + x] {
                continue;
            }
            // stroke pixels with any background neighbor become outline
            let mut interior = true;
            'scan: for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                    if nx < 0 || ny < 0 || nx >= W as i32 || ny >= H as i32 {
                        interior = false;
                        break 'scan;
                    }
                    if !mask[ny as usize * W + nx as usize] {
                        interior = false;
                        break 'scan;
                    }
                }
            }
            rgb[y * W + x] = if interior { GREEN } else { BLACK };
        }
    }
    to_image(W, H, rgb)
}

/// 105x105 toy mascot: pale body ellipse, dark eyes, gray shirt patch on
/// white. Exercises all four bands of the top-layer step function.
pub fn logo_image() -> RasterImage {
    const W: usize = 105;
    const H: usize = 105;
    let mut rgb = vec![WHITE; W * H];
    let ellipse = |x: f64, y: f64, cx: f64, cy: f64, rx: f64, ry: f64| {
        let dx = (x - cx) / rx;
        let dy = (y - cy) / ry;
        dx * dx + dy * dy <= 1.0
    };
    for y in 0..H {
        for x in 0..W {
            let (xf, yf) = (x as f64, y as f64);
            let mut color = None;
            if ellipse(xf, yf, 52.0, 54.0, 30.0, 36.0) {
                color = Some(BODY);
            }
            if (72..=88).contains(&y) && (34..=70).contains(&x) {
                color = Some(GRAY); // shirt
            }
            if ellipse(xf, yf, 42.0, 40.0, 4.0, 5.0) || ellipse(xf, yf, 62.0, 40.0, 4.0, 5.0) {
                color = Some(BLACK); // eyes
            }
            if let Some(c) = color {
                rgb[y * W + x] = c;
            }
        }
    }
    to_image(W, H, rgb)
}
