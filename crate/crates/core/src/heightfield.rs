//! Luminance-to-height quantization.
//!
//! A [`StepFunction`] maps luminance to one of a few print heights via
//! ordered strict-less-than threshold bands; quantizing a [`GrayImage`]
//! yields a [`HeightField`], which can then be padded and given a world
//! coordinate range for meshing.

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Piecewise-constant luminance-to-height map.
///
/// Bands `(upper_threshold, height)` are evaluated in order; the first
/// band with `luma < upper_threshold` wins, otherwise `default_height`
/// applies. A value exactly equal to a threshold falls through to the
/// next band.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    bands: Vec<(f64, f64)>,
    default_height: f64,
}

impl StepFunction {
    pub fn new(bands: Vec<(f64, f64)>, default_height: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::invalid("step function", "needs at least one band"));
        }
        let mut prev = f64::NEG_INFINITY;
        for &(threshold, height) in &bands {
            if !threshold.is_finite() || threshold <= 0.0 || threshold > 1.0 {
                return Err(Error::invalid(
                    "step function",
                    format!("threshold {threshold} out of (0,1]"),
                ));
            }
            if threshold <= prev {
                return Err(Error::invalid(
                    "step function",
                    format!("thresholds must be strictly increasing, got {threshold} after {prev}"),
                ));
            }
            if !height.is_finite() || height < 0.0 {
                return Err(Error::invalid(
                    "step function",
                    format!("height {height} must be finite and >= 0"),
                ));
            }
            prev = threshold;
        }
        if !default_height.is_finite() || default_height < 0.0 {
            return Err(Error::invalid(
                "step function",
                format!("default height {default_height} must be finite and >= 0"),
            ));
        }
        Ok(StepFunction {
            bands,
            default_height,
        })
    }

    pub fn eval(&self, luma: f64) -> f64 {
        for &(threshold, height) in &self.bands {
            if luma < threshold {
                return height;
            }
        }
        self.default_height
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    pub fn default_height(&self) -> f64 {
        self.default_height
    }

    /// All heights this function can produce.
    pub fn heights(&self) -> Vec<f64> {
        let mut hs: Vec<f64> = self.bands.iter().map(|&(_, h)| h).collect();
        hs.push(self.default_height);
        hs
    }
}

/// Quantized height grid, optionally placed on a world-coordinate
/// rectangle. Row 0 / column 0 map to `(x_min, y_min)` once a range is
/// attached; samples are linearly spaced in between.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    rows: usize,
    cols: usize,
    heights: Vec<f64>,
    x_range: Option<(f64, f64)>,
    y_range: Option<(f64, f64)>,
}

impl HeightField {
    pub fn from_heights(rows: usize, cols: usize, heights: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("height field", "empty grid"));
        }
        if heights.len() != rows * cols {
            return Err(Error::invalid(
                "height field",
                format!("{} heights for {}x{} grid", heights.len(), rows, cols),
            ));
        }
        if let Some(h) = heights.iter().find(|h| !h.is_finite() || **h < 0.0) {
            return Err(Error::invalid(
                "height field",
                format!("height {h} must be finite and >= 0"),
            ));
        }
        Ok(HeightField {
            rows,
            cols,
            heights,
            x_range: None,
            y_range: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn height_at(&self, row: usize, col: usize) -> f64 {
        self.heights[row * self.cols + col]
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn x_range(&self) -> Option<(f64, f64)> {
        self.x_range
    }

    pub fn y_range(&self) -> Option<(f64, f64)> {
        self.y_range
    }

    /// World x of sample column `col`, if a range is attached.
    pub fn x_of_col(&self, col: usize) -> Option<f64> {
        let (x0, x1) = self.x_range?;
        Some(lerp_grid(x0, x1, col, self.cols))
    }

    /// World y of sample row `row`, if a range is attached.
    pub fn y_of_row(&self, row: usize) -> Option<f64> {
        let (y0, y1) = self.y_range?;
        Some(lerp_grid(y0, y1, row, self.rows))
    }

    /// One pass of 3x3 neighbor averaging (window clamped at borders).
    /// Softens step edges the way a plotting surface would; ranges are
    /// preserved.
    pub fn smoothed(&self) -> HeightField {
        let mut out = Vec::with_capacity(self.heights.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let r0 = r.saturating_sub(1);
                let r1 = (r + 1).min(self.rows - 1);
                let c0 = c.saturating_sub(1);
                let c1 = (c + 1).min(self.cols - 1);
                let mut sum = 0.0;
                let mut n = 0.0;
                for rr in r0..=r1 {
                    for cc in c0..=c1 {
                        sum += self.height_at(rr, cc);
                        n += 1.0;
                    }
                }
                out.push(sum / n);
            }
        }
        HeightField {
            rows: self.rows,
            cols: self.cols,
            heights: out,
            x_range: self.x_range,
            y_range: self.y_range,
        }
    }
}

/// Position of grid node `i` of `n` linearly spaced samples over `[a, b]`.
/// Endpoints are exact.
pub(crate) fn lerp_grid(a: f64, b: f64, i: usize, n: usize) -> f64 {
    debug_assert!(n >= 2 && i < n);
    if i == 0 {
        a
    } else if i == n - 1 {
        b
    } else {
        a + (b - a) * (i as f64 / (n - 1) as f64)
    }
}

/// Applies a step function to every luminance sample. The result has no
/// world range until [`attach_range`] is called.
pub fn quantize(img: &GrayImage, f: &StepFunction) -> HeightField {
    let heights = img.luma().iter().map(|&v| f.eval(v)).collect();
    HeightField {
        rows: img.height(),
        cols: img.width(),
        heights,
        x_range: None,
        y_range: None,
    }
}

/// Grows the grid by `margin` cells on every side, filled with `value`.
/// World ranges, when present, extend by the existing sample spacing so
/// interior samples keep their positions.
pub fn pad(hf: &HeightField, margin: usize, value: f64) -> Result<HeightField> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::invalid(
            "pad value",
            format!("{value} must be finite and >= 0"),
        ));
    }
    if margin == 0 {
        return Ok(hf.clone());
    }
    let rows = hf.rows + 2 * margin;
    let cols = hf.cols + 2 * margin;
    let mut heights = vec![value; rows * cols];
    for r in 0..hf.rows {
        let src = r * hf.cols;
        let dst = (r + margin) * cols + margin;
        heights[dst..dst + hf.cols].copy_from_slice(&hf.heights[src..src + hf.cols]);
    }
    let extend = |range: Option<(f64, f64)>, n: usize| {
        range.map(|(a, b)| {
            let step = (b - a) / (n - 1) as f64;
            (a - margin as f64 * step, b + margin as f64 * step)
        })
    };
    Ok(HeightField {
        rows,
        cols,
        heights,
        x_range: extend(hf.x_range, hf.cols),
        y_range: extend(hf.y_range, hf.rows),
    })
}

/// Places the grid on a world rectangle: sample (0, 0) at `(x_min, y_min)`,
/// the last sample at `(x_max, y_max)`.
pub fn attach_range(
    hf: &HeightField,
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Result<HeightField> {
    for (name, (lo, hi)) in [("x range", x_range), ("y range", y_range)] {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::invalid(
                name,
                format!("({lo}, {hi}) is degenerate or non-finite"),
            ));
        }
    }
    if hf.rows < 2 || hf.cols < 2 {
        return Err(Error::invalid(
            "height field",
            format!("{}x{} grid is too small for a world mapping", hf.rows, hf.cols),
        ));
    }
    Ok(HeightField {
        x_range: Some(x_range),
        y_range: Some(y_range),
        ..hf.clone()
    })
}

/// The nested-threshold quantizer for dark-outline/mid-fill/blank-background
/// images: below 0.1 prints at 3, below 0.7 at 5, anything brighter not at all.
pub fn letters_step_function() -> StepFunction {
    StepFunction::new(vec![(0.1, 3.0), (0.7, 5.0)], 0.0).expect("static bands are valid")
}

/// The top-relief quantizer: near-white maps to the 7 base level, dark and
/// mid tones to 11, light-mid tones to 15.
pub fn logo_step_function() -> StepFunction {
    StepFunction::new(vec![(0.1, 11.0), (0.6, 11.0), (0.9, 15.0)], 7.0)
        .expect("static bands are valid")
}
