//! Declarative pipeline recipes.
//!
//! A recipe is a single TOML file with a `schema` version, an optional
//! global clip region, an ordered list of layers, and output options.
//! Relative paths inside the file are resolved against the directory the
//! file lives in.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::raster::LumaFormula;

/// Supported `schema` value.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
pub struct PipelineConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Region expression applied to every layer.
    #[serde(default)]
    pub clip: Option<String>,
    /// When set, the finished assembly is scaled so its x extent equals
    /// this many millimeters.
    #[serde(default)]
    pub target_diameter_mm: Option<f64>,
    /// Default STL output path, relative to the recipe file.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(rename = "layer", default)]
    pub layers: Vec<LayerSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Image -> luminance -> stepped heightfield -> clipped solid.
    Heightfield {
        name: String,
        image: PathBuf,
        #[serde(default)]
        flip: bool,
        #[serde(default)]
        luma: LumaFormula,
        /// Ordered `(upper_threshold, height)` bands.
        steps: Vec<(f64, f64)>,
        #[serde(default)]
        default_height: f64,
        #[serde(default)]
        pad: usize,
        #[serde(default)]
        pad_value: f64,
        x_range: (f64, f64),
        y_range: (f64, f64),
        #[serde(default)]
        z_base: f64,
        #[serde(default)]
        smooth: bool,
        /// Extra clip for this layer, intersected with the global clip.
        #[serde(default)]
        clip: Option<String>,
    },
    /// Implicit region swept between two z planes.
    Extrusion {
        name: String,
        /// Region expression, intersected with the global clip. May be
        /// omitted when the global clip alone defines the footprint.
        #[serde(default)]
        region: Option<String>,
        z0: f64,
        z1: f64,
        resolution: usize,
        /// Explicit sampling window `[x0, x1, y0, y1]` for regions whose
        /// bounding box is unbounded.
        #[serde(default)]
        window: Option<[f64; 4]>,
    },
}

impl LayerSpec {
    pub fn name(&self) -> &str {
        match self {
            LayerSpec::Heightfield { name, .. } | LayerSpec::Extrusion { name, .. } => name,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    /// Loads a recipe and returns it with its base directory for path
    /// resolution.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_toml_str(&text)?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, base))
    }

    fn check(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "schema {} is not supported (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.layers.is_empty() {
            return Err(Error::config("recipe has no layers"));
        }
        if let Some(d) = self.target_diameter_mm {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::config(format!(
                    "target_diameter_mm {d} must be finite and > 0"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for layer in &self.layers {
            if !seen.insert(layer.name().to_string()) {
                return Err(Error::config(format!(
                    "duplicate layer name {:?}",
                    layer.name()
                )));
            }
        }
        Ok(())
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("assembly")
    }
}
