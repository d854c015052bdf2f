//! Recipe execution: ingest, quantize, mesh, assemble, scale.

use std::path::Path;

use crate::config::{LayerSpec, PipelineConfig};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::heightfield::{attach_range, pad, quantize, StepFunction};
use crate::mesh::{
    assemble, extrude_region_with, heightfield_to_solid_with, scale_to_diameter, Assembly,
    TriangleMesh,
};
use crate::metrics::shell_volume;
use crate::raster::{decode_image, flip_horizontal, to_luminance};
use crate::region::{self, Region2D};

/// Everything a build produces besides the STL bytes.
#[derive(Debug, Clone)]
pub struct BuildOutput {
    /// Assembly in recipe model units.
    pub unscaled: Assembly,
    /// Scaled assembly and the factor, when the recipe sets a target
    /// diameter.
    pub scaled: Option<(Assembly, f64)>,
}

impl BuildOutput {
    /// The assembly that gets exported.
    pub fn final_assembly(&self) -> &Assembly {
        self.scaled.as_ref().map(|(a, _)| a).unwrap_or(&self.unscaled)
    }

    pub fn scale_factor(&self) -> Option<f64> {
        self.scaled.as_ref().map(|&(_, s)| s)
    }

    /// Per-shell triangle counts and volumes of the exported assembly.
    pub fn summary(&self) -> BuildSummary {
        let assembly = self.final_assembly();
        BuildSummary {
            shells: assembly
                .shells()
                .iter()
                .map(|s| ShellSummary {
                    name: s.name.clone(),
                    triangles: s.mesh.triangle_count(),
                    volume: shell_volume(&s.mesh),
                })
                .collect(),
            scale_factor: self.scale_factor(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShellSummary {
    pub name: String,
    pub triangles: usize,
    pub volume: f64,
}

#[derive(Debug, Clone)]
pub struct BuildSummary {
    pub shells: Vec<ShellSummary>,
    pub scale_factor: Option<f64>,
}

impl std::fmt::Display for BuildSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut triangles = 0usize;
        for shell in &self.shells {
            writeln!(
                f,
                "  shell {:<12} {:>8} triangles  volume {:.3}",
                shell.name, shell.triangles, shell.volume
            )?;
            triangles += shell.triangles;
        }
        write!(f, "  total {triangles} triangles")?;
        if let Some(s) = self.scale_factor {
            write!(f, "  (scaled by {s:.9})")?;
        }
        Ok(())
    }
}

/// Runs every layer of a recipe and assembles the shells in order.
pub fn build_assembly(
    config: &PipelineConfig,
    base_dir: &Path,
    mode: ExecMode,
) -> Result<BuildOutput> {
    let global_clip = config
        .clip
        .as_deref()
        .map(|text| region::parse(text).map_err(|e| config_err("clip", None, e)))
        .transpose()?;

    let mut shells: Vec<(String, TriangleMesh)> = Vec::with_capacity(config.layers.len());
    for layer in &config.layers {
        let mesh = build_layer(layer, global_clip.as_ref(), base_dir, mode)?;
        shells.push((layer.name().to_string(), mesh));
    }
    let unscaled = assemble(config.display_name(), shells)?;
    let scaled = config
        .target_diameter_mm
        .map(|target| scale_to_diameter(&unscaled, target))
        .transpose()?;
    Ok(BuildOutput { unscaled, scaled })
}

fn build_layer(
    layer: &LayerSpec,
    global_clip: Option<&Region2D>,
    base_dir: &Path,
    mode: ExecMode,
) -> Result<TriangleMesh> {
    let name = layer.name();
    match layer {
        LayerSpec::Heightfield {
            image,
            flip,
            luma,
            steps,
            default_height,
            pad: margin,
            pad_value,
            x_range,
            y_range,
            z_base,
            smooth,
            clip,
            ..
        } => {
            let path = base_dir.join(image);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let raster = decode_image(&bytes).map_err(|e| config_err("decode", Some(name), e))?;
            let mut gray = to_luminance(&raster, *luma);
            if *flip {
                gray = flip_horizontal(&gray);
            }
            let step_fn = StepFunction::new(steps.clone(), *default_height)
                .map_err(|e| config_err("steps", Some(name), e))?;
            let mut hf = quantize(&gray, &step_fn);
            if *margin > 0 {
                hf = pad(&hf, *margin, *pad_value)
                    .map_err(|e| config_err("pad", Some(name), e))?;
            }
            let mut hf = attach_range(&hf, *x_range, *y_range)
                .map_err(|e| config_err("range", Some(name), e))?;
            if *smooth {
                hf = hf.smoothed();
            }
            let layer_clip = clip
                .as_deref()
                .map(|text| region::parse(text).map_err(|e| config_err("clip", Some(name), e)))
                .transpose()?;
            let effective = combine_clips(global_clip, layer_clip);
            heightfield_to_solid_with(&hf, effective.as_ref(), *z_base, mode)
                .map_err(|e| config_err("mesh", Some(name), e))
        }
        LayerSpec::Extrusion {
            region: region_text,
            z0,
            z1,
            resolution,
            window,
            ..
        } => {
            let layer_region = region_text
                .as_deref()
                .map(|text| region::parse(text).map_err(|e| config_err("region", Some(name), e)))
                .transpose()?;
            let effective = combine_clips(global_clip, layer_region).ok_or_else(|| {
                Error::config_in_layer(name, "extrusion needs a region or a global clip")
            })?;
            extrude_region_with(&effective, *z0, *z1, *resolution, *window, mode)
                .map_err(|e| config_err("mesh", Some(name), e))
        }
    }
}

fn combine_clips(global: Option<&Region2D>, layer: Option<Region2D>) -> Option<Region2D> {
    match (global, layer) {
        (Some(g), Some(l)) => Some(l.and(g.clone())),
        (Some(g), None) => Some(g.clone()),
        (None, l) => l,
    }
}

/// Keeps I/O errors intact (they carry paths and map to their own exit
/// code); everything else becomes a config error naming layer and stage.
fn config_err(stage: &str, layer: Option<&str>, e: Error) -> Error {
    match e {
        Error::Io { .. } => e,
        other => Error::Config {
            layer: layer.map(str::to_string),
            msg: format!("{stage}: {other}"),
        },
    }
}
