//! `reliefcast` command line: build pendant STLs from a recipe, report
//! print volumes and filament-change fractions, render previews, and
//! validate meshes.
//!
//! Exit codes: 0 success, 1 usage, 2 validation failure, 3 I/O.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reliefcast_core::config::PipelineConfig;
use reliefcast_core::error::Error as CoreError;
use reliefcast_core::exec::ExecMode;
use reliefcast_core::mesh::{assemble, Assembly};
use reliefcast_core::metrics::{
    filament_breaks, shell_volume, split_components, validate, volume_profile, VolumeProfile,
};
use reliefcast_core::pipeline::build_assembly;
use reliefcast_core::render::{
    render_topdown, render_turntable, save_frames, write_image_file, HeightBandPalette,
    DEFAULT_TURNTABLE_FRAMES,
};
use reliefcast_core::{region, stl};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "reliefcast",
    version,
    about = "Raster logos to layered 3D-printable relief pendants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the STL from a recipe and print a per-shell summary.
    Build {
        #[arg(long)]
        config: PathBuf,
        /// Output STL path; defaults to the recipe's `output`, then to
        /// `<recipe stem>.stl` next to the recipe.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write ASCII STL instead of binary.
        #[arg(long)]
        ascii: bool,
    },
    /// Total, per-shell, and cumulative-by-height volume analytics.
    /// Fractions are volume-basis and scale-invariant; when a recipe is
    /// given they are computed on the unscaled model so break heights use
    /// recipe coordinates.
    VolumeReport {
        #[command(flatten)]
        source: Source,
        /// Comma-separated filament-change heights, e.g. `6,11`.
        #[arg(long, value_delimiter = ',')]
        breaks: Vec<f64>,
        /// Number of horizontal slabs in the profile.
        #[arg(long, default_value_t = 50)]
        slices: usize,
        /// `text` or `kv` (machine-readable key=value lines).
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Render a top-down height-band map and turntable frames as PPM.
    Preview {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = DEFAULT_TURNTABLE_FRAMES)]
        frames: usize,
        /// Image size as WxH, e.g. `640x480`.
        #[arg(long, default_value = "512x512")]
        size: String,
        /// Directory for `topdown.ppm` and `frame_NNN.ppm`.
        #[arg(long, default_value = "preview")]
        out_dir: PathBuf,
        /// Replace existing image files instead of refusing.
        #[arg(long)]
        overwrite: bool,
    },
    /// Check an STL file for watertightness and orientation.
    Validate {
        /// STL file to check.
        stl: PathBuf,
    },
    /// Parse a recipe without building: regions, step bands, image paths.
    ParseCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Recipe file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Prebuilt STL file.
    #[arg(long)]
    stl: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &CoreError) -> u8 {
    match e {
        CoreError::Io { .. } | CoreError::WouldOverwrite(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn run(cli: Cli) -> Result<u8, CoreError> {
    match cli.command {
        Command::Build {
            config,
            output,
            ascii,
        } => cmd_build(&config, output, ascii),
        Command::VolumeReport {
            source,
            breaks,
            slices,
            format,
        } => cmd_volume_report(&source, &breaks, slices, &format),
        Command::Preview {
            source,
            frames,
            size,
            out_dir,
            overwrite,
        } => cmd_preview(&source, frames, &size, &out_dir, overwrite),
        Command::Validate { stl } => cmd_validate(&stl),
        Command::ParseCheck { config } => cmd_parse_check(&config),
    }
}

fn cmd_build(config_path: &Path, output: Option<PathBuf>, ascii: bool) -> Result<u8, CoreError> {
    let (config, base_dir) = PipelineConfig::load(config_path)?;
    let out = build_assembly(&config, &base_dir, ExecMode::default())?;
    let out_path = output.unwrap_or_else(|| {
        config
            .output
            .as_ref()
            .map(|p| base_dir.join(p))
            .unwrap_or_else(|| {
                let stem = config_path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "assembly".into());
                base_dir.join(format!("{stem}.stl"))
            })
    });
    let assembly = out.final_assembly();
    if ascii {
        let text = stl::write_ascii(assembly)?;
        std::fs::write(&out_path, text).map_err(|e| CoreError::io(&out_path, e))?;
    } else {
        let bytes = stl::write_binary(assembly)?;
        std::fs::write(&out_path, bytes).map_err(|e| CoreError::io(&out_path, e))?;
    }
    println!("built {}:", out_path.display());
    println!("{}", out.summary());
    Ok(0)
}

/// Loads the assembly a report-style command works on. Recipes build
/// unscaled; STL files are split into connected components so each solid
/// can be parity-tested on its own.
fn load_source(source: &Source) -> Result<Assembly, CoreError> {
    if let Some(config_path) = &source.config {
        let (config, base_dir) = PipelineConfig::load(config_path)?;
        let out = build_assembly(&config, &base_dir, ExecMode::default())?;
        return Ok(out.unscaled);
    }
    let stl_path = source.stl.as_ref().expect("clap enforces one source");
    let bytes = std::fs::read(stl_path).map_err(|e| CoreError::io(stl_path, e))?;
    let doc = stl::read(&bytes)?;
    let mesh = doc.to_mesh()?;
    let shells = split_components(&mesh)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (format!("component_{i}"), m))
        .collect();
    assemble(&doc.name, shells)
}

fn cmd_volume_report(
    source: &Source,
    breaks: &[f64],
    slices: usize,
    format: &str,
) -> Result<u8, CoreError> {
    if format != "text" && format != "kv" {
        return Err(CoreError::invalid("format", "expected `text` or `kv`"));
    }
    let assembly = load_source(source)?;
    let profile = volume_profile(&assembly, slices)?;
    let mut sorted_breaks = breaks.to_vec();
    sorted_breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breaks"));
    let fractions = filament_breaks(&profile, &sorted_breaks)?;
    let report = if format == "kv" {
        report_kv(&assembly, &profile, &sorted_breaks, &fractions)
    } else {
        report_text(&assembly, &profile, &sorted_breaks, &fractions)
    };
    // tolerate a closed pipe (`... | head`)
    use std::io::Write as _;
    let _ = std::io::stdout().write_all(report.as_bytes());
    Ok(0)
}

fn report_text(
    assembly: &Assembly,
    profile: &VolumeProfile,
    breaks: &[f64],
    fractions: &[f64],
) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "volume report for {} (volume basis)", assembly.name());
    for shell in assembly.shells() {
        let _ = writeln!(
            out,
            "  shell {:<16} {:>9} triangles  volume {:.3}",
            shell.name,
            shell.mesh.triangle_count(),
            shell_volume(&shell.mesh)
        );
    }
    let _ = writeln!(out, "  union volume {:.3}", profile.total_volume());
    let _ = writeln!(out, "  cumulative fraction by height:");
    for (z, f) in profile
        .z_samples()
        .iter()
        .zip(profile.cumulative_fraction())
    {
        let _ = writeln!(out, "    z {z:>10.4}  fraction {f:.4}");
    }
    if !breaks.is_empty() {
        let _ = writeln!(out, "  filament breaks:");
        for (z, f) in breaks.iter().zip(fractions) {
            let _ = writeln!(out, "    z {z:>10.4}  fraction {f:.4}  ({:.1}%)", f * 100.0);
        }
    }
    out
}

fn report_kv(
    assembly: &Assembly,
    profile: &VolumeProfile,
    breaks: &[f64],
    fractions: &[f64],
) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "name={}", assembly.name());
    let _ = writeln!(out, "basis=volume");
    for shell in assembly.shells() {
        let _ = writeln!(
            out,
            "shell.{}.triangles={}",
            shell.name,
            shell.mesh.triangle_count()
        );
        let _ = writeln!(out, "shell.{}.volume={}", shell.name, shell_volume(&shell.mesh));
    }
    let _ = writeln!(out, "union_volume={}", profile.total_volume());
    for (i, (z, f)) in profile
        .z_samples()
        .iter()
        .zip(profile.cumulative_fraction())
        .enumerate()
    {
        let _ = writeln!(out, "profile.{i}.z={z}");
        let _ = writeln!(out, "profile.{i}.fraction={f}");
    }
    for (i, (z, f)) in breaks.iter().zip(fractions).enumerate() {
        let _ = writeln!(out, "break.{i}.z={z}");
        let _ = writeln!(out, "break.{i}.fraction={f}");
    }
    out
}

fn cmd_preview(
    source: &Source,
    frames: usize,
    size: &str,
    out_dir: &Path,
    overwrite: bool,
) -> Result<u8, CoreError> {
    let size = parse_size(size)?;
    let assembly = load_source(source)?;
    let palette = HeightBandPalette::pendant();
    std::fs::create_dir_all(out_dir).map_err(|e| CoreError::io(out_dir, e))?;
    let topdown = render_topdown(&assembly, &palette, size)?;
    let topdown_path = out_dir.join("topdown.ppm");
    write_image_file(&topdown_path, &topdown, overwrite)?;
    let images = render_turntable(&assembly, frames, size)?;
    let paths = save_frames(out_dir, &images, overwrite)?;
    println!(
        "wrote {} and {} turntable frames to {}",
        topdown_path.display(),
        paths.len(),
        out_dir.display()
    );
    Ok(0)
}

fn cmd_validate(path: &Path) -> Result<u8, CoreError> {
    let bytes = std::fs::read(path).map_err(|e| CoreError::io(path, e))?;
    let doc = stl::read(&bytes)?;
    if doc.triangles.is_empty() {
        println!("{}: empty STL (0 triangles)", path.display());
        return Ok(0);
    }
    let mesh = doc.to_mesh()?;
    let report = validate(&mesh);
    println!("{}: {}", path.display(), report.summary());
    if report.watertight && report.oriented {
        Ok(0)
    } else {
        Ok(EXIT_VALIDATION)
    }
}

fn cmd_parse_check(config_path: &Path) -> Result<u8, CoreError> {
    let (config, base_dir) = PipelineConfig::load(config_path)?;
    if let Some(clip) = &config.clip {
        let tree = region::parse(clip)?;
        println!("clip: {}", tree.pretty_print());
    }
    for layer in &config.layers {
        use reliefcast_core::config::LayerSpec;
        match layer {
            LayerSpec::Heightfield {
                name,
                image,
                steps,
                default_height,
                clip,
                ..
            } => {
                reliefcast_core::heightfield::StepFunction::new(steps.clone(), *default_height)
                    .map_err(|e| CoreError::config_in_layer(name, e.to_string()))?;
                if let Some(c) = clip {
                    region::parse(c)
                        .map_err(|e| CoreError::config_in_layer(name, e.to_string()))?;
                }
                let path = base_dir.join(image);
                if !path.exists() {
                    return Err(CoreError::config_in_layer(
                        name,
                        format!("image {} does not exist", path.display()),
                    ));
                }
                println!("layer {name}: heightfield, {} bands", steps.len());
            }
            LayerSpec::Extrusion {
                name, region: r, ..
            } => {
                if let Some(r) = r {
                    let tree = region::parse(r)
                        .map_err(|e| CoreError::config_in_layer(name, e.to_string()))?;
                    println!("layer {name}: extrusion of {}", tree.pretty_print());
                } else {
                    println!("layer {name}: extrusion of global clip");
                }
            }
        }
    }
    println!("ok: {} layers", config.layers.len());
    Ok(0)
}

fn parse_size(text: &str) -> Result<(usize, usize), CoreError> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| CoreError::invalid("size", format!("{text:?} is not WxH")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CoreError::invalid("size", format!("bad dimension {s:?}")))
    };
    Ok((parse(w)?, parse(h)?))
}
