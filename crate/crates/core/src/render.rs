//! Static preview rendering: an orthographic top-down map colored by
//! height band, and turntable depth renders of the assembly.
//!
//! Everything is a software rasterizer with deterministic output, so
//! golden images are stable across machines. Images are written as
//! binary PPM (P6).

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::mesh::Assembly;
use crate::raster::{ppm, RasterImage};

/// Background sentinel for pixels no geometry covers.
pub const BACKGROUND: [f64; 3] = [0.125, 0.125, 0.125];

/// Frame count matching the project's standard turntable animation.
pub const DEFAULT_TURNTABLE_FRAMES: usize = 40;

/// Orbit pivot for turntable renders; the pendant is centered on its
/// bounding circle at (0, -10).
pub const TURNTABLE_PIVOT: [f64; 3] = [0.0, -10.0, 0.0];

/// Maps surface height to color: first band with `z <= z_upper` wins,
/// anything above the last band gets the default color.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightBandPalette {
    bands: Vec<(f64, [f64; 3])>,
    default_color: [f64; 3],
}

impl HeightBandPalette {
    pub fn new(bands: Vec<(f64, [f64; 3])>, default_color: [f64; 3]) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for &(z, color) in &bands {
            if !z.is_finite() || z <= prev {
                return Err(Error::invalid(
                    "palette",
                    format!("band heights must be finite and strictly increasing, got {z}"),
                ));
            }
            check_color(color)?;
            prev = z;
        }
        check_color(default_color)?;
        Ok(HeightBandPalette {
            bands,
            default_color,
        })
    }

    pub fn color_at(&self, z: f64) -> [f64; 3] {
        for &(upper, color) in &self.bands {
            if z <= upper {
                return color;
            }
        }
        self.default_color
    }

    /// The pendant coloring: black up to 10, green to 13, pink above.
    pub fn pendant() -> Self {
        HeightBandPalette::new(
            vec![(10.0, [0.0, 0.0, 0.0]), (13.0, [0.0, 0.4, 0.0])],
            [1.0, 0.5, 0.5],
        )
        .expect("static palette is valid")
    }
}

fn check_color(c: [f64; 3]) -> Result<()> {
    if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("palette", format!("color {c:?} out of [0,1]")));
    }
    Ok(())
}

/// Orthographic top-down view: each pixel shows the palette color of the
/// highest surface point above it, or the background sentinel.
pub fn render_topdown(
    assembly: &Assembly,
    palette: &HeightBandPalette,
    size: (usize, usize),
) -> Result<RasterImage> {
    render_topdown_with(assembly, palette, size, ExecMode::default())
}

pub fn render_topdown_with(
    assembly: &Assembly,
    palette: &HeightBandPalette,
    size: (usize, usize),
    mode: ExecMode,
) -> Result<RasterImage> {
    let (w, h) = check_size(size)?;
    let (lo, hi) = assembly
        .bounds()
        .ok_or_else(|| Error::EmptySolid("cannot render an empty assembly".into()))?;
    let ext = [hi[0] - lo[0], hi[1] - lo[1]];
    if ext[0] <= 0.0 || ext[1] <= 0.0 {
        return Err(Error::invalid("assembly", "degenerate xy extent"));
    }
    let scale = (w as f64 / ext[0]).min(h as f64 / ext[1]);
    let ox = (w as f64 - ext[0] * scale) / 2.0;
    let oy = (h as f64 - ext[1] * scale) / 2.0;

    let mut tris = Vec::with_capacity(assembly.triangle_count());
    for shell in assembly.shells() {
        let mesh = &shell.mesh;
        for i in 0..mesh.triangle_count() {
            let pts = mesh.triangle_points(i);
            tris.push(ScreenTriangle {
                p: pts.map(|v| [(v[0] - lo[0]) * scale + ox, (v[1] - lo[1]) * scale + oy]),
                value: pts.map(|v| v[2]),
            });
        }
    }
    let depth = rasterize_max(&tris, w, h, mode);
    let pixels = depth
        .iter()
        .map(|&z| {
            if z == f64::NEG_INFINITY {
                BACKGROUND
            } else {
                palette.color_at(z)
            }
        })
        .collect();
    RasterImage::from_pixels(w, h, pixels)
}

/// All frames of a turntable orbit: frame `j` views the assembly from
/// angle `2 pi j / n_frames` around the y axis through the pivot.
pub fn render_turntable(
    assembly: &Assembly,
    n_frames: usize,
    size: (usize, usize),
) -> Result<Vec<RasterImage>> {
    if n_frames == 0 {
        return Err(Error::invalid("turntable", "need at least one frame"));
    }
    (0..n_frames)
        .map(|j| turntable_frame(assembly, j, n_frames, size))
        .collect()
}

/// One turntable frame; `j` may exceed `n_frames`, the orbit is periodic.
pub fn turntable_frame(
    assembly: &Assembly,
    j: usize,
    n_frames: usize,
    size: (usize, usize),
) -> Result<RasterImage> {
    turntable_frame_with(assembly, j, n_frames, size, ExecMode::default())
}

pub fn turntable_frame_with(
    assembly: &Assembly,
    j: usize,
    n_frames: usize,
    size: (usize, usize),
    mode: ExecMode,
) -> Result<RasterImage> {
    if n_frames == 0 {
        return Err(Error::invalid("turntable", "need at least one frame"));
    }
    let (w, h) = check_size(size)?;
    if assembly.bounds().is_none() {
        return Err(Error::EmptySolid("cannot render an empty assembly".into()));
    }
    let pivot = TURNTABLE_PIVOT;
    let radius = assembly
        .shells()
        .iter()
        .flat_map(|s| s.mesh.vertices())
        .map(|v| crate::mesh::norm(crate::mesh::sub(*v, pivot)))
        .fold(0.0f64, f64::max)
        .max(1e-9);

    let theta = 2.0 * std::f64::consts::PI * ((j % n_frames) as f64) / n_frames as f64;
    // Camera looks at the pivot from direction (sin t, 0, cos t); the
    // view-up follows the image convention of y growing downward.
    let forward = [-theta.sin(), 0.0, -theta.cos()];
    let up_world = [0.0, -1.0, 0.0];
    let right = normalize(crate::mesh::cross(up_world, forward));
    let up = crate::mesh::cross(forward, right);

    let scale = 0.45 * (w.min(h) as f64) / radius;
    let (ox, oy) = (w as f64 / 2.0, h as f64 / 2.0);

    let mut tris = Vec::with_capacity(assembly.triangle_count());
    for shell in assembly.shells() {
        let mesh = &shell.mesh;
        for i in 0..mesh.triangle_count() {
            let pts = mesh.triangle_points(i);
            let cam = pts.map(|v| {
                let d = crate::mesh::sub(v, pivot);
                [
                    crate::mesh::dot(d, right),
                    crate::mesh::dot(d, up),
                    crate::mesh::dot(d, forward),
                ]
            });
            tris.push(ScreenTriangle {
                p: cam.map(|c| [ox + c[0] * scale, oy + c[1] * scale]),
                // keep the nearest surface: maximize -depth
                value: cam.map(|c| -c[2]),
            });
        }
    }
    let buffer = rasterize_max(&tris, w, h, mode);
    let pixels = buffer
        .iter()
        .map(|&v| {
            if v == f64::NEG_INFINITY {
                BACKGROUND
            } else {
                let t = -v; // distance along the view direction
                let b = ((radius - t) / (2.0 * radius)).clamp(0.0, 1.0);
                [b, b, b]
            }
        })
        .collect();
    RasterImage::from_pixels(w, h, pixels)
}

fn check_size(size: (usize, usize)) -> Result<(usize, usize)> {
    let (w, h) = size;
    if w == 0 || h == 0 || w > 1 << 14 || h > 1 << 14 {
        return Err(Error::invalid(
            "image size",
            format!("{w}x{h} out of 1..=16384"),
        ));
    }
    Ok((w, h))
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = crate::mesh::norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

struct ScreenTriangle {
    p: [[f64; 2]; 3],
    value: [f64; 3],
}

/// Per-pixel maximum of barycentrically interpolated vertex values.
/// Untouched pixels stay at negative infinity. Rows are bucketed into
/// chunks so the loop parallelizes without changing results.
fn rasterize_max(tris: &[ScreenTriangle], w: usize, h: usize, mode: ExecMode) -> Vec<f64> {
    const CHUNK: usize = 64;
    let n_chunks = h.div_ceil(CHUNK);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); n_chunks];
    for (i, t) in tris.iter().enumerate() {
        let min_y = t.p.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let max_y = t.p.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        let r0 = ((min_y - 0.5).ceil().max(0.0)) as usize;
        let r1 = (max_y - 0.5).floor();
        if r1 < 0.0 || r0 >= h {
            continue;
        }
        let r1 = (r1 as usize).min(h - 1);
        for chunk in (r0 / CHUNK)..=(r1 / CHUNK) {
            buckets[chunk].push(i as u32);
        }
    }
    let chunks: Vec<Vec<f64>> = exec::map_indexed(mode, n_chunks, |ci| {
        let row0 = ci * CHUNK;
        let rows = CHUNK.min(h - row0);
        let mut buf = vec![f64::NEG_INFINITY; rows * w];
        for &ti in &buckets[ci] {
            let t = &tris[ti as usize];
            let [a, b, c] = t.p;
            let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            if area.abs() < 1e-12 {
                continue;
            }
            let min_x = a[0].min(b[0]).min(c[0]);
            let max_x = a[0].max(b[0]).max(c[0]);
            let min_y = a[1].min(b[1]).min(c[1]);
            let max_y = a[1].max(b[1]).max(c[1]);
            let col0 = ((min_x - 0.5).ceil().max(0.0)) as usize;
            let col1f = (max_x - 0.5).floor();
            if col1f < 0.0 || col0 >= w {
                continue;
            }
            let col1 = (col1f as usize).min(w - 1);
            let r_start = (((min_y - 0.5).ceil().max(0.0)) as usize).max(row0);
            let r_endf = (max_y - 0.5).floor();
            if r_endf < 0.0 {
                continue;
            }
            let r_end = (r_endf as usize).min(row0 + rows - 1);
            for row in r_start..=r_end {
                let py = row as f64 + 0.5;
                for col in col0..=col1 {
                    let px = col as f64 + 0.5;
                    let w0 = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
                    let w1 = (c[0] - b[0]) * (py - b[1]) - (c[1] - b[1]) * (px - b[0]);
                    let w2 = (a[0] - c[0]) * (py - c[1]) - (a[1] - c[1]) * (px - c[0]);
                    let inside = if area > 0.0 {
                        w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0
                    } else {
                        w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0
                    };
                    if !inside {
                        continue;
                    }
                    // barycentric weights opposite each vertex
                    let la = w1 / area;
                    let lb = w2 / area;
                    let lc = w0 / area;
                    let v = la * t.value[0] + lb * t.value[1] + lc * t.value[2];
                    let slot = &mut buf[(row - row0) * w + col];
                    if v > *slot {
                        *slot = v;
                    }
                }
            }
        }
        buf
    });
    let mut out = Vec::with_capacity(w * h);
    for chunk in chunks {
        out.extend(chunk);
    }
    out
}

/// Writes one image as binary PPM, refusing to clobber existing files
/// unless `overwrite` is set.
pub fn write_image_file(path: &Path, image: &RasterImage, overwrite: bool) -> Result<()> {
    if path.exists() && !overwrite {
        return Err(Error::WouldOverwrite(path.to_path_buf()));
    }
    std::fs::write(path, ppm::encode(image)).map_err(|e| Error::io(path, e))
}

/// Writes `frame_NNN.ppm` files under `dir`, returning the paths.
pub fn save_frames(dir: &Path, frames: &[RasterImage], overwrite: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::with_capacity(frames.len());
    for (j, frame) in frames.iter().enumerate() {
        let path = dir.join(format!("frame_{j:03}.ppm"));
        write_image_file(&path, frame, overwrite)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{assemble, unit_cube};

    fn cube_assembly() -> Assembly {
        assemble("cube", vec![("c".into(), unit_cube())]).unwrap()
    }

    #[test]
    fn palette_bands_select_by_height() {
        let p = HeightBandPalette::pendant();
        assert_eq!(p.color_at(5.0), [0.0, 0.0, 0.0]);
        assert_eq!(p.color_at(10.0), [0.0, 0.0, 0.0]);
        assert_eq!(p.color_at(11.0), [0.0, 0.4, 0.0]);
        assert_eq!(p.color_at(13.0), [0.0, 0.4, 0.0]);
        assert_eq!(p.color_at(14.0), [1.0, 0.5, 0.5]);
        assert!(HeightBandPalette::new(vec![(1.0, [0.0; 3]), (1.0, [0.0; 3])], [0.0; 3]).is_err());
    }

    #[test]
    fn topdown_cube_fills_square_with_band_color() {
        let palette =
            HeightBandPalette::new(vec![(2.0, [0.0, 0.4, 0.0])], [1.0, 0.0, 0.0]).unwrap();
        let img = render_topdown(&cube_assembly(), &palette, (32, 32)).unwrap();
        for row in 0..32 {
            for col in 0..32 {
                assert_eq!(img.pixel(row, col), [0.0, 0.4, 0.0], "at {row},{col}");
            }
        }
    }

    #[test]
    fn topdown_letterbox_shows_background() {
        let palette = HeightBandPalette::new(vec![], [0.0, 0.4, 0.0]).unwrap();
        let img = render_topdown(&cube_assembly(), &palette, (64, 32)).unwrap();
        assert_eq!(img.pixel(16, 0), BACKGROUND);
        assert_eq!(img.pixel(16, 63), BACKGROUND);
        assert_eq!(img.pixel(16, 32), [0.0, 0.4, 0.0]);
    }

    #[test]
    fn topdown_is_invariant_under_triangle_order() {
        let cube = unit_cube();
        let mut reversed_triangles = cube.triangles().to_vec();
        reversed_triangles.reverse();
        let reversed =
            crate::mesh::TriangleMesh::new(cube.vertices().to_vec(), reversed_triangles).unwrap();
        let a1 = assemble("a", vec![("c".into(), cube)]).unwrap();
        let a2 = assemble("a", vec![("c".into(), reversed)]).unwrap();
        let palette = HeightBandPalette::pendant();
        let i1 = render_topdown(&a1, &palette, (48, 48)).unwrap();
        let i2 = render_topdown(&a2, &palette, (48, 48)).unwrap();
        assert_eq!(i1, i2);
    }

    #[test]
    fn turntable_is_periodic() {
        let a = cube_assembly();
        let f1 = turntable_frame(&a, 1, 8, (40, 40)).unwrap();
        let f9 = turntable_frame(&a, 9, 8, (40, 40)).unwrap();
        assert_eq!(f1, f9);
        let single = render_turntable(&a, 1, (40, 40)).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn sequential_and_parallel_render_identically() {
        let a = cube_assembly();
        let palette = HeightBandPalette::pendant();
        let seq = render_topdown_with(&a, &palette, (50, 40), ExecMode::Sequential).unwrap();
        let par = render_topdown_with(&a, &palette, (50, 40), ExecMode::Parallel).unwrap();
        assert_eq!(seq, par);
        let fs = turntable_frame_with(&a, 3, 7, (41, 33), ExecMode::Sequential).unwrap();
        let fp = turntable_frame_with(&a, 3, 7, (41, 33), ExecMode::Parallel).unwrap();
        assert_eq!(fs, fp);
    }

    #[test]
    fn frame_files_refuse_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let a = cube_assembly();
        let frames = render_turntable(&a, 2, (16, 16)).unwrap();
        let paths = save_frames(dir.path(), &frames, false).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths[0].ends_with("frame_000.ppm"));
        match save_frames(dir.path(), &frames, false) {
            Err(Error::WouldOverwrite(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
        save_frames(dir.path(), &frames, true).unwrap();
    }

    #[test]
    fn empty_assembly_cannot_render() {
        let empty = assemble("none", vec![]).unwrap();
        assert!(render_topdown(&empty, &HeightBandPalette::pendant(), (8, 8)).is_err());
        assert!(render_turntable(&empty, 2, (8, 8)).is_err());
    }
}
