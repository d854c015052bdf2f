//! Heightfield-to-solid meshing.
//!
//! Every grid cell (four neighboring samples) becomes a flat-topped
//! column at the maximum of its corner heights; columns get vertical
//! walls at height discontinuities and at the clip boundary, plus a flat
//! bottom at `z_base`. A cell is kept only when all four of its corner
//! samples lie inside the clip region and its column has positive
//! thickness; bright background regions quantized to height zero drop
//! out entirely.
//!
//! Wall quads are split at every global column height so coincident
//! vertical edges from different cell pairs always meet vertex-to-vertex.
//!
//! Checkerboard corners (two diagonal columns solid over some z range,
//! the other two quadrants empty there) would otherwise pinch: four wall
//! quads sharing one vertical edge. Those corners are detected up front
//! and one of the two surface sheets subdivides its wall edges at the
//! interval midpoint, so each sheet carries its own edge pair and the
//! mesh stays edge-manifold while the geometry is unchanged.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::heightfield::HeightField;
use crate::mesh::{MeshBuffer, TriangleMesh};
use crate::region::Region2D;

/// Compass direction of a wall segment leaving a grid corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    North,
    South,
    East,
    West,
}

/// A z interval at a grid corner where diagonal columns pinch.
/// `south_sheet_west` picks which sheet subdivides: the sheet of the
/// solid southern quadrant, {south, west} segments when it is the
/// south-west quadrant, {south, east} when it is the south-east one.
#[derive(Debug, Clone, Copy)]
struct Pinch {
    z1: f64,
    z2: f64,
    south_sheet_west: bool,
}

type PinchMap = HashMap<(usize, usize), Vec<Pinch>>;

fn pinch_midpoint(
    pinches: &PinchMap,
    corner: (usize, usize),
    dir: Dir,
    z_lo: f64,
    z_hi: f64,
) -> Option<f64> {
    let records = pinches.get(&corner)?;
    for p in records {
        if z_lo >= p.z1 && z_hi <= p.z2 {
            let splits = if p.south_sheet_west {
                matches!(dir, Dir::South | Dir::West)
            } else {
                matches!(dir, Dir::South | Dir::East)
            };
            if splits {
                return Some(0.5 * (z_lo + z_hi));
            }
        }
    }
    None
}

/// Wall between two z chains: `mid0`/`mid1` optionally subdivide the
/// vertical sides at `p0`/`p1`. Triangulated as a ladder so every
/// triangle spans both sides.
fn emit_wall(
    tris: &mut Vec<[[f64; 3]; 3]>,
    p0: [f64; 2],
    p1: [f64; 2],
    z_lo: f64,
    z_hi: f64,
    mid0: Option<f64>,
    mid1: Option<f64>,
) {
    let mut left = vec![z_lo];
    left.extend(mid0);
    left.push(z_hi);
    let mut right = vec![z_lo];
    right.extend(mid1);
    right.push(z_hi);
    let v0 = |z: f64| [p0[0], p0[1], z];
    let v1 = |z: f64| [p1[0], p1[1], z];
    let (mut li, mut ri) = (0usize, 0usize);
    while li + 1 < left.len() || ri + 1 < right.len() {
        let advance_right = if ri + 1 >= right.len() {
            false
        } else if li + 1 >= left.len() {
            true
        } else {
            right[ri + 1] <= left[li + 1]
        };
        if advance_right {
            tris.push([v0(left[li]), v1(right[ri]), v1(right[ri + 1])]);
            ri += 1;
        } else {
            tris.push([v0(left[li]), v1(right[ri]), v0(left[li + 1])]);
            li += 1;
        }
    }
}

/// Meshes a heightfield into a closed solid. `clip` of `None` keeps every
/// cell. Requires a world range (see `attach_range`).
pub fn heightfield_to_solid(
    hf: &HeightField,
    clip: Option<&Region2D>,
    z_base: f64,
) -> Result<TriangleMesh> {
    heightfield_to_solid_with(hf, clip, z_base, ExecMode::default())
}

pub fn heightfield_to_solid_with(
    hf: &HeightField,
    clip: Option<&Region2D>,
    z_base: f64,
    mode: ExecMode,
) -> Result<TriangleMesh> {
    let (x0, x1) = hf
        .x_range()
        .ok_or_else(|| Error::invalid("height field", "no world range attached"))?;
    let (y0, y1) = hf.y_range().expect("x and y ranges are attached together");
    if !z_base.is_finite() {
        return Err(Error::invalid("z base", "must be finite"));
    }
    let rows = hf.rows();
    let cols = hf.cols();
    let xs: Vec<f64> = (0..cols)
        .map(|j| crate::heightfield::lerp_grid(x0, x1, j, cols))
        .collect();
    let ys: Vec<f64> = (0..rows)
        .map(|i| crate::heightfield::lerp_grid(y0, y1, i, rows))
        .collect();

    // Sample-level clip mask, then per-cell height and inclusion.
    let inside: Vec<Vec<bool>> = exec::map_indexed(mode, rows, |i| {
        (0..cols)
            .map(|j| clip.is_none_or(|r| r.contains(xs[j], ys[i])))
            .collect()
    });
    let cell_rows = rows - 1;
    let cell_cols = cols - 1;
    let cells: Vec<Vec<Option<f64>>> = exec::map_indexed(mode, cell_rows, |i| {
        (0..cell_cols)
            .map(|j| {
                let corners_in = inside[i][j]
                    && inside[i][j + 1]
                    && inside[i + 1][j]
                    && inside[i + 1][j + 1];
                if !corners_in {
                    return None;
                }
                let h = hf
                    .height_at(i, j)
                    .max(hf.height_at(i, j + 1))
                    .max(hf.height_at(i + 1, j))
                    .max(hf.height_at(i + 1, j + 1));
                (h > 0.0 && h > z_base).then_some(h)
            })
            .collect()
    });

    // Global wall split levels: z_base plus every distinct column height.
    let mut levels: Vec<f64> = cells
        .iter()
        .flatten()
        .flatten()
        .copied()
        .chain(std::iter::once(z_base))
        .collect();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("heights are finite"));
    levels.dedup();

    let cell = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || j < 0 || i as usize >= cell_rows || j as usize >= cell_cols {
            None
        } else {
            cells[i as usize][j as usize]
        }
    };

    // Pinched corners: diagonal columns solid over an interval, the other
    // two quadrants empty there.
    let mut pinches: PinchMap = HashMap::new();
    for r in 1..cell_rows {
        for c in 1..cell_cols {
            let sw = cells[r - 1][c - 1];
            let se = cells[r - 1][c];
            let nw = cells[r][c - 1];
            let ne = cells[r][c];
            let mut breakpoints: Vec<f64> = [sw, se, nw, ne].iter().flatten().copied().collect();
            if breakpoints.is_empty() {
                continue;
            }
            breakpoints.push(z_base);
            breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("heights are finite"));
            breakpoints.dedup();
            for w in breakpoints.windows(2) {
                let (z1, z2) = (w[0], w[1]);
                let solid = |h: Option<f64>| h.is_some_and(|h| h >= z2);
                let record = if solid(sw) && solid(ne) && !solid(se) && !solid(nw) {
                    Some(true)
                } else if solid(se) && solid(nw) && !solid(sw) && !solid(ne) {
                    Some(false)
                } else {
                    None
                };
                if let Some(south_sheet_west) = record {
                    pinches.entry((r, c)).or_default().push(Pinch {
                        z1,
                        z2,
                        south_sheet_west,
                    });
                }
            }
        }
    }

    // Row-major triangle emission; rows are independent.
    fn quad(tris: &mut Vec<[[f64; 3]; 3]>, q: [[f64; 3]; 4]) {
        tris.push([q[0], q[1], q[2]]);
        tris.push([q[0], q[2], q[3]]);
    }
    let row_soups: Vec<Vec<[[f64; 3]; 3]>> = exec::map_indexed(mode, cell_rows, |i| {
        let mut tris: Vec<[[f64; 3]; 3]> = Vec::new();
        for j in 0..cell_cols {
            let Some(h) = cells[i][j] else { continue };
            let (xa, xb) = (xs[j], xs[j + 1]);
            let (ya, yb) = (ys[i], ys[i + 1]);
            // top, counter-clockwise from above
            quad(&mut tris, [[xa, ya, h], [xb, ya, h], [xb, yb, h], [xa, yb, h]]);
            // bottom, counter-clockwise from below
            quad(
                &mut tris,
                [
                    [xa, ya, z_base],
                    [xa, yb, z_base],
                    [xb, yb, z_base],
                    [xb, ya, z_base],
                ],
            );
            // Walls face each neighbor whose column stops lower (or is
            // absent). Edge direction keeps this column on the left, so
            // the quad normal points outward. Corner tuples carry the
            // sample-grid index of each segment endpoint and the
            // direction the segment leaves it, for pinch lookups.
            let ii = i as isize;
            let jj = j as isize;
            type Side = (
                [f64; 2],
                (usize, usize),
                Dir,
                [f64; 2],
                (usize, usize),
                Dir,
                Option<f64>,
            );
            let sides: [Side; 4] = [
                // south: p0 -> p1 runs east
                (
                    [xa, ya],
                    (i, j),
                    Dir::East,
                    [xb, ya],
                    (i, j + 1),
                    Dir::West,
                    cell(ii - 1, jj),
                ),
                // north: runs west
                (
                    [xb, yb],
                    (i + 1, j + 1),
                    Dir::West,
                    [xa, yb],
                    (i + 1, j),
                    Dir::East,
                    cell(ii + 1, jj),
                ),
                // west: runs south
                (
                    [xa, yb],
                    (i + 1, j),
                    Dir::South,
                    [xa, ya],
                    (i, j),
                    Dir::North,
                    cell(ii, jj - 1),
                ),
                // east: runs north
                (
                    [xb, ya],
                    (i, j + 1),
                    Dir::North,
                    [xb, yb],
                    (i + 1, j + 1),
                    Dir::South,
                    cell(ii, jj + 1),
                ),
            ];
            for (p0, c0, d0, p1, c1, d1, neighbor) in sides {
                let wall_bottom = match neighbor {
                    Some(nh) if nh >= h => continue,
                    Some(nh) => nh,
                    None => z_base,
                };
                // Split the wall at intermediate column heights so
                // vertical edges shared with other walls line up.
                let mut z_lo = wall_bottom;
                for &z in levels.iter().filter(|&&z| z > wall_bottom && z <= h) {
                    let mid0 = pinch_midpoint(&pinches, c0, d0, z_lo, z);
                    let mid1 = pinch_midpoint(&pinches, c1, d1, z_lo, z);
                    emit_wall(&mut tris, p0, p1, z_lo, z, mid0, mid1);
                    z_lo = z;
                }
            }
        }
        tris
    });

    let mut buf = MeshBuffer::new();
    for row in row_soups {
        for [a, b, c] in row {
            buf.push(a, b, c);
        }
    }
    buf.finish("height field produced no printable cells")
}
