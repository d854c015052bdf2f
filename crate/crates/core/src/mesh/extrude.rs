//! Region extrusion: polygonize an implicit region by marching squares
//! and sweep it between two z planes.
//!
//! The region predicate is sampled on a square grid over its bounding
//! window; each boundary crossing is then refined by bisection along the
//! grid edge, so contour vertices land on the true region boundary
//! instead of edge midpoints. Caps are triangulated cell by cell (every
//! marching-squares cell polygon is convex because its vertices lie on
//! the cell border in cyclic order), walls are extruded from the contour
//! chords, and crossings are computed once per grid edge so neighboring
//! cells share vertices exactly.
//!
//! Saddle cells are disambiguated by sampling the cell center.

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::mesh::{MeshBuffer, TriangleMesh};
use crate::region::{BoundingBox, Region2D};

/// Bisection iterations per boundary crossing.
const BISECT_ITERS: u32 = 40;
/// Crossings closer to a sample than this fraction of the edge snap onto
/// it exactly. Boundaries that pass right through a sample point (an
/// axis-aligned rect on a matching grid, say) then collapse their
/// zero-area sliver polygons instead of emitting degenerate triangles;
/// the cleanup is symmetric across neighboring cells because crossings
/// are stored once per grid edge.
const SNAP_FRACTION: f64 = 1e-5;

/// Extrudes `region` between `z0` and `z1`, sampling `resolution` points
/// per axis over the region's own bounding box. Unbounded regions need
/// [`extrude_region_with`] and an explicit window.
pub fn extrude_region(
    region: &Region2D,
    z0: f64,
    z1: f64,
    resolution: usize,
) -> Result<TriangleMesh> {
    extrude_region_with(region, z0, z1, resolution, None, ExecMode::default())
}

pub fn extrude_region_with(
    region: &Region2D,
    z0: f64,
    z1: f64,
    resolution: usize,
    window: Option<[f64; 4]>,
    mode: ExecMode,
) -> Result<TriangleMesh> {
    if !z0.is_finite() || !z1.is_finite() || z0 >= z1 {
        return Err(Error::invalid(
            "extrusion",
            format!("z range [{z0}, {z1}] must be finite and increasing"),
        ));
    }
    if resolution < 8 {
        return Err(Error::invalid(
            "extrusion",
            format!("resolution {resolution} must be >= 8"),
        ));
    }
    // The sampling window: explicit, or the region's own bounding box.
    // With an explicit window the region is clipped to it, which keeps
    // the swept solid closed even for unbounded predicates.
    let (wx0, wx1, wy0, wy1, effective);
    let region_ref: &Region2D;
    match window {
        Some([x0, x1, y0, y1]) => {
            effective = region.clone().and(Region2D::rect(x0, x1, y0, y1)?);
            region_ref = &effective;
            (wx0, wx1, wy0, wy1) = (x0, x1, y0, y1);
        }
        None => match region.bounding_box() {
            BoundingBox::Bounded { x0, x1, y0, y1 } => {
                if x0 >= x1 || y0 >= y1 {
                    return Err(Error::EmptySolid(
                        "region bounding box is degenerate".into(),
                    ));
                }
                region_ref = region;
                (wx0, wx1, wy0, wy1) = (x0, x1, y0, y1);
            }
            BoundingBox::Empty => {
                return Err(Error::EmptySolid("region is provably empty".into()))
            }
            BoundingBox::Unbounded => {
                return Err(Error::invalid(
                    "extrusion",
                    "region is unbounded; provide an explicit window",
                ))
            }
        },
    }

    // One extra ring of samples outside the window guarantees the
    // outermost samples are outside the region, closing every contour.
    let dx = (wx1 - wx0) / (resolution - 1) as f64;
    let dy = (wy1 - wy0) / (resolution - 1) as f64;
    let n = resolution + 2;
    let xs: Vec<f64> = (0..n).map(|l| wx0 + (l as f64 - 1.0) * dx).collect();
    let ys: Vec<f64> = (0..n).map(|k| wy0 + (k as f64 - 1.0) * dy).collect();

    let inside: Vec<Vec<bool>> = exec::map_indexed(mode, n, |k| {
        (0..n).map(|l| region_ref.contains(xs[l], ys[k])).collect()
    });

    // Crossing coordinates, one slot per grid edge. `hcross[k][l]` is the
    // x of the boundary on the horizontal edge (k,l)-(k,l+1); `vcross`
    // the y on the vertical edge (k,l)-(k+1,l).
    let hcross: Vec<Vec<Option<f64>>> = exec::map_indexed(mode, n, |k| {
        (0..n - 1)
            .map(|l| {
                (inside[k][l] != inside[k][l + 1]).then(|| {
                    bisect(
                        |x| region_ref.contains(x, ys[k]),
                        xs[l],
                        xs[l + 1],
                        inside[k][l],
                    )
                })
            })
            .collect()
    });
    let vcross: Vec<Vec<Option<f64>>> = exec::map_indexed(mode, n - 1, |k| {
        (0..n)
            .map(|l| {
                (inside[k][l] != inside[k + 1][l]).then(|| {
                    bisect(
                        |y| region_ref.contains(xs[l], y),
                        ys[k],
                        ys[k + 1],
                        inside[k][l],
                    )
                })
            })
            .collect()
    });

    let row_soups: Vec<Vec<[[f64; 3]; 3]>> = exec::map_indexed(mode, n - 1, |k| {
        let mut tris = Vec::new();
        for l in 0..n - 1 {
            let polygons = cell_polygons(
                region_ref, &inside, &hcross, &vcross, &xs, &ys, k, l,
            );
            for poly in &polygons {
                emit_prism(&mut tris, poly, z0, z1);
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
    buf.finish("region produced no interior cells in the sampling window")
}

/// Refines the boundary crossing on a segment whose endpoints disagree.
/// `inside_a` is the predicate value at `a`. Crossings that converge onto
/// an endpoint return that sample coordinate exactly.
fn bisect(contains: impl Fn(f64) -> bool, a: f64, b: f64, inside_a: bool) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if contains(a + (b - a) * mid) == inside_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    if t < SNAP_FRACTION {
        a
    } else if t > 1.0 - SNAP_FRACTION {
        b
    } else {
        a + (b - a) * t
    }
}

/// One polygon of a cell's inside region, counter-clockwise. `points`
/// has consecutive duplicates (from snapped crossings) removed; `chords`
/// keeps the raw contour segments that become walls, zero-length ones
/// already dropped.
struct CellPolygon {
    points: Vec<[f64; 2]>,
    chords: Vec<([f64; 2], [f64; 2])>,
}

impl CellPolygon {
    fn new(raw_points: Vec<[f64; 2]>, raw_chords: Vec<([f64; 2], [f64; 2])>) -> Self {
        let mut points: Vec<[f64; 2]> = Vec::with_capacity(raw_points.len());
        for p in raw_points {
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        while points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        CellPolygon {
            points,
            chords: raw_chords.into_iter().filter(|(u, v)| u != v).collect(),
        }
    }
}

fn cell_polygons(
    region: &Region2D,
    inside: &[Vec<bool>],
    hcross: &[Vec<Option<f64>>],
    vcross: &[Vec<Option<f64>>],
    xs: &[f64],
    ys: &[f64],
    k: usize,
    l: usize,
) -> Vec<CellPolygon> {
    #[derive(Clone, Copy)]
    enum Node {
        Corner([f64; 2], bool),
        Crossing([f64; 2]),
    }

    let corners = [
        ([xs[l], ys[k]], inside[k][l]),
        ([xs[l + 1], ys[k]], inside[k][l + 1]),
        ([xs[l + 1], ys[k + 1]], inside[k + 1][l + 1]),
        ([xs[l], ys[k + 1]], inside[k + 1][l]),
    ];
    let edge_cross = [
        hcross[k][l].map(|x| [x, ys[k]]),          // bottom: A -> B
        vcross[k][l + 1].map(|y| [xs[l + 1], y]),  // right:  B -> C
        hcross[k + 1][l].map(|x| [x, ys[k + 1]]),  // top:    C -> D
        vcross[k][l].map(|y| [xs[l], y]),          // left:   D -> A
    ];

    let mut cycle: Vec<Node> = Vec::with_capacity(8);
    for side in 0..4 {
        cycle.push(Node::Corner(corners[side].0, corners[side].1));
        if let Some(p) = edge_cross[side] {
            cycle.push(Node::Crossing(p));
        }
    }
    let crossing_slots: Vec<usize> = cycle
        .iter()
        .enumerate()
        .filter_map(|(i, n)| matches!(n, Node::Crossing(_)).then_some(i))
        .collect();

    if crossing_slots.is_empty() {
        if corners.iter().all(|&(_, inside)| inside) {
            return vec![CellPolygon::new(
                corners.iter().map(|&(p, _)| p).collect(),
                vec![],
            )];
        }
        return vec![];
    }

    // Arcs of corners between consecutive crossings, walked cyclically.
    struct Arc {
        entry: [f64; 2],
        corners: Vec<[f64; 2]>,
        exit: [f64; 2],
        inside: bool,
    }
    let len = cycle.len();
    let mut arcs = Vec::with_capacity(crossing_slots.len());
    for (a, &slot) in crossing_slots.iter().enumerate() {
        let next_slot = crossing_slots[(a + 1) % crossing_slots.len()];
        let entry = match cycle[slot] {
            Node::Crossing(p) => p,
            _ => unreachable!(),
        };
        let exit = match cycle[next_slot] {
            Node::Crossing(p) => p,
            _ => unreachable!(),
        };
        let mut pts = Vec::new();
        let mut arc_inside = None;
        let mut i = (slot + 1) % len;
        while i != next_slot {
            if let Node::Corner(p, is_in) = cycle[i] {
                debug_assert!(arc_inside.is_none() || arc_inside == Some(is_in));
                arc_inside = Some(is_in);
                pts.push(p);
            }
            i = (i + 1) % len;
        }
        arcs.push(Arc {
            entry,
            corners: pts,
            exit,
            inside: arc_inside.expect("an arc always spans at least one corner"),
        });
    }
    let inside_arcs: Vec<&Arc> = arcs.iter().filter(|a| a.inside).collect();

    let arc_polygon = |arc: &Arc| {
        let mut points = vec![arc.entry];
        points.extend_from_slice(&arc.corners);
        points.push(arc.exit);
        CellPolygon::new(points, vec![(arc.exit, arc.entry)])
    };

    match inside_arcs.len() {
        1 => vec![arc_polygon(inside_arcs[0])],
        2 => {
            // Saddle: both diagonal corners inside. The cell center
            // decides whether the two arcs join into one band.
            let center_x = 0.5 * (xs[l] + xs[l + 1]);
            let center_y = 0.5 * (ys[k] + ys[k + 1]);
            if region.contains(center_x, center_y) {
                let (a, b) = (inside_arcs[0], inside_arcs[1]);
                let mut points = vec![a.entry];
                points.extend_from_slice(&a.corners);
                points.push(a.exit);
                points.push(b.entry);
                points.extend_from_slice(&b.corners);
                points.push(b.exit);
                vec![CellPolygon::new(
                    points,
                    vec![(a.exit, b.entry), (b.exit, a.entry)],
                )]
            } else {
                inside_arcs.iter().map(|arc| arc_polygon(arc)).collect()
            }
        }
        0 => vec![],
        n => unreachable!("{n} inside arcs in one cell"),
    }
}

/// Caps at both z planes plus a wall quad per contour chord. A polygon
/// collapsed below three distinct points contributes walls only.
fn emit_prism(tris: &mut Vec<[[f64; 3]; 3]>, poly: &CellPolygon, z0: f64, z1: f64) {
    let pts = &poly.points;
    if pts.len() >= 3 {
        let p0 = pts[0];
        for w in pts[1..].windows(2) {
            let (a, b) = (w[0], w[1]);
            // top cap keeps the counter-clockwise winding, bottom reverses it
            tris.push([[p0[0], p0[1], z1], [a[0], a[1], z1], [b[0], b[1], z1]]);
            tris.push([[p0[0], p0[1], z0], [b[0], b[1], z0], [a[0], a[1], z0]]);
        }
    }
    for &(u, v) in &poly.chords {
        // interior is left of u->v, so this winding faces outward
        tris.push([[u[0], u[1], z0], [v[0], v[1], z0], [v[0], v[1], z1]]);
        tris.push([[u[0], u[1], z0], [v[0], v[1], z1], [u[0], u[1], z1]]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    #[test]
    fn disk_prism_volume_matches_cylinder() {
        let disk = Region2D::disk(0.0, 0.0, 10.0).unwrap();
        let mesh = extrude_region(&disk, 5.0, 8.0, 96).unwrap();
        let report = metrics::validate(&mesh);
        assert!(report.is_ok(), "{}", report.summary());
        assert_eq!(report.euler_characteristic, 2);
        let expect = std::f64::consts::PI * 100.0 * 3.0;
        let got = report.signed_volume;
        assert!(
            (got - expect).abs() <= 0.01 * expect,
            "volume {got} vs {expect}"
        );
        let (lo, hi) = mesh.bounds().unwrap();
        assert_eq!(lo[2], 5.0);
        assert_eq!(hi[2], 8.0);
    }

    #[test]
    fn annulus_prism_is_genus_one() {
        let region = Region2D::disk(0.0, 0.0, 10.0)
            .unwrap()
            .and(Region2D::closed_disk(0.0, 0.0, 4.0).unwrap().not());
        let mesh = extrude_region(&region, 0.0, 2.0, 128).unwrap();
        let report = metrics::validate(&mesh);
        assert!(report.watertight && report.oriented, "{}", report.summary());
        assert_eq!(report.euler_characteristic, 0);
        let expect = std::f64::consts::PI * (100.0 - 16.0) * 2.0;
        assert!(
            (report.signed_volume - expect).abs() <= 0.01 * expect,
            "volume {} vs {expect}",
            report.signed_volume
        );
    }

    #[test]
    fn offset_hole_annulus_volume() {
        let region = Region2D::disk(0.0, -10.0, 70.0)
            .unwrap()
            .and(Region2D::closed_disk(0.0, -64.0, 7.0).unwrap().not());
        let mesh = extrude_region(&region, 5.0, 8.0, 128).unwrap();
        let expect = std::f64::consts::PI * (4900.0 - 49.0) * 3.0;
        let got = metrics::shell_volume(&mesh);
        assert!(
            (got - expect).abs() <= 0.01 * expect,
            "volume {got} vs {expect}"
        );
    }

    #[test]
    fn unbounded_region_needs_a_window() {
        let half = Region2D::halfplane(1.0, 0.0, 0.0).unwrap();
        assert!(extrude_region(&half, 0.0, 1.0, 32).is_err());
        let mesh = extrude_region_with(
            &half,
            0.0,
            1.0,
            64,
            Some([-2.0, 2.0, -1.0, 1.0]),
            ExecMode::default(),
        )
        .unwrap();
        let report = metrics::validate(&mesh);
        assert!(report.is_ok(), "{}", report.summary());
        // left half of the 4x2 window, thickness 1
        assert!((report.signed_volume - 4.0).abs() <= 0.05);
    }

    #[test]
    fn empty_region_is_an_error() {
        let disjoint = Region2D::disk(0.0, 0.0, 1.0)
            .unwrap()
            .and(Region2D::disk(10.0, 0.0, 1.0).unwrap());
        match extrude_region(&disjoint, 0.0, 1.0, 32) {
            Err(Error::EmptySolid(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
        // bounded window, but nothing inside
        let nothing = Region2D::disk(100.0, 100.0, 1.0)
            .unwrap()
            .and(Region2D::rect(0.0, 1.0, 0.0, 1.0).unwrap());
        match extrude_region(&nothing, 0.0, 1.0, 32) {
            Err(Error::EmptySolid(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parameter_validation() {
        let disk = Region2D::disk(0.0, 0.0, 1.0).unwrap();
        assert!(extrude_region(&disk, 1.0, 1.0, 32).is_err());
        assert!(extrude_region(&disk, 2.0, 1.0, 32).is_err());
        assert!(extrude_region(&disk, 0.0, 1.0, 7).is_err());
    }

    #[test]
    fn rect_region_is_exact() {
        let rect = Region2D::rect(0.0, 2.0, 0.0, 3.0).unwrap();
        let mesh = extrude_region(&rect, 0.0, 1.0, 32).unwrap();
        let report = metrics::validate(&mesh);
        assert!(report.is_ok(), "{}", report.summary());
        // boundary bisection converges to the rect edges
        assert!((report.signed_volume - 6.0).abs() < 1e-6);
    }

    #[test]
    fn saddle_cells_stay_watertight() {
        // Two disks joined at a thin waist produce saddle configurations
        // at moderate resolutions.
        let region = Region2D::disk(-1.0, 0.0, 1.05)
            .unwrap()
            .or(Region2D::disk(1.0, 0.0, 1.05).unwrap());
        for res in [16usize, 33, 51] {
            let mesh = extrude_region(&region, 0.0, 0.5, res).unwrap();
            let report = metrics::validate(&mesh);
            assert!(report.is_ok(), "res {res}: {}", report.summary());
        }
    }

    #[test]
    fn volume_error_shrinks_with_resolution() {
        let disk = Region2D::disk(0.0, 0.0, 10.0).unwrap();
        let expect = std::f64::consts::PI * 100.0;
        let errs: Vec<f64> = [24usize, 48, 96]
            .iter()
            .map(|&res| {
                let mesh = extrude_region(&disk, 0.0, 1.0, res).unwrap();
                (metrics::shell_volume(&mesh) - expect).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "errors {errs:?}");
    }

    #[test]
    fn sequential_and_parallel_agree_exactly() {
        let region = Region2D::disk(0.0, -10.0, 70.0)
            .unwrap()
            .and(Region2D::cheby_band(1.0, 2.8, 55.0).unwrap());
        let seq = extrude_region_with(&region, 0.0, 6.0, 64, None, ExecMode::Sequential).unwrap();
        let par = extrude_region_with(&region, 0.0, 6.0, 64, None, ExecMode::Parallel).unwrap();
        assert_eq!(seq, par);
    }
}
