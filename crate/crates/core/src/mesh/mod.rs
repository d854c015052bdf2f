//! Triangle shells and assemblies.
//!
//! Shells produced by this module are closed, consistently oriented
//! (counter-clockwise seen from outside, positive signed volume), and
//! deduplicate vertices by exact bit pattern so downstream topology
//! checks can work on indices alone. An assembly is an ordered list of
//! shells; shells may interpenetrate and are never booleaned together.

mod extrude;
mod relief;

pub use extrude::{extrude_region, extrude_region_with};
pub use relief::{heightfield_to_solid, heightfield_to_solid_with};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::metrics;

/// Indexed triangle mesh. Triangles are vertex-index triples wound
/// counter-clockwise viewed from outside the solid.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len();
        for t in &triangles {
            if t.iter().any(|&i| i as usize >= n) {
                return Err(Error::invalid(
                    "mesh",
                    format!("triangle {t:?} references a vertex out of range 0..{n}"),
                ));
            }
        }
        Ok(TriangleMesh {
            vertices,
            triangles,
        })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Corner positions of triangle `i`.
    pub fn triangle_points(&self, i: usize) -> [[f64; 3]; 3] {
        let [a, b, c] = self.triangles[i];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Axis-aligned bounds, or `None` for a mesh with no vertices.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let mut it = self.vertices.iter();
        let first = *it.next()?;
        let mut lo = first;
        let mut hi = first;
        for v in it {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Some((lo, hi))
    }

    /// Uniformly scales every vertex about the origin.
    pub fn scaled(&self, s: f64) -> TriangleMesh {
        TriangleMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] * s, v[1] * s, v[2] * s])
                .collect(),
            triangles: self.triangles.clone(),
        }
    }
}

/// One named shell of an assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub name: String,
    pub mesh: TriangleMesh,
}

/// Ordered collection of shells. Order is preserved into the exported
/// STL; no boolean union is ever performed, overlapping shells are kept
/// as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    name: String,
    shells: Vec<Shell>,
}

impl Assembly {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    pub fn triangle_count(&self) -> usize {
        self.shells.iter().map(|s| s.mesh.triangle_count()).sum()
    }

    /// Bounds over all shells.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let mut acc: Option<([f64; 3], [f64; 3])> = None;
        for shell in &self.shells {
            if let Some((lo, hi)) = shell.mesh.bounds() {
                acc = Some(match acc {
                    None => (lo, hi),
                    Some((alo, ahi)) => (
                        [alo[0].min(lo[0]), alo[1].min(lo[1]), alo[2].min(lo[2])],
                        [ahi[0].max(hi[0]), ahi[1].max(hi[1]), ahi[2].max(hi[2])],
                    ),
                });
            }
        }
        acc
    }
}

/// Validates shells and collects them, preserving order. Rejects any
/// shell that is not a closed, consistently oriented, positive-volume
/// surface.
pub fn assemble(name: &str, shells: Vec<(String, TriangleMesh)>) -> Result<Assembly> {
    for (shell_name, mesh) in &shells {
        let report = metrics::validate(mesh);
        if !report.watertight || !report.oriented {
            return Err(Error::ShellNotWatertight {
                shell: shell_name.clone(),
                why: report.summary(),
            });
        }
        if report.signed_volume <= 0.0 {
            return Err(Error::ShellNotWatertight {
                shell: shell_name.clone(),
                why: format!("signed volume {} is not positive", report.signed_volume),
            });
        }
    }
    Ok(Assembly {
        name: name.to_string(),
        shells: shells
            .into_iter()
            .map(|(name, mesh)| Shell { name, mesh })
            .collect(),
    })
}

/// Uniformly scales the assembly so its x extent equals `target`
/// (millimeters by convention). Returns the scaled assembly and the
/// factor applied.
pub fn scale_to_diameter(assembly: &Assembly, target: f64) -> Result<(Assembly, f64)> {
    if !target.is_finite() || target <= 0.0 {
        return Err(Error::invalid(
            "target diameter",
            format!("{target} must be finite and > 0"),
        ));
    }
    let (lo, hi) = assembly
        .bounds()
        .ok_or_else(|| Error::EmptySolid("cannot scale an empty assembly".into()))?;
    let extent = hi[0] - lo[0];
    if extent <= 0.0 {
        return Err(Error::invalid(
            "assembly",
            "x extent must be positive to scale to a diameter",
        ));
    }
    let s = target / extent;
    let shells = assembly
        .shells
        .iter()
        .map(|shell| Shell {
            name: shell.name.clone(),
            mesh: shell.mesh.scaled(s),
        })
        .collect();
    Ok((
        Assembly {
            name: assembly.name.clone(),
            shells,
        },
        s,
    ))
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Accumulates a triangle soup into an indexed mesh, deduplicating
/// vertices by exact bit pattern. Insertion order of first occurrence
/// fixes vertex indices, so output is deterministic for a deterministic
/// triangle stream.
#[derive(Default)]
pub(crate) struct MeshBuffer {
    index: HashMap<[u64; 3], u32>,
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
}

impl MeshBuffer {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, p: [f64; 3]) -> u32 {
        // Fold -0.0 into 0.0 so coordinate bits are canonical.
        let p = [clean_zero(p[0]), clean_zero(p[1]), clean_zero(p[2])];
        let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.vertices.len() as u32;
        self.vertices.push(p);
        self.index.insert(key, i);
        i
    }

    pub(crate) fn push(&mut self, a: [f64; 3], b: [f64; 3], c: [f64; 3]) {
        let ia = self.intern(a);
        let ib = self.intern(b);
        let ic = self.intern(c);
        debug_assert!(ia != ib && ib != ic && ia != ic, "degenerate triangle");
        self.triangles.push([ia, ib, ic]);
    }

    /// Pushes a convex quad as two triangles, preserving winding.
    pub(crate) fn push_quad(&mut self, q: [[f64; 3]; 4]) {
        self.push(q[0], q[1], q[2]);
        self.push(q[0], q[2], q[3]);
    }

    pub(crate) fn finish(self, what: &str) -> Result<TriangleMesh> {
        if self.triangles.is_empty() {
            return Err(Error::EmptySolid(what.to_string()));
        }
        Ok(TriangleMesh {
            vertices: self.vertices,
            triangles: self.triangles,
        })
    }
}

fn clean_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Unit cube [0,1]^3 with outward orientation. Used by tests and as a
/// cheap smoke object.
pub fn unit_cube() -> TriangleMesh {
    let mut buf = MeshBuffer::new();
    let p = |x: f64, y: f64, z: f64| [x, y, z];
    // bottom (z=0, normal -z), top (z=1, +z)
    buf.push_quad([p(0., 0., 0.), p(0., 1., 0.), p(1., 1., 0.), p(1., 0., 0.)]);
    buf.push_quad([p(0., 0., 1.), p(1., 0., 1.), p(1., 1., 1.), p(0., 1., 1.)]);
    // y=0 (-y), y=1 (+y)
    buf.push_quad([p(0., 0., 0.), p(1., 0., 0.), p(1., 0., 1.), p(0., 0., 1.)]);
    buf.push_quad([p(0., 1., 0.), p(0., 1., 1.), p(1., 1., 1.), p(1., 1., 0.)]);
    // x=0 (-x), x=1 (+x)
    buf.push_quad([p(0., 0., 0.), p(0., 0., 1.), p(0., 1., 1.), p(0., 1., 0.)]);
    buf.push_quad([p(1., 0., 0.), p(1., 1., 0.), p(1., 1., 1.), p(1., 0., 1.)]);
    buf.finish("unit cube").expect("cube is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_is_a_valid_shell() {
        let cube = unit_cube();
        assert_eq!(cube.triangle_count(), 12);
        assert_eq!(cube.vertices().len(), 8);
        let report = metrics::validate(&cube);
        assert!(report.watertight, "{}", report.summary());
        assert!(report.oriented);
        assert!((report.signed_volume - 1.0).abs() < 1e-12);
        assert_eq!(report.euler_characteristic, 2);
    }

    #[test]
    fn assemble_counts_and_orders() {
        let cube = unit_cube();
        let shifted = cube.clone();
        let a = assemble(
            "pair",
            vec![("a".into(), cube), ("b".into(), shifted)],
        )
        .unwrap();
        assert_eq!(a.shells().len(), 2);
        assert_eq!(a.triangle_count(), 24);
        assert_eq!(a.shells()[0].name, "a");
        let empty = assemble("none", vec![]).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.triangle_count(), 0);
    }

    #[test]
    fn assemble_rejects_open_shells() {
        let cube = unit_cube();
        let open = TriangleMesh::new(
            cube.vertices().to_vec(),
            cube.triangles()[..10].to_vec(),
        )
        .unwrap();
        match assemble("bad", vec![("holey".into(), open)]) {
            Err(Error::ShellNotWatertight { shell, .. }) => assert_eq!(shell, "holey"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scale_to_diameter_scales_uniformly() {
        let cube = unit_cube();
        let a = assemble("cube", vec![("c".into(), cube)]).unwrap();
        let (scaled, s) = scale_to_diameter(&a, 25.0).unwrap();
        assert_eq!(s, 25.0);
        let (lo, hi) = scaled.bounds().unwrap();
        assert_eq!(hi[0] - lo[0], 25.0);
        assert_eq!(hi[2] - lo[2], 25.0);
        // target equal to current extent leaves vertices unchanged
        let (same, s1) = scale_to_diameter(&a, 1.0).unwrap();
        assert_eq!(s1, 1.0);
        assert_eq!(same.shells()[0].mesh, a.shells()[0].mesh);
    }

    #[test]
    fn scale_factor_for_the_pendant_extent() {
        // an x extent of 140 scaled to 50 is exactly 5/14
        let s: f64 = 50.0 / 140.0;
        assert!((s - 0.357142857).abs() < 1e-9);
    }

    #[test]
    fn scale_on_empty_assembly_fails() {
        let empty = assemble("none", vec![]).unwrap();
        assert!(scale_to_diameter(&empty, 10.0).is_err());
    }

    #[test]
    fn buffer_dedups_vertices() {
        let mut buf = MeshBuffer::new();
        buf.push([0., 0., 0.], [1., 0., 0.], [0., 1., 0.]);
        buf.push([1., 0., 0.], [1., 1., 0.], [0., 1., 0.]);
        let m = buf.finish("quad").unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.triangle_count(), 2);
    }

    #[test]
    fn negative_zero_is_canonicalized() {
        let mut buf = MeshBuffer::new();
        buf.push([-0.0, 0., 0.], [1., 0., 0.], [0., 1., 0.]);
        buf.push([0.0, 0., 0.], [0., 1., 0.], [-1., 0., 0.]);
        let m = buf.finish("fan").unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.vertices()[0][0].to_bits(), 0.0f64.to_bits());
    }
}
