//! Volume analytics and mesh validation.
//!
//! Shell volume comes from the divergence theorem. Union volume across
//! overlapping shells is voxelized: a voxel counts when its center is
//! inside at least one shell, decided by ray-crossing parity against a
//! per-shell BVH. The ray direction has fixed irrational slopes so it
//! cannot lie in any axis-aligned facet plane; residual edge grazes are
//! resolved by deterministically perturbing the sample point.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::mesh::{cross, dot, norm, sub, Assembly, TriangleMesh};

/// Area below which a triangle counts as degenerate (model units^2).
pub const DEGENERATE_AREA: f64 = 1e-9;

/// Lateral sampling density used by [`volume_profile`]: cells across the
/// larger xy extent.
pub const PROFILE_LATERAL_CELLS: usize = 200;

/// Topology and orientation report for one mesh.
#[derive(Debug, Clone)]
pub struct MeshReport {
    pub watertight: bool,
    pub oriented: bool,
    pub euler_characteristic: i64,
    pub degenerate_count: usize,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
    pub signed_volume: f64,
    pub triangle_count: usize,
    pub vertex_count: usize,
}

impl MeshReport {
    pub fn is_ok(&self) -> bool {
        self.watertight && self.oriented && self.degenerate_count == 0 && self.signed_volume > 0.0
    }

    pub fn summary(&self) -> String {
        format!(
            "watertight={} oriented={} euler={} boundary_edges={} non_manifold_edges={} degenerate={} volume={:.6} triangles={} vertices={}",
            self.watertight,
            self.oriented,
            self.euler_characteristic,
            self.boundary_edges,
            self.non_manifold_edges,
            self.degenerate_count,
            self.signed_volume,
            self.triangle_count,
            self.vertex_count,
        )
    }
}

/// Checks edge-manifoldness (every undirected edge on exactly two
/// triangles), orientation (each such edge traversed once per direction),
/// Euler characteristic, degenerate-triangle count, and signed volume.
pub fn validate(mesh: &TriangleMesh) -> MeshReport {
    let mut edges: HashMap<(u32, u32), (u32, i64)> = HashMap::new();
    let mut referenced: std::collections::HashSet<u32> = std::collections::HashSet::new();
    for tri in mesh.triangles() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            referenced.insert(a);
            let key = (a.min(b), a.max(b));
            let entry = edges.entry(key).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += if a < b { 1 } else { -1 };
        }
    }
    let boundary_edges = edges.values().filter(|(n, _)| *n == 1).count();
    let non_manifold_edges = edges.values().filter(|(n, _)| *n > 2).count();
    let watertight = boundary_edges == 0 && non_manifold_edges == 0 && !edges.is_empty();
    let oriented = watertight && edges.values().all(|(n, d)| *n != 2 || *d == 0);
    let degenerate_count = (0..mesh.triangle_count())
        .filter(|&i| {
            let [a, b, c] = mesh.triangle_points(i);
            triangle_area(a, b, c) <= DEGENERATE_AREA
        })
        .count();
    MeshReport {
        watertight,
        oriented,
        euler_characteristic: referenced.len() as i64 - edges.len() as i64
            + mesh.triangle_count() as i64,
        degenerate_count,
        boundary_edges,
        non_manifold_edges,
        signed_volume: shell_volume(mesh),
        triangle_count: mesh.triangle_count(),
        vertex_count: referenced.len(),
    }
}

/// Signed volume by the divergence theorem: sum of `v0 . (v1 x v2) / 6`.
/// Positive for outward-oriented shells.
pub fn shell_volume(mesh: &TriangleMesh) -> f64 {
    let mut six_v = 0.0;
    for i in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle_points(i);
        six_v += dot(a, cross(b, c));
    }
    six_v / 6.0
}

fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    norm(cross(sub(b, a), sub(c, a))) / 2.0
}

/// Splits a triangle soup into connected components (triangles joined by
/// shared vertex indices). Lets volume reports treat a multi-solid STL
/// file as independent shells for parity testing.
pub fn split_components(mesh: &TriangleMesh) -> Vec<TriangleMesh> {
    let nv = mesh.vertices().len();
    let mut parent: Vec<u32> = (0..nv as u32).collect();
    fn find(parent: &mut [u32], i: u32) -> u32 {
        let mut root = i;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut cur = i;
        while parent[cur as usize] != root {
            let next = parent[cur as usize];
            parent[cur as usize] = root;
            cur = next;
        }
        root
    }
    for tri in mesh.triangles() {
        let a = find(&mut parent, tri[0]);
        let b = find(&mut parent, tri[1]);
        let c = find(&mut parent, tri[2]);
        parent[b as usize] = a;
        parent[c as usize] = a;
    }
    let mut groups: HashMap<u32, Vec<[u32; 3]>> = HashMap::new();
    let mut order: Vec<u32> = Vec::new();
    for tri in mesh.triangles() {
        let root = find(&mut parent, tri[0]);
        let entry = groups.entry(root).or_default();
        if entry.is_empty() {
            order.push(root);
        }
        entry.push(*tri);
    }
    order
        .into_iter()
        .map(|root| {
            let tris = groups.remove(&root).expect("group exists");
            let mut remap: HashMap<u32, u32> = HashMap::new();
            let mut vertices = Vec::new();
            let triangles = tris
                .into_iter()
                .map(|tri| {
                    tri.map(|i| {
                        *remap.entry(i).or_insert_with(|| {
                            vertices.push(mesh.vertices()[i as usize]);
                            (vertices.len() - 1) as u32
                        })
                    })
                })
                .collect();
            TriangleMesh::new(vertices, triangles).expect("remapped indices are in range")
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Ray-parity point-in-shell testing

/// Fixed probe direction with irrational slopes.
fn ray_direction() -> [f64; 3] {
    let d = [2.0_f64.sqrt(), 3.0_f64.sqrt(), 5.0_f64.sqrt()];
    let n = norm(d);
    [d[0] / n, d[1] / n, d[2] / n]
}

/// Fixed jitter direction, linearly independent from the probe ray.
fn jitter_direction() -> [f64; 3] {
    let d = [7.0_f64.sqrt(), -11.0_f64.sqrt(), 13.0_f64.sqrt()];
    let n = norm(d);
    [d[0] / n, d[1] / n, d[2] / n]
}

enum RayHit {
    Miss,
    Cross,
    Ambiguous,
}

struct BvhNode {
    lo: [f64; 3],
    hi: [f64; 3],
    /// Leaf when `count > 0`: triangles `order[start..start+count]`.
    start: u32,
    count: u32,
    /// Internal node children (indices into the node array).
    left: u32,
    right: u32,
}

/// Point-in-mesh oracle for one watertight shell.
pub struct ShellProbe<'a> {
    mesh: &'a TriangleMesh,
    nodes: Vec<BvhNode>,
    order: Vec<u32>,
    eps_t: f64,
}

impl<'a> ShellProbe<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        let n = mesh.triangle_count();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let centroids: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let [a, b, c] = mesh.triangle_points(i);
                [
                    (a[0] + b[0] + c[0]) / 3.0,
                    (a[1] + b[1] + c[1]) / 3.0,
                    (a[2] + b[2] + c[2]) / 3.0,
                ]
            })
            .collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build_bvh(mesh, &centroids, &mut order, 0, n, &mut nodes);
        }
        let eps_t = mesh
            .bounds()
            .map(|(lo, hi)| norm(sub(hi, lo)))
            .unwrap_or(1.0)
            .max(1.0)
            * 1e-12;
        ShellProbe {
            mesh,
            nodes,
            order,
            eps_t,
        }
    }

    /// Ray-crossing parity with deterministic tie-breaking: on an
    /// ambiguous graze the sample point moves by `jitter` along a fixed
    /// direction and the test repeats.
    pub fn contains(&self, point: [f64; 3], jitter: f64) -> bool {
        let dir = ray_direction();
        let jdir = jitter_direction();
        let mut p = point;
        for _ in 0..16 {
            match self.parity(p, dir, false) {
                Some(inside) => return inside,
                None => {
                    p = [p[0] + jitter * jdir[0], p[1] + jitter * jdir[1], p[2] + jitter * jdir[2]];
                }
            }
        }
        self.parity(p, dir, true).unwrap_or(false)
    }

    fn parity(&self, orig: [f64; 3], dir: [f64; 3], force: bool) -> Option<bool> {
        if self.nodes.is_empty() {
            return Some(false);
        }
        let inv = [1.0 / dir[0], 1.0 / dir[1], 1.0 / dir[2]];
        let mut crossings = 0u64;
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !ray_box_hits(orig, inv, node.lo, node.hi) {
                continue;
            }
            if node.count > 0 {
                for k in node.start..node.start + node.count {
                    let tri = self.mesh.triangle_points(self.order[k as usize] as usize);
                    match ray_triangle(orig, dir, tri, self.eps_t) {
                        RayHit::Cross => crossings += 1,
                        RayHit::Ambiguous if !force => return None,
                        _ => {}
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        Some(crossings % 2 == 1)
    }
}

fn build_bvh(
    mesh: &TriangleMesh,
    centroids: &[[f64; 3]],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<BvhNode>,
) -> u32 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &ti in &order[start..end] {
        for p in mesh.triangle_points(ti as usize) {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    let idx = nodes.len() as u32;
    nodes.push(BvhNode {
        lo,
        hi,
        start: 0,
        count: 0,
        left: 0,
        right: 0,
    });
    let n = end - start;
    if n <= 8 {
        nodes[idx as usize].start = start as u32;
        nodes[idx as usize].count = n as u32;
        return idx;
    }
    let mut axis = 0;
    let mut widest = hi[0] - lo[0];
    for k in 1..3 {
        if hi[k] - lo[k] > widest {
            widest = hi[k] - lo[k];
            axis = k;
        }
    }
    let mid = start + n / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a as usize][axis]
            .partial_cmp(&centroids[b as usize][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let left = build_bvh(mesh, centroids, order, start, mid, nodes);
    let right = build_bvh(mesh, centroids, order, mid, end, nodes);
    nodes[idx as usize].left = left;
    nodes[idx as usize].right = right;
    idx
}

fn ray_box_hits(orig: [f64; 3], inv_dir: [f64; 3], lo: [f64; 3], hi: [f64; 3]) -> bool {
    let mut tmin = 0.0f64;
    let mut tmax = f64::INFINITY;
    for k in 0..3 {
        let t1 = (lo[k] - orig[k]) * inv_dir[k];
        let t2 = (hi[k] - orig[k]) * inv_dir[k];
        let (t1, t2) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        tmin = tmin.max(t1);
        tmax = tmax.min(t2);
        if tmin > tmax {
            return false;
        }
    }
    true
}

fn ray_triangle(orig: [f64; 3], dir: [f64; 3], tri: [[f64; 3]; 3], eps_t: f64) -> RayHit {
    const EPS_BARY: f64 = 1e-9;
    let [a, b, c] = tri;
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    let p = cross(dir, e1);
    let det = dot(e2, p);
    let scale = norm(e1) * norm(e2);
    if det.abs() <= 1e-12 * scale.max(1e-300) {
        // Near-parallel: a clean miss unless the origin sits on the plane.
        let n = cross(e1, e2);
        let d = dot(n, sub(orig, a));
        if d.abs() <= 1e-9 * norm(n).max(1e-300) * (1.0 + norm(sub(orig, a))) {
            return RayHit::Ambiguous;
        }
        return RayHit::Miss;
    }
    let t_vec = sub(orig, a);
    let u = dot(t_vec, p) / det;
    let q = cross(t_vec, e2);
    let v = dot(dir, q) / det;
    let t_hit = dot(e1, q) / det;
    let w = 1.0 - u - v;
    let graze = |x: f64| x.abs() <= EPS_BARY;
    if graze(u) || graze(v) || graze(w) || t_hit.abs() <= eps_t {
        return RayHit::Ambiguous;
    }
    if u > 0.0 && v > 0.0 && w > 0.0 && t_hit > 0.0 {
        RayHit::Cross
    } else {
        RayHit::Miss
    }
}

// ---------------------------------------------------------------------------
// Voxelized union volume and profiles

/// Voxelized union volume of an assembly's shells.
///
/// Counts voxels whose center lies inside at least one shell; the error
/// is O(total surface area x voxel size).
pub fn union_volume(assembly: &Assembly, voxel: f64) -> Result<f64> {
    union_volume_with(assembly, voxel, ExecMode::default())
}

pub fn union_volume_with(assembly: &Assembly, voxel: f64, mode: ExecMode) -> Result<f64> {
    if !voxel.is_finite() || voxel <= 0.0 {
        return Err(Error::invalid("voxel size", format!("{voxel} must be > 0")));
    }
    let (lo, hi) = assembly
        .bounds()
        .ok_or_else(|| Error::EmptySolid("union volume of an empty assembly".into()))?;
    let probes: Vec<ShellProbe> = assembly
        .shells()
        .iter()
        .map(|s| ShellProbe::new(&s.mesh))
        .collect();
    let dims = [0, 1, 2].map(|k| (((hi[k] - lo[k]) / voxel).ceil() as usize).max(1));
    let jitter = 1e-7 * voxel;
    let count = exec::sum_indexed(mode, dims[2], |iz| {
        let z = lo[2] + (iz as f64 + 0.5) * voxel;
        let mut slab = 0u64;
        for iy in 0..dims[1] {
            let y = lo[1] + (iy as f64 + 0.5) * voxel;
            for ix in 0..dims[0] {
                let x = lo[0] + (ix as f64 + 0.5) * voxel;
                if probes.iter().any(|p| p.contains([x, y, z], jitter)) {
                    slab += 1;
                }
            }
        }
        slab
    });
    Ok(count as f64 * voxel * voxel * voxel)
}

/// Cumulative printed-volume fraction as a function of height.
#[derive(Debug, Clone)]
pub struct VolumeProfile {
    z_samples: Vec<f64>,
    cumulative_fraction: Vec<f64>,
    total_volume: f64,
}

impl VolumeProfile {
    pub fn z_samples(&self) -> &[f64] {
        &self.z_samples
    }

    pub fn cumulative_fraction(&self) -> &[f64] {
        &self.cumulative_fraction
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn z_min(&self) -> f64 {
        self.z_samples[0]
    }

    pub fn z_max(&self) -> f64 {
        *self.z_samples.last().expect("profile is non-empty")
    }

    /// Linear interpolation of the cumulative fraction at `z`.
    pub fn fraction_at(&self, z: f64) -> Result<f64> {
        if !(self.z_min()..=self.z_max()).contains(&z) {
            return Err(Error::invalid(
                "break height",
                format!("{z} outside [{}, {}]", self.z_min(), self.z_max()),
            ));
        }
        let i = self
            .z_samples
            .partition_point(|&s| s <= z)
            .min(self.z_samples.len() - 1);
        if i == 0 {
            return Ok(self.cumulative_fraction[0]);
        }
        let (z0, z1) = (self.z_samples[i - 1], self.z_samples[i]);
        let (f0, f1) = (self.cumulative_fraction[i - 1], self.cumulative_fraction[i]);
        let t = if z1 > z0 { (z - z0) / (z1 - z0) } else { 0.0 };
        Ok(f0 + (f1 - f0) * t)
    }
}

/// Computes the cumulative union volume below each of `n_slices` + 1
/// evenly spaced heights, normalized to end at exactly 1. Each slab is
/// sampled on a lateral voxel-column grid at its mid-height.
pub fn volume_profile(assembly: &Assembly, n_slices: usize) -> Result<VolumeProfile> {
    volume_profile_with(assembly, n_slices, ExecMode::default())
}

pub fn volume_profile_with(
    assembly: &Assembly,
    n_slices: usize,
    mode: ExecMode,
) -> Result<VolumeProfile> {
    if n_slices < 2 {
        return Err(Error::invalid("slice count", "need at least 2 slices"));
    }
    let (lo, hi) = assembly
        .bounds()
        .ok_or_else(|| Error::EmptySolid("volume profile of an empty assembly".into()))?;
    let lateral = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if lateral <= 0.0 || hi[2] <= lo[2] {
        return Err(Error::invalid("assembly", "degenerate extent"));
    }
    let voxel = lateral / PROFILE_LATERAL_CELLS as f64;
    let nx = (((hi[0] - lo[0]) / voxel).ceil() as usize).max(1);
    let ny = (((hi[1] - lo[1]) / voxel).ceil() as usize).max(1);
    let dz = (hi[2] - lo[2]) / n_slices as f64;
    let probes: Vec<ShellProbe> = assembly
        .shells()
        .iter()
        .map(|s| ShellProbe::new(&s.mesh))
        .collect();
    let jitter = 1e-7 * voxel.min(dz);
    let counts: Vec<u64> = exec::map_indexed(mode, n_slices, |k| {
        let z = lo[2] + (k as f64 + 0.5) * dz;
        let mut slab = 0u64;
        for iy in 0..ny {
            let y = lo[1] + (iy as f64 + 0.5) * voxel;
            for ix in 0..nx {
                let x = lo[0] + (ix as f64 + 0.5) * voxel;
                if probes.iter().any(|p| p.contains([x, y, z], jitter)) {
                    slab += 1;
                }
            }
        }
        slab
    });
    let total_count: u64 = counts.iter().sum();
    if total_count == 0 {
        return Err(Error::EmptySolid(
            "no voxel sample fell inside any shell".into(),
        ));
    }
    let mut z_samples = Vec::with_capacity(n_slices + 1);
    let mut cumulative_fraction = Vec::with_capacity(n_slices + 1);
    let mut acc = 0u64;
    z_samples.push(lo[2]);
    cumulative_fraction.push(0.0);
    for (k, &c) in counts.iter().enumerate() {
        acc += c;
        z_samples.push(if k + 1 == n_slices {
            hi[2]
        } else {
            lo[2] + (k as f64 + 1.0) * dz
        });
        cumulative_fraction.push(acc as f64 / total_count as f64);
    }
    Ok(VolumeProfile {
        z_samples,
        cumulative_fraction,
        total_volume: total_count as f64 * voxel * voxel * dz,
    })
}

/// Cumulative fraction at each break height, ascending.
pub fn filament_breaks(profile: &VolumeProfile, z_breaks: &[f64]) -> Result<Vec<f64>> {
    let mut sorted = z_breaks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    sorted.iter().map(|&z| profile.fraction_at(z)).collect()
}
