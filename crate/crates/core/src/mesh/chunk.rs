use std::collections::HashMap;

use glam::DVec3;

use super::validate::{shape_quality, DEGENERATE_QUALITY};
use super::{MeshConfig, TriMesh};
use crate::texture::TextureSet;

/// Clipped fragments smaller than this are dropped.
const MIN_FRAGMENT_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub index: [u32; 3],
    pub mesh: TriMesh,
    /// Cell box `(lo, hi)`.
    pub bounds: (DVec3, DVec3),
    pub textures: Option<TextureSet>,
}

impl Chunk {
    /// File stem such as `chunk_0_1_0`.
    pub fn name(&self) -> String {
        let [i, j, k] = self.index;
        format!("chunk_{i}_{j}_{k}")
    }
}

/// Division counts actually used: single-layer caves are never split in z,
/// and multi-layer caves get at most one z division per layer.
pub fn effective_grid(grid: [u32; 3], layers: u32) -> [u32; 3] {
    [grid[0].max(1), grid[1].max(1), grid[2].max(1).min(layers.max(1))]
}

type Vertex = (DVec3, DVec3);

/// Slices `mesh` along an `effective_grid` of equal cells over its bounding
/// box. Triangles crossing cell planes are clipped exactly and the pieces
/// fan-triangulated; empty cells yield no chunk. Chunks are ordered by
/// `(k, j, i)` index.
pub fn chunk_mesh(mesh: &TriMesh, config: &MeshConfig, layers: u32) -> Vec<Chunk> {
    let Some((lo, hi)) = mesh.bounds() else {
        return Vec::new();
    };
    let n = effective_grid(config.chunk_grid, layers).map(|d| d as usize);
    let planes: [Vec<f64>; 3] = [0, 1, 2].map(|k| {
        (0..=n[k])
            .map(|i| if i == n[k] { hi[k] } else { lo[k] + (hi[k] - lo[k]) * i as f64 / n[k] as f64 })
            .collect()
    });
    let cell_of = |axis: usize, x: f64| -> usize {
        let p = &planes[axis];
        (1..n[axis]).take_while(|&i| p[i] <= x).count()
    };
    let normals = if mesh.normals.len() == mesh.positions.len() {
        mesh.normals.clone()
    } else {
        let mut m = mesh.clone();
        m.compute_normals();
        m.normals
    };

    let mut builders: HashMap<[usize; 3], Builder> = HashMap::new();
    for tri in &mesh.triangles {
        let corners: Vec<Vertex> = tri
            .iter()
            .map(|&i| (mesh.positions[i as usize], normals[i as usize]))
            .collect();
        let tlo = corners.iter().fold(DVec3::splat(f64::INFINITY), |a, c| a.min(c.0));
        let thi = corners.iter().fold(DVec3::splat(f64::NEG_INFINITY), |a, c| a.max(c.0));
        let range = [0, 1, 2].map(|k| (cell_of(k, tlo[k]), cell_of(k, thi[k])));
        for ck in range[2].0..=range[2].1 {
            for cj in range[1].0..=range[1].1 {
                for ci in range[0].0..=range[0].1 {
                    let cell = [ci, cj, ck];
                    let mut poly = corners.clone();
                    for axis in 0..3 {
                        let (a, b) = (planes[axis][cell[axis]], planes[axis][cell[axis] + 1]);
                        if tlo[axis] < a {
                            poly = clip(&poly, axis, a, true);
                        }
                        if thi[axis] > b {
                            poly = clip(&poly, axis, b, false);
                        }
                    }
                    poly.dedup_by(|x, y| x.0 == y.0);
                    while poly.len() > 1 && poly[0].0 == poly[poly.len() - 1].0 {
                        poly.pop();
                    }
                    if poly.len() < 3 {
                        continue;
                    }
                    // A piece lying in a shared plane belongs to the upper cell.
                    let on_upper_plane = (0..3).any(|axis| {
                        let c = cell[axis];
                        c + 1 < n[axis] && poly.iter().all(|v| v.0[axis] == planes[axis][c + 1])
                    });
                    if on_upper_plane {
                        continue;
                    }
                    builders.entry(cell).or_default().add_polygon(&poly);
                }
            }
        }
    }

    let mut cells: Vec<[usize; 3]> = builders.keys().copied().collect();
    cells.sort_by_key(|c| [c[2], c[1], c[0]]);
    cells
        .into_iter()
        .filter_map(|cell| {
            let b = builders.remove(&cell).unwrap();
            if b.triangles.is_empty() {
                return None;
            }
            let clo = DVec3::new(planes[0][cell[0]], planes[1][cell[1]], planes[2][cell[2]]);
            let chi = DVec3::new(planes[0][cell[0] + 1], planes[1][cell[1] + 1], planes[2][cell[2] + 1]);
            Some(Chunk {
                index: cell.map(|c| c as u32),
                mesh: TriMesh {
                    positions: b.positions,
                    normals: b.normals.into_iter().map(|n| n.try_normalize().unwrap_or(DVec3::Z)).collect(),
                    triangles: b.triangles,
                    uvs: None,
                },
                bounds: (clo, chi),
                textures: None,
            })
        })
        .collect()
}

#[derive(Default)]
struct Builder {
    index: HashMap<[u64; 3], u32>,
    positions: Vec<DVec3>,
    normals: Vec<DVec3>,
    triangles: Vec<[u32; 3]>,
}

impl Builder {
    fn vertex(&mut self, v: &Vertex) -> u32 {
        let key = v.0.to_array().map(f64::to_bits);
        *self.index.entry(key).or_insert_with(|| {
            self.positions.push(v.0);
            self.normals.push(v.1);
            (self.positions.len() - 1) as u32
        })
    }

    fn add_polygon(&mut self, poly: &[Vertex]) {
        for i in 1..poly.len() - 1 {
            let (a, b, c) = (poly[0].0, poly[i].0, poly[i + 1].0);
            if 0.5 * (b - a).cross(c - a).length() < MIN_FRAGMENT_AREA
                || shape_quality(a, b, c) <= DEGENERATE_QUALITY
            {
                continue;
            }
            let t = [self.vertex(&poly[0]), self.vertex(&poly[i]), self.vertex(&poly[i + 1])];
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                self.triangles.push(t);
            }
        }
    }
}

/// One Sutherland-Hodgman pass keeping `x[axis] >= s` (`keep_above`) or
/// `x[axis] <= s`.
fn clip(poly: &[Vertex], axis: usize, s: f64, keep_above: bool) -> Vec<Vertex> {
    let inside = |v: &Vertex| if keep_above { v.0[axis] >= s } else { v.0[axis] <= s };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let (cur, next) = (&poly[i], &poly[(i + 1) % poly.len()]);
        let (ci, ni) = (inside(cur), inside(next));
        if ci {
            out.push(*cur);
        }
        if ci != ni {
            out.push(intersect(cur, next, axis, s));
        }
    }
    out
}

/// Crossing of the segment with the plane, computed from the endpoints in a
/// canonical order so both cells sharing the plane get identical bits.
fn intersect(p: &Vertex, q: &Vertex, axis: usize, s: f64) -> Vertex {
    let key = |v: &Vertex| v.0.to_array();
    let (a, b) = if key(p).iter().zip(key(q)).map(|(x, y)| x.total_cmp(&y)).find(|o| o.is_ne())
        == Some(std::cmp::Ordering::Greater)
    {
        (q, p)
    } else {
        (p, q)
    };
    let t = (s - a.0[axis]) / (b.0[axis] - a.0[axis]);
    let mut pos = a.0 + (b.0 - a.0) * t;
    pos[axis] = s;
    (pos, a.1 + (b.1 - a.1) * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphConfig};
    use crate::mesh::fixtures::cube;
    use crate::mesh::skin_graph;

    fn grid(g: [u32; 3]) -> MeshConfig {
        MeshConfig { chunk_grid: g, ..Default::default() }
    }

    #[test]
    fn identity_partition() {
        let c = cube(0.0, 3.0);
        let chunks = chunk_mesh(&c, &grid([1, 1, 1]), 1);
        assert_eq!(chunks.len(), 1);
        let m = &chunks[0].mesh;
        let corners = |m: &TriMesh| (0..m.triangle_count()).map(|t| m.corners(t)).collect::<Vec<_>>();
        assert_eq!(corners(m), corners(&c));
        assert_eq!(chunks[0].bounds, (DVec3::ZERO, DVec3::splat(3.0)));
    }

    #[test]
    fn single_layer_never_splits_z() {
        assert_eq!(effective_grid([2, 2, 2], 1), [2, 2, 1]);
        assert_eq!(effective_grid([2, 2, 4], 3), [2, 2, 3]);
        let chunks = chunk_mesh(&cube(0.0, 1.0), &grid([2, 2, 2]), 1);
        assert_eq!(chunks.len(), 4);
        assert!(chunks.iter().all(|c| c.index[2] == 0));
    }

    #[test]
    fn cube_split_keeps_area_exactly_and_stays_in_bounds() {
        let c = cube(0.0, 1.0);
        let chunks = chunk_mesh(&c, &grid([3, 2, 2]), 2);
        // A unit cube faces every cell of a 3x2x2 grid.
        assert_eq!(chunks.len(), 12);
        let total: f64 = chunks.iter().map(|c| c.mesh.area()).sum();
        assert!((total - 6.0).abs() < 1e-12, "{total}");
        for ch in &chunks {
            let (lo, hi) = ch.bounds;
            for p in &ch.mesh.positions {
                assert!(p.cmpge(lo - 1e-6).all() && p.cmple(hi + 1e-6).all());
            }
        }
    }

    #[test]
    fn cave_area_conserved() {
        for (seed, layers, g) in [(4, 1, [2, 2, 1]), (5, 2, [3, 2, 2])] {
            let gc = GraphConfig { seed, layers, node_count_target: 50, ..Default::default() };
            let graph = generate_graph(&gc).unwrap();
            let mesh = skin_graph(&graph, &MeshConfig::default()).unwrap();
            let chunks = chunk_mesh(&mesh, &grid(g), layers);
            let total: f64 = chunks.iter().map(|c| c.mesh.area()).sum();
            let rel = (total - mesh.area()).abs() / mesh.area();
            assert!(rel < 1e-3, "{rel}");
            assert!(chunks.len() > 1);
        }
    }

    #[test]
    fn shared_plane_vertices_match_bitwise() {
        let gc = GraphConfig { seed: 6, node_count_target: 30, ..Default::default() };
        let graph = generate_graph(&gc).unwrap();
        let mesh = skin_graph(&graph, &MeshConfig::default()).unwrap();
        let chunks = chunk_mesh(&mesh, &grid([2, 1, 1]), 1);
        assert_eq!(chunks.len(), 2);
        let plane = chunks[0].bounds.1.x;
        let on = |c: &Chunk| {
            let mut v: Vec<[u64; 3]> = c
                .mesh
                .positions
                .iter()
                .filter(|p| p.x == plane)
                .map(|p| p.to_array().map(f64::to_bits))
                .collect();
            v.sort_unstable();
            v
        };
        let (a, b) = (on(&chunks[0]), on(&chunks[1]));
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }
}
