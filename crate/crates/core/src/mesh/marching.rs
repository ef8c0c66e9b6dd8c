use std::collections::HashMap;

use glam::DVec3;
use rayon::prelude::*;

use super::mc_table::{edge_axis, table, CORNERS, EDGES};
use super::sdf::CapsuleField;
use super::{MeshConfig, TriMesh};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Cells per z-slab processed as one parallel work item.
const SLAB_CELLS: usize = 8;
/// Edge crossings are kept this far from grid points.
const T_CLAMP: f64 = 1e-3;

/// Regular sample lattice: `dims` points per axis spaced `voxel` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: DVec3,
    pub voxel: f64,
    pub dims: [usize; 3],
}

impl GridSpec {
    /// Lattice covering `[lo, hi]` with at least `pad` to spare on each side.
    pub fn covering(lo: DVec3, hi: DVec3, pad: f64, voxel: f64) -> Self {
        let origin = lo - DVec3::splat(pad);
        let extent = hi - lo + DVec3::splat(2.0 * pad);
        let dims = [0, 1, 2].map(|k| (extent[k] / voxel).ceil() as usize + 1);
        Self { origin, voxel, dims }
    }

    pub fn cell_count(&self) -> u64 {
        self.dims.iter().map(|&d| d.saturating_sub(1) as u64).product()
    }

    #[inline]
    pub fn point(&self, x: usize, y: usize, z: usize) -> DVec3 {
        self.origin + DVec3::new(x as f64, y as f64, z as f64) * self.voxel
    }
}

/// Polygonizes the tunnel skin of `graph`.
///
/// The lattice covers the node bounds inflated by the largest scaled radius
/// plus two voxels, so the border samples are all outside and the result is
/// closed.
pub fn skin_graph(graph: &Graph, config: &MeshConfig) -> Result<TriMesh> {
    if graph.is_empty() {
        return Err(Error::Contract("cannot skin an empty graph".into()));
    }
    config.validate()?;
    let voxel = config.voxel_size;
    let (lo, hi) = graph.bounds();
    let pad = graph.max_radius() * config.radius_scale + 2.0 * voxel;
    let grid = GridSpec::covering(lo, hi, pad, voxel);
    let cells = grid.cell_count();
    if cells > config.max_grid_cells {
        return Err(Error::ResourceLimit(format!(
            "marching-cubes grid {}x{}x{} has {cells} cells, over the budget of {} (mesh.max_grid_cells)",
            grid.dims[0] - 1,
            grid.dims[1] - 1,
            grid.dims[2] - 1,
            config.max_grid_cells
        )));
    }
    // Crossing edges have endpoint values well inside the margin, so the
    // clamped field reproduces the exact crossings.
    let field = CapsuleField::new(graph, config.radius_scale, 4.0 * voxel);
    let mesh = polygonize(&|p| field.eval(p), &grid);
    if mesh.is_empty() {
        return Err(Error::Contract("skin produced no surface; radii too small for the voxel size".into()));
    }
    Ok(mesh)
}

/// Marching cubes over the `< 0` region of `f`.
///
/// Slabs run in parallel and are merged in slab order. Vertices are keyed by
/// lattice edge and interpolated from the lower to the upper endpoint, so a
/// crossing shared by two slabs is computed identically in both.
pub fn polygonize(f: &(dyn Fn(DVec3) -> f64 + Sync), grid: &GridSpec) -> TriMesh {
    let [nx, ny, nz] = grid.dims;
    if nx < 2 || ny < 2 || nz < 2 {
        return TriMesh::default();
    }
    let slabs = (nz - 1).div_ceil(SLAB_CELLS);
    let parts: Vec<SlabOutput> = (0..slabs)
        .into_par_iter()
        .map(|s| {
            let z0 = s * SLAB_CELLS;
            let z1 = ((s + 1) * SLAB_CELLS).min(nz - 1);
            march_slab(f, grid, z0, z1)
        })
        .collect();

    let mut index: HashMap<u64, u32> = HashMap::new();
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for part in parts {
        for tri in &part.triangles {
            triangles.push(tri.map(|key| {
                *index.entry(key).or_insert_with(|| {
                    positions.push(part.vertices[&key]);
                    (positions.len() - 1) as u32
                })
            }));
        }
    }
    TriMesh::new(positions, triangles)
}

struct SlabOutput {
    triangles: Vec<[u64; 3]>,
    vertices: HashMap<u64, DVec3>,
}

fn march_slab(f: &(dyn Fn(DVec3) -> f64 + Sync), grid: &GridSpec, z0: usize, z1: usize) -> SlabOutput {
    let [nx, ny, _] = grid.dims;
    let layer = nx * ny;
    let mut values = Vec::with_capacity(layer * (z1 - z0 + 1));
    for z in z0..=z1 {
        for y in 0..ny {
            for x in 0..nx {
                values.push(f(grid.point(x, y, z)));
            }
        }
    }
    let value = |x: usize, y: usize, z: usize| values[x + nx * (y + ny * (z - z0))];
    let cases = table();
    let mut out = SlabOutput {
        triangles: Vec::new(),
        vertices: HashMap::new(),
    };
    for z in z0..z1 {
        for y in 0..ny - 1 {
            for x in 0..nx - 1 {
                let mut case = 0usize;
                let mut corner = [0.0; 8];
                for (c, o) in CORNERS.iter().enumerate() {
                    let v = value(x + o[0] as usize, y + o[1] as usize, z + o[2] as usize);
                    corner[c] = v;
                    if v < 0.0 {
                        case |= 1 << c;
                    }
                }
                let tris = &cases[case];
                if tris.is_empty() {
                    continue;
                }
                let mut keys = [0u64; 12];
                for t in tris {
                    for &e in t {
                        let e = e as usize;
                        if keys[e] != 0 {
                            continue;
                        }
                        let [a, b] = EDGES[e];
                        let o = CORNERS[a as usize];
                        let (px, py, pz) = (x + o[0] as usize, y + o[1] as usize, z + o[2] as usize);
                        let axis = edge_axis(e);
                        let key = ((px + nx * (py + ny * pz)) as u64) * 3 + axis as u64 + 1;
                        keys[e] = key;
                        out.vertices.entry(key).or_insert_with(|| {
                            let (va, vb) = (corner[a as usize], corner[b as usize]);
                            let t = (va / (va - vb)).clamp(T_CLAMP, 1.0 - T_CLAMP);
                            let p0 = grid.point(px, py, pz);
                            let mut p = p0;
                            p[axis] = p0[axis] + t * grid.voxel;
                            p
                        });
                    }
                    out.triangles.push(t.map(|e| keys[e as usize]));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphConfig};
    use crate::mesh::sdf::sdf_eval;
    use crate::mesh::sdf::tests::capsule_graph;
    use crate::mesh::validate_mesh;

    fn capsule() -> Graph {
        capsule_graph(DVec3::ZERO, 6.0, DVec3::new(14.0, 3.0, 2.0), 4.0)
    }

    fn config(voxel: f64) -> MeshConfig {
        MeshConfig {
            voxel_size: voxel,
            ..Default::default()
        }
    }

    #[test]
    fn capsule_is_closed_sphere_topology() {
        let g = capsule();
        let m = skin_graph(&g, &config(0.4)).unwrap();
        let r = validate_mesh(&m);
        assert!(r.is_closed_manifold(), "{r:?}");
        assert_eq!(r.euler_characteristic, 2);
        assert_eq!(r.components, 1);
        assert_eq!(r.degenerate_triangles, 0);
        assert!(m.volume() > 0.0);
    }

    #[test]
    fn vertices_lie_near_the_surface() {
        let g = capsule();
        let voxel = 0.4;
        let m = skin_graph(&g, &config(voxel)).unwrap();
        let worst = m
            .positions
            .iter()
            .map(|p| sdf_eval(&g, 0.5, *p).abs())
            .fold(0.0, f64::max);
        assert!(worst <= voxel * 3f64.sqrt(), "{worst}");
    }

    #[test]
    fn halving_voxel_quadruples_vertices() {
        let g = capsule();
        let coarse = skin_graph(&g, &config(0.5)).unwrap().vertex_count() as f64;
        let fine = skin_graph(&g, &config(0.25)).unwrap().vertex_count() as f64;
        let ratio = fine / coarse;
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn generated_caves_are_closed() {
        for (seed, layers) in [(1, 1), (2, 1), (3, 3)] {
            let c = GraphConfig { seed, layers, node_count_target: 60, ..Default::default() };
            let g = generate_graph(&c).unwrap();
            let m = skin_graph(&g, &config(0.5)).unwrap();
            let r = validate_mesh(&m);
            assert!(r.is_closed_manifold(), "seed {seed}: {r:?}");
            assert_eq!(r.degenerate_triangles, 0);
        }
    }

    #[test]
    fn sphere_field_matches_brute_force_polygonizer() {
        // A field with exact zeros on lattice points still yields a closed
        // surface because zero counts as outside.
        let f = |p: DVec3| p.length() - 2.0;
        let grid = GridSpec::covering(DVec3::ZERO, DVec3::ZERO, 3.0, 0.5);
        let m = polygonize(&f, &grid);
        let r = validate_mesh(&m);
        assert!(r.is_closed_manifold(), "{r:?}");
        assert_eq!(r.euler_characteristic, 2);
    }

    #[test]
    fn budget_is_enforced() {
        let c = MeshConfig { max_grid_cells: 1000, ..config(0.5) };
        let e = skin_graph(&capsule(), &c).unwrap_err();
        assert!(matches!(e, Error::ResourceLimit(_)));
        assert!(e.to_string().contains("1000"), "{e}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = GraphConfig { seed: 9, node_count_target: 40, ..Default::default() };
        let g = generate_graph(&c).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| skin_graph(&g, &config(0.5)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
