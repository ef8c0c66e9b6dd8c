use std::collections::HashMap;

use glam::DVec3;
use serde::Serialize;

use super::TriMesh;

/// Twice the area over the squared longest side; zero for collinear corners.
pub(crate) fn shape_quality(a: DVec3, b: DVec3, c: DVec3) -> f64 {
    let longest = (b - a).length_squared().max((c - b).length_squared()).max((a - c).length_squared());
    if longest == 0.0 {
        return 0.0;
    }
    (b - a).cross(c - a).length() / longest
}

/// Triangles flatter than this are reported as degenerate.
pub(crate) const DEGENERATE_QUALITY: f64 = 1e-10;

/// Structural findings about a mesh. Never produced by mutating it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub out_of_range_indices: usize,
    /// Edges used by exactly one triangle.
    pub boundary_edges: usize,
    /// Edges used by three or more triangles.
    pub nonmanifold_edges: usize,
    /// Two-triangle edges traversed in the same direction by both.
    pub misoriented_edges: usize,
    /// Vertices whose triangle fan is not a single disc or cycle.
    pub nonmanifold_vertices: usize,
    pub degenerate_triangles: usize,
    pub components: usize,
    pub euler_characteristic: i64,
    pub bounds: Option<(DVec3, DVec3)>,
}

impl MeshReport {
    pub fn is_closed(&self) -> bool {
        self.triangle_count > 0 && self.boundary_edges == 0 && self.nonmanifold_edges == 0
    }

    pub fn is_manifold(&self) -> bool {
        self.nonmanifold_edges == 0 && self.nonmanifold_vertices == 0 && self.out_of_range_indices == 0
    }

    pub fn is_oriented(&self) -> bool {
        self.misoriented_edges == 0
    }

    /// Closed, manifold and consistently wound.
    pub fn is_closed_manifold(&self) -> bool {
        self.is_closed() && self.is_manifold() && self.is_oriented()
    }
}

pub fn validate_mesh(mesh: &TriMesh) -> MeshReport {
    let nv = mesh.positions.len();
    let out_of_range_indices = mesh
        .triangles
        .iter()
        .flatten()
        .filter(|&&i| i as usize >= nv)
        .count();
    let tris: Vec<[u32; 3]> = mesh
        .triangles
        .iter()
        .copied()
        .filter(|t| t.iter().all(|&i| (i as usize) < nv))
        .collect();

    // (low, high) -> (uses low->high, uses high->low)
    let mut edges: HashMap<(u32, u32), (u32, u32)> = HashMap::with_capacity(tris.len() * 2);
    let mut degenerate_triangles = 0;
    for t in &tris {
        let [a, b, c] = t.map(|i| mesh.positions[i as usize]);
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || shape_quality(a, b, c) <= DEGENERATE_QUALITY {
            degenerate_triangles += 1;
        }
        for k in 0..3 {
            let (u, v) = (t[k], t[(k + 1) % 3]);
            let e = edges.entry((u.min(v), u.max(v))).or_default();
            if u < v {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    let (mut boundary_edges, mut nonmanifold_edges, mut misoriented_edges) = (0, 0, 0);
    for &(f, b) in edges.values() {
        match f + b {
            1 => boundary_edges += 1,
            2 if f != 1 => misoriented_edges += 1,
            2 => {}
            _ => nonmanifold_edges += 1,
        }
    }

    // Union-find over vertices joined by triangles.
    let mut parent: Vec<u32> = (0..nv as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let mut used = vec![false; nv];
    for t in &tris {
        for &i in t {
            used[i as usize] = true;
        }
        for k in 1..3 {
            let (ra, rb) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
            if ra != rb {
                parent[ra.max(rb) as usize] = ra.min(rb);
            }
        }
    }
    let components = (0..nv as u32)
        .filter(|&v| used[v as usize] && find(&mut parent, v) == v)
        .count();
    let used_count = used.iter().filter(|&&u| u).count() as i64;
    let euler_characteristic = used_count - edges.len() as i64 + tris.len() as i64;

    MeshReport {
        vertex_count: nv,
        triangle_count: mesh.triangles.len(),
        out_of_range_indices,
        boundary_edges,
        nonmanifold_edges,
        misoriented_edges,
        nonmanifold_vertices: count_nonmanifold_vertices(nv, &tris),
        degenerate_triangles,
        components,
        euler_characteristic,
        bounds: mesh.bounds(),
    }
}

/// A vertex is manifold when the edges opposite it in its triangles form one
/// connected chain or cycle.
fn count_nonmanifold_vertices(nv: usize, tris: &[[u32; 3]]) -> usize {
    let mut link: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nv];
    for t in tris {
        for k in 0..3 {
            link[t[k] as usize].push((t[(k + 1) % 3], t[(k + 2) % 3]));
        }
    }
    link.iter()
        .filter(|edges| !edges.is_empty() && !is_single_fan(edges))
        .count()
}

fn is_single_fan(edges: &[(u32, u32)]) -> bool {
    let mut verts: Vec<u32> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    verts.sort_unstable();
    verts.dedup();
    let idx = |v: u32| verts.binary_search(&v).unwrap();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut degree = vec![0u32; verts.len()];
    for &(a, b) in edges {
        let (ia, ib) = (idx(a), idx(b));
        degree[ia] += 1;
        degree[ib] += 1;
        let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
        parent[ra] = rb;
    }
    let roots = (0..verts.len()).filter(|&i| find(&mut parent, i) == i).count();
    roots == 1 && degree.iter().all(|&d| d <= 2)
}
