use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use glam::{DMat3, DVec3};
use serde::Serialize;

use super::validate::shape_quality;
use super::{validate_mesh, MeshConfig, TriMesh};
use crate::error::{Error, Result};

/// Collapses are refused when a surviving face would rotate further than
/// this (cosine between old and new normal).
const MIN_NORMAL_COS: f64 = 0.2;
/// Collapses are refused when a surviving face would get flatter than this.
const MIN_QUALITY: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecimationReport {
    pub input_triangles: usize,
    pub target_triangles: usize,
    pub output_triangles: usize,
    pub achieved_ratio: f64,
    pub reached_target: bool,
}

/// Symmetric 4x4 plane quadric, upper triangle row by row.
#[derive(Debug, Clone, Copy, Default)]
struct Quadric([f64; 10]);

impl Quadric {
    fn plane(n: DVec3, d: f64, w: f64) -> Self {
        let (a, b, c) = (n.x, n.y, n.z);
        Self([a * a, a * b, a * c, a * d, b * b, b * c, b * d, c * c, c * d, d * d].map(|x| x * w))
    }

    fn add(&mut self, o: &Quadric) {
        for (x, y) in self.0.iter_mut().zip(o.0) {
            *x += y;
        }
    }

    fn sum(a: &Quadric, b: &Quadric) -> Quadric {
        let mut q = *a;
        q.add(b);
        q
    }

    fn eval(&self, p: DVec3) -> f64 {
        let q = &self.0;
        let (x, y, z) = (p.x, p.y, p.z);
        q[0] * x * x + 2.0 * q[1] * x * y + 2.0 * q[2] * x * z + 2.0 * q[3] * x + q[4] * y * y
            + 2.0 * q[5] * y * z
            + 2.0 * q[6] * y
            + q[7] * z * z
            + 2.0 * q[8] * z
            + q[9]
    }

    /// Minimizer if the 3x3 block is well conditioned.
    fn minimizer(&self) -> Option<DVec3> {
        let q = &self.0;
        let a = DMat3::from_cols(
            DVec3::new(q[0], q[1], q[2]),
            DVec3::new(q[1], q[4], q[5]),
            DVec3::new(q[2], q[5], q[7]),
        );
        let scale = q[0] + q[4] + q[7];
        let det = a.determinant();
        if !(scale > 0.0) || det.abs() <= 1e-9 * scale * scale * scale {
            return None;
        }
        let x = a.inverse() * -DVec3::new(q[3], q[6], q[8]);
        x.is_finite().then_some(x)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    u: u32,
    v: u32,
    stamp: (u32, u32),
    target: DVec3,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
            .then(self.stamp.cmp(&other.stamp))
    }
}

struct State {
    pos: Vec<DVec3>,
    quadric: Vec<Quadric>,
    tris: Vec<[u32; 3]>,
    tri_alive: Vec<bool>,
    vtris: Vec<Vec<u32>>,
    version: Vec<u32>,
    vert_alive: Vec<bool>,
    alive_tris: usize,
}

impl State {
    fn faces(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.vtris[v as usize].iter().copied().filter(|&t| self.tri_alive[t as usize])
    }

    fn neighbours(&self, v: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .faces(v)
            .flat_map(|t| self.tris[t as usize])
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn candidate(&self, a: u32, b: u32) -> Candidate {
        let (u, v) = (a.min(b), a.max(b));
        let q = Quadric::sum(&self.quadric[u as usize], &self.quadric[v as usize]);
        let (pu, pv) = (self.pos[u as usize], self.pos[v as usize]);
        let mid = (pu + pv) * 0.5;
        let reach = pu.distance(pv);
        let target = match q.minimizer() {
            Some(x) if x.distance(mid) <= reach => x,
            _ => [pu, pv, mid]
                .into_iter()
                .min_by(|x, y| q.eval(*x).total_cmp(&q.eval(*y)))
                .unwrap(),
        };
        Candidate {
            cost: q.eval(target).max(0.0),
            u,
            v,
            stamp: (self.version[u as usize], self.version[v as usize]),
            target,
        }
    }

    fn legal(&self, c: &Candidate) -> bool {
        let (u, v) = (c.u, c.v);
        if self.alive_tris < 6 {
            return false;
        }
        let shared: Vec<u32> = self.faces(u).filter(|&t| self.tris[t as usize].contains(&v)).collect();
        if shared.len() != 2 {
            return false;
        }
        // Link condition: the only common neighbours are the two apexes.
        let mut apex: Vec<u32> = shared
            .iter()
            .flat_map(|&t| self.tris[t as usize])
            .filter(|&w| w != u && w != v)
            .collect();
        apex.sort_unstable();
        let nu = self.neighbours(u);
        let common: Vec<u32> = self.neighbours(v).into_iter().filter(|w| nu.binary_search(w).is_ok()).collect();
        if common != apex {
            return false;
        }
        for t in self.faces(u).chain(self.faces(v)) {
            let tri = self.tris[t as usize];
            if tri.contains(&u) && tri.contains(&v) {
                continue;
            }
            let old = tri.map(|i| self.pos[i as usize]);
            let new = tri.map(|i| if i == u || i == v { c.target } else { self.pos[i as usize] });
            let n_old = (old[1] - old[0]).cross(old[2] - old[0]);
            let n_new = (new[1] - new[0]).cross(new[2] - new[0]);
            if shape_quality(new[0], new[1], new[2]) < MIN_QUALITY {
                return false;
            }
            match (n_old.try_normalize(), n_new.try_normalize()) {
                (Some(a), Some(b)) if a.dot(b) >= MIN_NORMAL_COS => {}
                _ => return false,
            }
        }
        true
    }

    fn collapse(&mut self, c: &Candidate) {
        let (u, v) = (c.u, c.v);
        let moved: Vec<u32> = self.faces(v).collect();
        for t in moved {
            let tri = &mut self.tris[t as usize];
            if tri.contains(&u) {
                self.tri_alive[t as usize] = false;
                self.alive_tris -= 1;
            } else {
                for i in tri.iter_mut() {
                    if *i == v {
                        *i = u;
                    }
                }
                self.vtris[u as usize].push(t);
            }
        }
        let alive = &self.tri_alive;
        self.vtris[u as usize].retain(|&t| alive[t as usize]);
        self.vtris[v as usize].clear();
        self.vert_alive[v as usize] = false;
        self.pos[u as usize] = c.target;
        let qv = self.quadric[v as usize];
        self.quadric[u as usize].add(&qv);
        self.version[u as usize] += 1;
        self.version[v as usize] += 1;
    }
}

/// Quadric-error edge collapse down to `decimate_ratio` of the input
/// triangle count.
///
/// Collapses that would break the link condition, flip or flatten a face are
/// skipped. When no legal collapse remains the mesh is returned as far as it
/// got, and the report says so.
pub fn decimate(mesh: &TriMesh, config: &MeshConfig) -> Result<(TriMesh, DecimationReport)> {
    let report = validate_mesh(mesh);
    if !(report.is_closed() && report.is_manifold()) {
        return Err(Error::Contract(format!(
            "decimation needs a closed manifold mesh ({} boundary, {} non-manifold edges, {} non-manifold vertices)",
            report.boundary_edges, report.nonmanifold_edges, report.nonmanifold_vertices
        )));
    }
    let input = mesh.triangles.len();
    let target = ((config.decimate_ratio * input as f64).floor() as usize).min(input);
    if config.decimate_ratio >= 1.0 {
        return Ok((
            mesh.clone(),
            DecimationReport {
                input_triangles: input,
                target_triangles: input,
                output_triangles: input,
                achieved_ratio: 1.0,
                reached_target: true,
            },
        ));
    }

    let nv = mesh.positions.len();
    let mut state = State {
        pos: mesh.positions.clone(),
        quadric: vec![Quadric::default(); nv],
        tris: mesh.triangles.clone(),
        tri_alive: vec![true; input],
        vtris: vec![Vec::new(); nv],
        version: vec![0; nv],
        vert_alive: vec![true; nv],
        alive_tris: input,
    };
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = tri.map(|i| mesh.positions[i as usize]);
        let cross = (b - a).cross(c - a);
        let area = 0.5 * cross.length();
        if let Some(n) = cross.try_normalize() {
            let q = Quadric::plane(n, -n.dot(a), area);
            for &i in tri {
                state.quadric[i as usize].add(&q);
            }
        }
        for &i in tri {
            state.vtris[i as usize].push(t as u32);
        }
    }

    let mut heap = BinaryHeap::new();
    for v in 0..nv as u32 {
        for w in state.neighbours(v) {
            if v < w {
                heap.push(Reverse(state.candidate(v, w)));
            }
        }
    }
    while state.alive_tris > target {
        let Some(Reverse(c)) = heap.pop() else { break };
        let (u, v) = (c.u as usize, c.v as usize);
        if !(state.vert_alive[u] && state.vert_alive[v]) || c.stamp != (state.version[u], state.version[v]) {
            continue;
        }
        if !state.legal(&c) {
            continue;
        }
        state.collapse(&c);
        for w in state.neighbours(c.u) {
            heap.push(Reverse(state.candidate(c.u, w)));
        }
    }

    let triangles: Vec<[u32; 3]> = state
        .tris
        .iter()
        .zip(&state.tri_alive)
        .filter(|(_, &a)| a)
        .map(|(t, _)| *t)
        .collect();
    let mut out = TriMesh {
        positions: state.pos,
        normals: Vec::new(),
        triangles,
        uvs: None,
    };
    out.remove_unreferenced();
    out.compute_normals();
    let output = out.triangles.len();
    Ok((
        out,
        DecimationReport {
            input_triangles: input,
            target_triangles: target,
            output_triangles: output,
            achieved_ratio: output as f64 / input as f64,
            reached_target: output <= target,
        },
    ))
}
