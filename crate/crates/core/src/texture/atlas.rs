use std::collections::{HashMap, VecDeque};

use glam::{DVec2, DVec3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// Texels of padding around every chart; neighbouring charts are at least
/// twice this apart.
pub const CHART_PAD: u32 = 2;
/// Share of the atlas the first packing attempt aims to fill.
const TARGET_FILL: f64 = 0.6;
const MAX_ATTEMPTS: u32 = 40;

/// Projection direction of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axis {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::PosX, Axis::NegX, Axis::PosY, Axis::NegY, Axis::PosZ, Axis::NegZ];

    /// Axis of the largest normal component; ties prefer x, then y.
    pub fn dominant(n: DVec3) -> Axis {
        let a = n.abs();
        if a.x >= a.y && a.x >= a.z {
            if n.x >= 0.0 { Axis::PosX } else { Axis::NegX }
        } else if a.y >= a.z {
            if n.y >= 0.0 { Axis::PosY } else { Axis::NegY }
        } else if n.z >= 0.0 {
            Axis::PosZ
        } else {
            Axis::NegZ
        }
    }

    /// World directions of increasing u and v. `u x v` is the outward axis,
    /// so outward-facing triangles keep their winding in UV space.
    pub fn basis(self) -> (DVec3, DVec3) {
        match self {
            Axis::PosX => (DVec3::Y, DVec3::Z),
            Axis::NegX => (DVec3::Z, DVec3::Y),
            Axis::PosY => (DVec3::Z, DVec3::X),
            Axis::NegY => (DVec3::X, DVec3::Z),
            Axis::PosZ => (DVec3::X, DVec3::Y),
            Axis::NegZ => (DVec3::Y, DVec3::X),
        }
    }

    #[inline]
    pub fn project(self, p: DVec3) -> DVec2 {
        let (u, v) = self.basis();
        DVec2::new(p.dot(u), p.dot(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chart {
    pub axis: Axis,
    pub triangles: Vec<u32>,
    /// Minimum projected coordinate, world units.
    pub origin: DVec2,
    pub extent: DVec2,
    /// Placement in texels: `[x, y, width, height]`, y measured upward from
    /// v = 0, padding included.
    pub rect: [u32; 4],
}

/// Per-chunk parameterization: each triangle belongs to one planar chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UVAtlas {
    pub resolution: u32,
    /// Texels per world unit, uniform over all charts.
    pub density: f64,
    pub charts: Vec<Chart>,
    pub chart_of: Vec<u32>,
    /// Per-corner UVs in `[0, 1]`.
    pub uvs: Vec<[DVec2; 3]>,
}

impl UVAtlas {
    /// World-space size of one texel.
    pub fn texel_size(&self) -> f64 {
        1.0 / self.density
    }
}

/// Splits the mesh into axis charts and packs them into the unit square.
///
/// Triangles go to the chart of their dominant face-normal axis. Each axis
/// group is split into edge-connected islands, and a triangle whose
/// projection would overlap the island grown so far starts a new island, so
/// no texel ever maps to two surface points. Islands are shelf-packed at one
/// density, halved until everything fits.
pub fn build_uv_atlas(mesh: &TriMesh, resolution: u32) -> Result<UVAtlas> {
    if mesh.triangles.is_empty() {
        return Err(Error::Contract("cannot build an atlas for an empty mesh".into()));
    }
    let islands = grow_islands(mesh);
    let res = resolution as f64;
    let pad = CHART_PAD as f64;
    // Solve sum((w d + 2p)(h d + 2p)) = fill * R^2 for d.
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (_, _, lo, hi) in &islands {
        let e = *hi - *lo;
        a += e.x * e.y;
        b += 2.0 * pad * (e.x + e.y);
        c += 4.0 * pad * pad;
    }
    let budget = TARGET_FILL * res * res - c;
    let mut density = if budget <= 0.0 {
        1e-9
    } else if a > 0.0 {
        (-b + (b * b + 4.0 * a * budget).sqrt()) / (2.0 * a)
    } else {
        budget / b.max(1e-12)
    };

    for _ in 0..MAX_ATTEMPTS {
        let sizes: Vec<[u32; 2]> = islands
            .iter()
            .map(|(_, _, lo, hi)| {
                let e = (*hi - *lo) * density;
                [e.x.ceil() as u32 + 1 + 2 * CHART_PAD, e.y.ceil() as u32 + 1 + 2 * CHART_PAD]
            })
            .collect();
        if let Some(places) = shelf_pack(&sizes, resolution) {
            return Ok(assemble(mesh, resolution, density, islands, &sizes, &places));
        }
        density *= 0.5;
    }
    Err(Error::ResourceLimit(format!(
        "{} charts do not fit a {resolution}px atlas",
        islands.len()
    )))
}

type Island = (Axis, Vec<u32>, DVec2, DVec2);

fn assemble(
    mesh: &TriMesh,
    resolution: u32,
    density: f64,
    islands: Vec<Island>,
    sizes: &[[u32; 2]],
    places: &[[u32; 2]],
) -> UVAtlas {
    let res = resolution as f64;
    let mut chart_of = vec![0u32; mesh.triangles.len()];
    let mut uvs = vec![[DVec2::ZERO; 3]; mesh.triangles.len()];
    let mut charts = Vec::with_capacity(islands.len());
    for (ci, (axis, tris, lo, hi)) in islands.into_iter().enumerate() {
        let [x, y] = places[ci];
        let offset = DVec2::new((x + CHART_PAD) as f64, (y + CHART_PAD) as f64);
        for &t in &tris {
            chart_of[t as usize] = ci as u32;
            uvs[t as usize] = mesh.corners(t as usize).map(|p| (offset + (axis.project(p) - lo) * density) / res);
        }
        charts.push(Chart {
            axis,
            triangles: tris,
            origin: lo,
            extent: hi - lo,
            rect: [x, y, sizes[ci][0], sizes[ci][1]],
        });
    }
    UVAtlas {
        resolution,
        density,
        charts,
        chart_of,
        uvs,
    }
}

/// Shelf packing, tallest first. Returns the lower-left corner of each
/// rectangle, or `None` if they do not fit.
fn shelf_pack(sizes: &[[u32; 2]], resolution: u32) -> Option<Vec<[u32; 2]>> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(sizes[i][1]), std::cmp::Reverse(sizes[i][0]), i));
    let mut places = vec![[0u32; 2]; sizes.len()];
    let (mut x, mut y, mut shelf) = (0u32, 0u32, 0u32);
    for i in order {
        let [w, h] = sizes[i];
        if w > resolution {
            return None;
        }
        if x + w > resolution {
            y += shelf;
            x = 0;
            shelf = 0;
        }
        if y + h > resolution {
            return None;
        }
        places[i] = [x, y];
        x += w;
        shelf = shelf.max(h);
    }
    Some(places)
}

fn grow_islands(mesh: &TriMesh) -> Vec<Island> {
    let n = mesh.triangles.len();
    let axes: Vec<Axis> = (0..n).map(|t| Axis::dominant(mesh.face_cross(t))).collect();
    let mut by_edge: HashMap<(u32, u32), Vec<u32>> = HashMap::with_capacity(n * 2);
    let mut edge_len = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(t as u32);
            edge_len += mesh.positions[a as usize].distance(mesh.positions[b as usize]);
        }
    }
    let cell = (2.0 * edge_len / (3 * n) as f64).max(1e-9);

    let mut assigned = vec![false; n];
    let mut islands = Vec::new();
    for seed in 0..n {
        if assigned[seed] {
            continue;
        }
        let axis = axes[seed];
        let mut island = IslandIndex::new(cell);
        let mut members = Vec::new();
        let mut queue = VecDeque::from([seed as u32]);
        assigned[seed] = true;
        island.insert(project(mesh, seed as u32, axis));
        while let Some(t) = queue.pop_front() {
            members.push(t);
            let tri = mesh.triangles[t as usize];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                for &nb in &by_edge[&(a.min(b), a.max(b))] {
                    if assigned[nb as usize] || axes[nb as usize] != axis {
                        continue;
                    }
                    let proj = project(mesh, nb, axis);
                    if island.overlaps(&proj) {
                        continue;
                    }
                    island.insert(proj);
                    assigned[nb as usize] = true;
                    queue.push_back(nb);
                }
            }
        }
        members.sort_unstable();
        islands.push((axis, members, island.lo, island.hi));
    }
    islands
}

fn project(mesh: &TriMesh, t: u32, axis: Axis) -> [DVec2; 3] {
    mesh.corners(t as usize).map(|p| axis.project(p))
}

/// Projected triangles of one island in a uniform hash grid.
struct IslandIndex {
    cell: f64,
    tris: Vec<[DVec2; 3]>,
    grid: HashMap<(i64, i64), Vec<u32>>,
    lo: DVec2,
    hi: DVec2,
    stamp: Vec<u32>,
    query: u32,
}

impl IslandIndex {
    fn new(cell: f64) -> Self {
        Self {
            cell,
            tris: Vec::new(),
            grid: HashMap::new(),
            lo: DVec2::splat(f64::INFINITY),
            hi: DVec2::splat(f64::NEG_INFINITY),
            stamp: Vec::new(),
            query: 0,
        }
    }

    fn cells(&self, t: &[DVec2; 3]) -> impl Iterator<Item = (i64, i64)> {
        let lo = t[0].min(t[1]).min(t[2]) / self.cell;
        let hi = t[0].max(t[1]).max(t[2]) / self.cell;
        let (x0, x1, y0, y1) = (lo.x.floor() as i64, hi.x.floor() as i64, lo.y.floor() as i64, hi.y.floor() as i64);
        (y0..=y1).flat_map(move |y| (x0..=x1).map(move |x| (x, y)))
    }

    fn insert(&mut self, t: [DVec2; 3]) {
        let id = self.tris.len() as u32;
        let cells: Vec<_> = self.cells(&t).collect();
        for c in cells {
            self.grid.entry(c).or_default().push(id);
        }
        for p in t {
            self.lo = self.lo.min(p);
            self.hi = self.hi.max(p);
        }
        self.tris.push(t);
        self.stamp.push(0);
    }

    fn overlaps(&mut self, t: &[DVec2; 3]) -> bool {
        self.query += 1;
        let eps = 1e-9 * self.cell;
        let cells: Vec<_> = self.cells(t).collect();
        for c in cells {
            let Some(ids) = self.grid.get(&c) else { continue };
            for &id in ids {
                if self.stamp[id as usize] == self.query {
                    continue;
                }
                self.stamp[id as usize] = self.query;
                if triangles_overlap(t, &self.tris[id as usize], eps) {
                    return true;
                }
            }
        }
        false
    }
}

/// Separating-axis test; triangles that only touch along an edge or at a
/// point do not overlap.
pub(crate) fn triangles_overlap(a: &[DVec2; 3], b: &[DVec2; 3], eps: f64) -> bool {
    for tri in [a, b] {
        for k in 0..3 {
            let e = tri[(k + 1) % 3] - tri[k];
            let axis = DVec2::new(-e.y, e.x);
            let len = axis.length();
            if len == 0.0 {
                continue;
            }
            let axis = axis / len;
            let span = |t: &[DVec2; 3]| {
                t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let d = p.dot(axis);
                    (lo.min(d), hi.max(d))
                })
            };
            let (a0, a1) = span(a);
            let (b0, b1) = span(b);
            if a1 <= b0 + eps || b1 <= a0 + eps {
                return false;
            }
        }
    }
    true
}
