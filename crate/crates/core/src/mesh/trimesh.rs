use glam::{DVec2, DVec3};

/// Indexed triangle mesh.
///
/// Closed meshes are wound so that normals point out of the tunnel, into the
/// surrounding rock.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub positions: Vec<DVec3>,
    pub normals: Vec<DVec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Per-corner texture coordinates, parallel to `triangles`.
    pub uvs: Option<Vec<[DVec2; 3]>>,
}

impl TriMesh {
    pub fn new(positions: Vec<DVec3>, triangles: Vec<[u32; 3]>) -> Self {
        let mut mesh = Self {
            positions,
            normals: Vec::new(),
            triangles,
            uvs: None,
        };
        mesh.compute_normals();
        mesh
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    #[inline]
    pub fn corners(&self, t: usize) -> [DVec3; 3] {
        self.triangles[t].map(|i| self.positions[i as usize])
    }

    /// Unnormalized face normal (twice the area vector).
    #[inline]
    pub fn face_cross(&self, t: usize) -> DVec3 {
        let [a, b, c] = self.corners(t);
        (b - a).cross(c - a)
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.face_cross(t).length()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Signed enclosed volume by the divergence theorem; positive for a closed
    /// mesh wound with outward normals.
    pub fn volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                a.dot(b.cross(c))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn bounds(&self) -> Option<(DVec3, DVec3)> {
        if self.positions.is_empty() {
            return None;
        }
        Some(self.positions.iter().fold(
            (DVec3::splat(f64::INFINITY), DVec3::splat(f64::NEG_INFINITY)),
            |(lo, hi), p| (lo.min(*p), hi.max(*p)),
        ))
    }

    /// Area-weighted vertex normals.
    pub fn compute_normals(&mut self) {
        let mut normals = vec![DVec3::ZERO; self.positions.len()];
        for t in 0..self.triangles.len() {
            let n = self.face_cross(t);
            for i in self.triangles[t] {
                normals[i as usize] += n;
            }
        }
        for n in &mut normals {
            *n = n.try_normalize().unwrap_or(DVec3::Z);
        }
        self.normals = normals;
    }

    /// Vertex adjacency in compressed-row form: neighbours of `v` are
    /// `indices[offsets[v]..offsets[v + 1]]`, sorted ascending.
    pub fn vertex_neighbours(&self) -> (Vec<usize>, Vec<u32>) {
        let n = self.positions.len();
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(self.triangles.len() * 6);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                pairs.push((a, b));
                pairs.push((b, a));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for (a, _) in &pairs {
            offsets[*a as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        (offsets, pairs.into_iter().map(|(_, b)| b).collect())
    }

    /// Drops vertices no triangle references, keeping relative order.
    pub fn remove_unreferenced(&mut self) {
        let mut remap = vec![u32::MAX; self.positions.len()];
        for t in &self.triangles {
            for &i in t {
                remap[i as usize] = 0;
            }
        }
        let mut next = 0u32;
        let mut positions = Vec::new();
        let mut normals = Vec::new();
        for (i, r) in remap.iter_mut().enumerate() {
            if *r == 0 {
                *r = next;
                next += 1;
                positions.push(self.positions[i]);
                if let Some(n) = self.normals.get(i) {
                    normals.push(*n);
                }
            }
        }
        for t in &mut self.triangles {
            for i in t.iter_mut() {
                *i = remap[*i as usize];
            }
        }
        self.positions = positions;
        self.normals = normals;
    }
}
