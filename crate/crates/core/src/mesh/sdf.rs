use glam::DVec3;

use crate::graph::Graph;

/// Segment with linearly varying radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: DVec3,
    pub b: DVec3,
    pub ra: f64,
    pub rb: f64,
}

impl Capsule {
    fn reach(&self) -> f64 {
        self.ra.max(self.rb)
    }
}

/// Distance from `p` to the segment minus the radius interpolated at the
/// nearest segment parameter. Negative inside.
#[inline]
pub fn capsule_distance(p: DVec3, c: &Capsule) -> f64 {
    let ab = c.b - c.a;
    let len2 = ab.length_squared();
    let t = if len2 > 0.0 {
        ((p - c.a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(c.a + ab * t) - (c.ra + (c.rb - c.ra) * t)
}

/// One capsule per edge; a node without edges becomes a sphere.
pub fn capsules(graph: &Graph, radius_scale: f64) -> Vec<Capsule> {
    let mut out: Vec<Capsule> = graph
        .edge_list()
        .into_iter()
        .map(|(u, v)| {
            let (nu, nv) = (graph.node(u), graph.node(v));
            Capsule {
                a: nu.coordinates,
                b: nv.coordinates,
                ra: nu.radius * radius_scale,
                rb: nv.radius * radius_scale,
            }
        })
        .collect();
    for n in graph.nodes.iter().filter(|n| n.edges.is_empty()) {
        out.push(Capsule {
            a: n.coordinates,
            b: n.coordinates,
            ra: n.radius * radius_scale,
            rb: n.radius * radius_scale,
        });
    }
    out
}

/// Signed distance to the tunnel skin: the minimum capsule distance over all
/// edges. Brute force; see [`CapsuleField`] for the binned version.
pub fn sdf_eval(graph: &Graph, radius_scale: f64, p: DVec3) -> f64 {
    capsules(graph, radius_scale)
        .iter()
        .map(|c| capsule_distance(p, c))
        .fold(f64::INFINITY, f64::min)
}

/// Binned evaluation of `min(sdf, margin)`.
///
/// A capsule is registered in every bin its bounding box, inflated by its
/// radius plus `margin`, overlaps. Any capsule closer than `margin` to a point
/// is therefore registered in that point's bin, so the clamped value is exact.
#[derive(Debug, Clone)]
pub struct CapsuleField {
    capsules: Vec<Capsule>,
    origin: DVec3,
    bin: f64,
    dims: [usize; 3],
    offsets: Vec<u32>,
    members: Vec<u32>,
    margin: f64,
}

impl CapsuleField {
    pub fn new(graph: &Graph, radius_scale: f64, margin: f64) -> Self {
        Self::from_capsules(capsules(graph, radius_scale), margin)
    }

    pub fn from_capsules(capsules: Vec<Capsule>, margin: f64) -> Self {
        let (mut lo, mut hi) = (DVec3::splat(f64::INFINITY), DVec3::splat(f64::NEG_INFINITY));
        for c in &capsules {
            let pad = DVec3::splat(c.reach() + margin);
            lo = lo.min(c.a.min(c.b) - pad);
            hi = hi.max(c.a.max(c.b) + pad);
        }
        let typical = capsules.iter().map(Capsule::reach).fold(0.0, f64::max) + margin;
        let bin = typical.max(1e-9);
        let dims = ((hi - lo) / bin).ceil().max(DVec3::ONE).as_uvec3().to_array().map(|d| d as usize);

        let cell_of = |p: DVec3| -> [usize; 3] {
            let q = ((p - lo) / bin).floor();
            [0, 1, 2].map(|k| (q[k].max(0.0) as usize).min(dims[k] - 1))
        };
        let ranges: Vec<([usize; 3], [usize; 3])> = capsules
            .iter()
            .map(|c| {
                let pad = DVec3::splat(c.reach() + margin);
                (cell_of(c.a.min(c.b) - pad), cell_of(c.a.max(c.b) + pad))
            })
            .collect();
        let total = dims[0] * dims[1] * dims[2];
        let index = |x: usize, y: usize, z: usize| x + dims[0] * (y + dims[1] * z);
        let mut counts = vec![0u32; total + 1];
        let visit = |f: &mut dyn FnMut(usize, u32)| {
            for (ci, (a, b)) in ranges.iter().enumerate() {
                for z in a[2]..=b[2] {
                    for y in a[1]..=b[1] {
                        for x in a[0]..=b[0] {
                            f(index(x, y, z), ci as u32);
                        }
                    }
                }
            }
        };
        visit(&mut |cell, _| counts[cell + 1] += 1);
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut members = vec![0u32; counts[total] as usize];
        visit(&mut |cell, ci| {
            members[fill[cell] as usize] = ci;
            fill[cell] += 1;
        });
        Self {
            capsules,
            origin: lo,
            bin,
            dims,
            offsets: counts,
            members,
            margin,
        }
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// `min(sdf_eval(p), margin)`.
    pub fn eval(&self, p: DVec3) -> f64 {
        let q = ((p - self.origin) / self.bin).floor();
        let mut cell = [0usize; 3];
        for k in 0..3 {
            if q[k] < 0.0 || q[k] >= self.dims[k] as f64 {
                return self.margin;
            }
            cell[k] = q[k] as usize;
        }
        let i = cell[0] + self.dims[0] * (cell[1] + self.dims[1] * cell[2]);
        let (s, e) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
        self.members[s..e]
            .iter()
            .map(|&c| capsule_distance(p, &self.capsules[c as usize]))
            .fold(self.margin, f64::min)
    }
}
