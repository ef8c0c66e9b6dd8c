//! Marching-cubes case table, generated from face rules instead of typed in.
//!
//! On every cube face the crossing points are joined by segments that keep
//! the inside corners on their left when the face is seen from outside the
//! cube. A face with two diagonally opposite inside corners separates them.
//! Because both cubes sharing a face derive the same segments from the same
//! four corner signs, neighbouring cells always stitch into a closed surface.
//! The segments of a cube chain into loops which are fan-triangulated.

use std::sync::OnceLock;

/// Corner offsets in (x, y, z).
pub const CORNERS: [[u8; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Edges as (lower corner, upper corner).
pub const EDGES: [[u8; 2]; 12] = [
    [0, 1],
    [1, 2],
    [3, 2],
    [0, 3],
    [4, 5],
    [5, 6],
    [7, 6],
    [4, 7],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

const FACES: [([u8; 4], [i8; 3]); 6] = [
    ([0, 1, 2, 3], [0, 0, -1]),
    ([4, 5, 6, 7], [0, 0, 1]),
    ([0, 1, 5, 4], [0, -1, 0]),
    ([3, 2, 6, 7], [0, 1, 0]),
    ([0, 3, 7, 4], [-1, 0, 0]),
    ([1, 2, 6, 5], [1, 0, 0]),
];

pub type Table = Vec<Vec<[u8; 3]>>;

/// Triangles per case, as cube-edge indices, wound so that normals point from
/// inside corners toward outside corners.
pub fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(build)
}

/// Axis along which edge `e` runs.
pub fn edge_axis(e: usize) -> usize {
    let [a, b] = EDGES[e];
    (0..3).find(|&k| CORNERS[a as usize][k] != CORNERS[b as usize][k]).unwrap()
}

fn edge_between(a: u8, b: u8) -> usize {
    EDGES
        .iter()
        .position(|&[x, y]| (x, y) == (a, b) || (y, x) == (a, b))
        .expect("corners share an edge")
}

fn corner_vec(c: u8) -> [i32; 3] {
    CORNERS[c as usize].map(i32::from)
}

/// Face corners in counter-clockwise order seen from outside the cube.
fn oriented_faces() -> [[u8; 4]; 6] {
    FACES.map(|(mut f, out)| {
        let [p0, p1, p2] = [corner_vec(f[0]), corner_vec(f[1]), corner_vec(f[2])];
        let u = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
        let v = [p2[0] - p1[0], p2[1] - p1[1], p2[2] - p1[2]];
        let n = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        let dot: i32 = (0..3).map(|k| n[k] * i32::from(out[k])).sum();
        if dot < 0 {
            f.reverse();
        }
        f
    })
}

/// Bit mask of the (up to two) faces containing edge `e`.
fn edge_faces(faces: &[[u8; 4]; 6], e: usize) -> u8 {
    let [a, b] = EDGES[e];
    let mut m = 0;
    for (i, f) in faces.iter().enumerate() {
        if f.contains(&a) && f.contains(&b) {
            m |= 1 << i;
        }
    }
    m
}

fn build() -> Table {
    let faces = oriented_faces();
    let face_mask: Vec<u8> = (0..12).map(|e| edge_faces(&faces, e)).collect();
    (0..256usize)
        .map(|case| {
            let inside = |c: u8| case >> c & 1 == 1;
            // next[e] = edge reached from crossing e along a face segment
            let mut next = [usize::MAX; 12];
            for f in &faces {
                for k in 0..4 {
                    let (c, succ) = (f[k], f[(k + 1) % 4]);
                    if inside(c) && !inside(succ) {
                        // Walk back over the run of inside corners ending at
                        // `c`; diagonal inside corners form separate runs.
                        let mut first = k;
                        while inside(f[(first + 3) % 4]) {
                            first = (first + 3) % 4;
                        }
                        let exit = edge_between(c, succ);
                        next[exit] = edge_between(f[(first + 3) % 4], f[first]);
                    }
                }
            }
            let mut tris = Vec::new();
            let mut used = [false; 12];
            for start in 0..12 {
                if next[start] == usize::MAX || used[start] {
                    continue;
                }
                let mut ring = Vec::new();
                let mut e = start;
                while !used[e] {
                    used[e] = true;
                    ring.push(e);
                    e = next[e];
                }
                debug_assert_eq!(e, start);
                triangulate(&ring, &face_mask, &mut tris);
            }
            tris
        })
        .collect()
}

/// Fans the loop from the vertex that needs the fewest diagonals between
/// crossings on a common face. Loop order walks exit to entry, which is
/// clockwise about the outward normal, so triangles are emitted reversed.
fn triangulate(ring: &[usize], face_mask: &[u8], out: &mut Vec<[u8; 3]>) {
    let n = ring.len();
    let bad = |s: usize| {
        (2..n - 1)
            .filter(|&i| face_mask[ring[s]] & face_mask[ring[(s + i) % n]] != 0)
            .count()
    };
    let start = (0..n).min_by_key(|&s| (bad(s), s)).unwrap();
    for i in 1..n - 1 {
        let a = ring[start] as u8;
        let b = ring[(start + i) % n] as u8;
        let c = ring[(start + i + 1) % n] as u8;
        out.push([a, c, b]);
    }
}
