use glam::DVec3;

use super::{hash3, hash_seed, hash_x, hash_y, hash_z, mix64, unit_f64};

/// Jitter half-width of a feature point around its cell centre.
///
/// With features confined to `0.5 ± JITTER` inside their cell, the nearest
/// feature of any point is always among its 3x3x3 neighbouring cells: the
/// own-cell feature is at most `sqrt(3) * (0.5 + JITTER)` away, while any cell
/// outside the block is at least `1.5 - JITTER` away along one axis.
pub(crate) const JITTER: f64 = 0.23;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiSample {
    /// Distance to the nearest feature point, in world units.
    pub f1: f64,
    /// Lattice cell (in the frequency-scaled domain) owning that feature.
    pub cell: [i64; 3],
    /// Stable integer id of `cell`.
    pub cell_id: u64,
}

const FEATURE_SALT: u64 = 0x5EED_F00D_CAFE_0001;

/// Feature point of a lattice cell, in the scaled domain.
#[cfg(test)]
pub(crate) fn feature_point(seed: u64, cell: [i64; 3]) -> DVec3 {
    feature_from_hash(hash3(seed ^ FEATURE_SALT, cell[0], cell[1], cell[2]), cell)
}

#[inline]
fn feature_from_hash(h: u64, cell: [i64; 3]) -> DVec3 {
    let hy = mix64(h ^ 0x1);
    let hz = mix64(h ^ 0x2);
    DVec3::new(
        cell[0] as f64 + 0.5 + JITTER * (2.0 * unit_f64(h) - 1.0),
        cell[1] as f64 + 0.5 + JITTER * (2.0 * unit_f64(hy) - 1.0),
        cell[2] as f64 + 0.5 + JITTER * (2.0 * unit_f64(hz) - 1.0),
    )
}

pub(crate) fn cell_id(seed: u64, cell: [i64; 3]) -> u64 {
    hash3(seed ^ 0xC311_1D00, cell[0], cell[1], cell[2])
}

pub(crate) fn nearest_feature(seed: u64, frequency: f64, p: DVec3) -> VoronoiSample {
    let q = p * frequency;
    let base = q.floor();
    let (bx, by, bz) = (base.x as i64, base.y as i64, base.z as i64);
    // Squared distances indexed [dz][dy][dx], hashed x-major to share prefixes.
    let mut d2 = [[[0.0f64; 3]; 3]; 3];
    let h0 = hash_seed(seed ^ FEATURE_SALT);
    for dx in 0..3 {
        let hx = hash_x(h0, bx + dx as i64 - 1);
        for dy in 0..3 {
            let hy = hash_y(hx, by + dy as i64 - 1);
            for dz in 0..3 {
                let cell = [bx + dx as i64 - 1, by + dy as i64 - 1, bz + dz as i64 - 1];
                d2[dz][dy][dx] = feature_from_hash(hash_z(hy, cell[2]), cell).distance_squared(q);
            }
        }
    }
    let mut best_d2 = f64::INFINITY;
    let mut best = [bx, by, bz];
    for (dz, plane) in d2.iter().enumerate() {
        for (dy, row) in plane.iter().enumerate() {
            for (dx, &d) in row.iter().enumerate() {
                if d < best_d2 {
                    best_d2 = d;
                    best = [bx + dx as i64 - 1, by + dy as i64 - 1, bz + dz as i64 - 1];
                }
            }
        }
    }
    VoronoiSample {
        f1: best_d2.sqrt() / frequency,
        cell: best,
        cell_id: cell_id(seed, best),
    }
}
