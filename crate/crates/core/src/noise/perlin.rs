use glam::DVec3;

use super::{hash_seed, hash_x, hash_y, hash_z, mix64, voronoi, NoiseParams, VoronoiSample};
use crate::error::Result;

/// Cube-edge gradient set; each has length sqrt(2).
const GRADIENTS: [[f64; 3]; 12] = [
    [1.0, 1.0, 0.0],
    [-1.0, 1.0, 0.0],
    [1.0, -1.0, 0.0],
    [-1.0, -1.0, 0.0],
    [1.0, 0.0, 1.0],
    [-1.0, 0.0, 1.0],
    [1.0, 0.0, -1.0],
    [-1.0, 0.0, -1.0],
    [0.0, 1.0, 1.0],
    [0.0, -1.0, 1.0],
    [0.0, 1.0, -1.0],
    [0.0, -1.0, -1.0],
];

// With gradients of length g the single-octave magnitude is bounded by
// g * sqrt(3) / 2 (reached only if every corner gradient pointed at the cell
// centre), so this factor maps the output into [-1, 1].
const RANGE_SCALE: f64 = 0.816_496_580_927_726; // 2 / sqrt(6)

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[inline]
fn fade_deriv(t: f64) -> f64 {
    30.0 * t * t * (t * (t - 2.0) + 1.0)
}

/// Gradient indices of the eight cell corners, corner bit 0 = x, 1 = y, 2 = z.
#[inline]
fn corner_gradients(seed: u64, ix: i64, iy: i64, iz: i64) -> [usize; 8] {
    let h = hash_seed(seed);
    let hx = [hash_x(h, ix), hash_x(h, ix + 1)];
    let mut out = [0; 8];
    for cy in 0..2 {
        for (cx, &hxv) in hx.iter().enumerate() {
            let hy = hash_y(hxv, iy + cy as i64);
            for cz in 0..2 {
                out[cx | cy << 1 | cz << 2] = (hash_z(hy, iz + cz as i64) % 12) as usize;
            }
        }
    }
    out
}

/// Single-octave gradient noise and its analytic gradient, lattice spacing 1.
pub(crate) fn gradient_noise(seed: u64, p: DVec3) -> (f64, DVec3) {
    let cell = p.floor();
    let (ix, iy, iz) = (cell.x as i64, cell.y as i64, cell.z as i64);
    let f = p - cell;
    let (u, v, w) = (fade(f.x), fade(f.y), fade(f.z));
    let (du, dv, dw) = (fade_deriv(f.x), fade_deriv(f.y), fade_deriv(f.z));
    let grads = corner_gradients(seed, ix, iy, iz);

    let mut value = 0.0;
    let mut grad = DVec3::ZERO;
    for corner in 0..8usize {
        let (cx, cy, cz) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
        let g = GRADIENTS[grads[corner]];
        let d = DVec3::new(f.x - cx as f64, f.y - cy as f64, f.z - cz as f64);
        let dot = g[0] * d.x + g[1] * d.y + g[2] * d.z;

        let (wx, dwx) = if cx == 1 { (u, du) } else { (1.0 - u, -du) };
        let (wy, dwy) = if cy == 1 { (v, dv) } else { (1.0 - v, -dv) };
        let (wz, dwz) = if cz == 1 { (w, dw) } else { (1.0 - w, -dw) };
        let weight = wx * wy * wz;

        value += weight * dot;
        grad.x += dwx * wy * wz * dot + weight * g[0];
        grad.y += wx * dwy * wz * dot + weight * g[1];
        grad.z += wx * wy * dwz * dot + weight * g[2];
    }
    (value * RANGE_SCALE, grad * RANGE_SCALE)
}

/// Value-only variant of [`gradient_noise`]; bitwise equal to its first
/// component.
pub(crate) fn gradient_value(seed: u64, p: DVec3) -> f64 {
    let cell = p.floor();
    let (ix, iy, iz) = (cell.x as i64, cell.y as i64, cell.z as i64);
    let f = p - cell;
    let (u, v, w) = (fade(f.x), fade(f.y), fade(f.z));
    let grads = corner_gradients(seed, ix, iy, iz);
    let mut value = 0.0;
    for corner in 0..8usize {
        let (cx, cy, cz) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
        let g = GRADIENTS[grads[corner]];
        let d = DVec3::new(f.x - cx as f64, f.y - cy as f64, f.z - cz as f64);
        let dot = g[0] * d.x + g[1] * d.y + g[2] * d.z;
        let wx = if cx == 1 { u } else { 1.0 - u };
        let wy = if cy == 1 { v } else { 1.0 - v };
        let wz = if cz == 1 { w } else { 1.0 - w };
        value += wx * wy * wz * dot;
    }
    value * RANGE_SCALE
}

/// A validated noise field: fractal Perlin and F1 cellular noise sharing one
/// parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fractal {
    params: NoiseParams,
    norm: f64,
}

impl Fractal {
    pub fn new(params: NoiseParams) -> Result<Self> {
        params.validate()?;
        let norm = (0..params.octaves).map(|o| params.gain.powi(o as i32)).sum::<f64>();
        Ok(Self { params, norm })
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    #[inline]
    fn octave_seed(&self, octave: u32) -> u64 {
        if octave == 0 {
            self.params.seed
        } else {
            mix64(self.params.seed ^ (octave as u64).wrapping_mul(0x632B_E59B_D9B4_E019))
        }
    }

    /// Fractal gradient noise in `[-1, 1]`.
    pub fn perlin(&self, p: DVec3) -> f64 {
        let mut freq = self.params.frequency;
        let mut amp = 1.0;
        let mut value = 0.0;
        for octave in 0..self.params.octaves {
            value += amp * gradient_value(self.octave_seed(octave), p * freq);
            freq *= self.params.lacunarity;
            amp *= self.params.gain;
        }
        (value / self.norm).clamp(-1.0, 1.0)
    }

    /// Fractal gradient noise with its gradient with respect to `p`.
    pub fn perlin_with_gradient(&self, p: DVec3) -> (f64, DVec3) {
        let mut freq = self.params.frequency;
        let mut amp = 1.0;
        let mut value = 0.0;
        let mut grad = DVec3::ZERO;
        for octave in 0..self.params.octaves {
            let (v, g) = gradient_noise(self.octave_seed(octave), p * freq);
            value += amp * v;
            grad += g * (amp * freq);
            freq *= self.params.lacunarity;
            amp *= self.params.gain;
        }
        ((value / self.norm).clamp(-1.0, 1.0), grad / self.norm)
    }

    pub fn voronoi(&self, p: DVec3) -> VoronoiSample {
        voronoi::nearest_feature(self.params.seed, self.params.frequency, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn field(seed: u64, octaves: u32) -> Fractal {
        Fractal::new(NoiseParams {
            seed,
            frequency: 1.0,
            octaves,
            lacunarity: 2.0,
            gain: 0.5,
        })
        .unwrap()
    }

    #[test]
    fn shared_prefix_hashes_match_direct_hashing() {
        use crate::noise::hash3;
        for (seed, ix, iy, iz) in [(0, 0, 0, 0), (7, -3, 5, 11), (u64::MAX, i64::MIN + 1, 9, -2)] {
            let g = corner_gradients(seed, ix, iy, iz);
            for (corner, gi) in g.iter().enumerate() {
                let (cx, cy, cz) = ((corner & 1) as i64, (corner >> 1 & 1) as i64, (corner >> 2 & 1) as i64);
                assert_eq!(*gi as u64, hash3(seed, ix + cx, iy + cy, iz + cz) % 12);
            }
        }
    }

    #[test]
    fn value_path_matches_gradient_path() {
        let f = field(5, 5);
        for i in 0..500 {
            let p = DVec3::new(i as f64 * 0.137, -(i as f64) * 0.071, (i as f64).sin() * 9.0);
            assert_eq!(f.perlin(p).to_bits(), f.perlin_with_gradient(p).0.to_bits());
        }
    }

    #[test]
    fn vanishes_on_lattice() {
        let f = field(42, 1);
        for p in [
            DVec3::ZERO,
            DVec3::new(3.0, -2.0, 7.0),
            DVec3::new(-11.0, 5.0, 0.0),
            DVec3::new(100.0, 100.0, -100.0),
        ] {
            assert_eq!(f.perlin(p), 0.0);
        }
    }

    #[test]
    fn deterministic_bitwise() {
        let f = field(9, 4);
        let p = DVec3::new(0.3, -4.7, 12.25);
        assert_eq!(f.perlin(p).to_bits(), f.perlin(p).to_bits());
        assert_ne!(f.perlin(p), field(10, 4).perlin(p));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = Fractal::new(NoiseParams {
            seed: 5,
            frequency: 0.37,
            octaves: 3,
            lacunarity: 2.1,
            gain: 0.45,
        })
        .unwrap();
        let h = 1e-5;
        for _ in 0..100 {
            let p = DVec3::new(
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
            );
            let dir = DVec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            let fd = (f.perlin(p + dir * h) - f.perlin(p - dir * h)) / (2.0 * h);
            let analytic = f.perlin_with_gradient(p).1.dot(dir);
            assert!((fd - analytic).abs() < 1e-3, "fd {fd} analytic {analytic}");
        }
    }

    #[test]
    fn bounded_by_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let fields = [field(0, 1), field(77, 3), field(u64::MAX, 6)];
        let mut max_seen = 0.0f64;
        for i in 0..1_000_000 {
            let p = DVec3::new(
                rng.random_range(-1e3..1e3),
                rng.random_range(-1e3..1e3),
                rng.random_range(-1e3..1e3),
            );
            let v = fields[i % 3].perlin(p);
            max_seen = max_seen.max(v.abs());
        }
        assert!(max_seen <= 1.0);
        assert!(max_seen > 0.5, "suspiciously flat field: {max_seen}");
    }
}
