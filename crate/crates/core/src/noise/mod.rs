//! Deterministic noise fields and angular sampling weights.

mod angular;
mod perlin;
mod voronoi;

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use angular::{
    gaussian_weights, hybrid_weights, perlin_weights, sample_section, AngularWeights, SECTIONS,
};
pub use perlin::Fractal;
pub use voronoi::VoronoiSample;

/// Parameters of a fractal noise field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    pub seed: u64,
    /// Cycles per world unit of the base octave.
    pub frequency: f64,
    pub octaves: u32,
    pub lacunarity: f64,
    pub gain: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            seed: 0,
            frequency: 1.0,
            octaves: 1,
            lacunarity: 2.0,
            gain: 0.5,
        }
    }
}

impl NoiseParams {
    pub fn new(seed: u64, frequency: f64, octaves: u32) -> Self {
        Self {
            seed,
            frequency,
            octaves,
            ..Self::default()
        }
    }

    /// Checks the ranges, naming offending keys relative to `prefix`.
    pub fn validate_at(&self, prefix: &str) -> Result<()> {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::config(key("frequency"), "must be finite and > 0"));
        }
        if self.octaves < 1 {
            return Err(Error::config(key("octaves"), "must be >= 1"));
        }
        if !(self.lacunarity.is_finite() && self.lacunarity > 1.0) {
            return Err(Error::config(key("lacunarity"), "must be finite and > 1"));
        }
        if !(self.gain > 0.0 && self.gain < 1.0) {
            return Err(Error::config(key("gain"), "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_at("")
    }
}

/// Fractal gradient noise at `p`, in `[-1, 1]`.
pub fn perlin3(p: DVec3, params: &NoiseParams) -> Result<f64> {
    Ok(Fractal::new(*params)?.perlin(p))
}

/// Nearest-feature (F1) cellular noise at `p`.
///
/// Only the base frequency is used; octave settings do not apply to the
/// cellular field.
pub fn voronoi3(p: DVec3, params: &NoiseParams) -> Result<VoronoiSample> {
    Ok(Fractal::new(*params)?.voronoi(p))
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of an integer lattice cell under `seed`.
#[inline]
pub(crate) fn hash3(seed: u64, x: i64, y: i64, z: i64) -> u64 {
    hash_z(hash_y(hash_x(hash_seed(seed), x), y), z)
}

// The stages of `hash3`, exposed so lattice loops can share prefixes.
#[inline]
pub(crate) fn hash_seed(seed: u64) -> u64 {
    mix64(seed ^ 0x9E37_79B9_7F4A_7C15)
}

#[inline]
pub(crate) fn hash_x(h: u64, x: i64) -> u64 {
    mix64(h ^ (x as u64).wrapping_mul(0xA24B_AED4_963E_E407))
}

#[inline]
pub(crate) fn hash_y(h: u64, y: i64) -> u64 {
    mix64(h ^ (y as u64).wrapping_mul(0x9FB2_1C65_1E98_DF25))
}

#[inline]
pub(crate) fn hash_z(h: u64, z: i64) -> u64 {
    mix64(h ^ (z as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
}

/// Maps the top 53 bits of a hash to `[0, 1)`.
#[inline]
pub(crate) fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        let mut p = NoiseParams::default();
        p.frequency = 0.0;
        assert!(matches!(perlin3(DVec3::ZERO, &p), Err(Error::Config { .. })));
        let mut p = NoiseParams::default();
        p.octaves = 0;
        assert!(voronoi3(DVec3::ZERO, &p).is_err());
        let mut p = NoiseParams::default();
        p.lacunarity = 1.0;
        assert!(p.validate().is_err());
        let mut p = NoiseParams::default();
        p.gain = 1.0;
        let err = p.validate_at("material.color_noise").unwrap_err();
        assert!(err.to_string().contains("material.color_noise.gain"));
    }

    #[test]
    fn unit_f64_range() {
        assert_eq!(unit_f64(0), 0.0);
        assert!(unit_f64(u64::MAX) < 1.0);
    }
}
