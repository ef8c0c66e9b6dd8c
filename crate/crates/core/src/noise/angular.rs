use std::f64::consts::TAU;

use glam::DVec3;
use rand::Rng;

use super::{Fractal, NoiseParams};
use crate::error::{Error, Result};

/// Number of one-degree sections around a node's circle.
pub const SECTIONS: usize = 360;

/// Spawn probabilities for the 360 one-degree sections around a node.
///
/// Section `i` is centred on the direction `i` degrees counter-clockwise from
/// +X. The weights always sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularWeights(Box<[f64; SECTIONS]>);

impl AngularWeights {
    /// Normalizes raw non-negative weights.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        if raw.len() != SECTIONS {
            return Err(Error::Contract(format!(
                "angular weights need {SECTIONS} sections, got {}",
                raw.len()
            )));
        }
        if let Some(i) = raw.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Contract(format!(
                "angular weight {i} is {} (must be finite and >= 0)",
                raw[i]
            )));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::DegenerateDistribution(
                "every angular section has zero weight".into(),
            ));
        }
        let mut out = Box::new([0.0; SECTIONS]);
        for (o, w) in out.iter_mut().zip(raw) {
            *o = w / sum;
        }
        Ok(Self(out))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0[..]
    }

    pub fn get(&self, section: usize) -> f64 {
        self.0[section]
    }

    /// Index of the largest weight (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.0.iter().enumerate() {
            if *w > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// Zeroes every section within `half_angle_deg` (inclusive) of
    /// `center_deg`, then renormalizes.
    pub fn forbid_sector(&self, center_deg: f64, half_angle_deg: f64) -> Result<Self> {
        let mut raw = *self.0;
        for (i, w) in raw.iter_mut().enumerate() {
            if circular_distance_deg(i as f64, center_deg) <= half_angle_deg {
                *w = 0.0;
            }
        }
        Self::from_raw(&raw)
    }
}

/// Absolute angular difference folded into `[0, 180]`.
pub fn circular_distance_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Wrapped Gaussian over the sections, centred on `mean_deg`.
pub fn gaussian_weights(mean_deg: f64, sigma_deg: f64) -> Result<AngularWeights> {
    if !(sigma_deg.is_finite() && sigma_deg > 0.0) {
        return Err(Error::config("sigma_deg", "must be finite and > 0"));
    }
    if !mean_deg.is_finite() {
        return Err(Error::config("mean_deg", "must be finite"));
    }
    let mut raw = [0.0; SECTIONS];
    for (i, w) in raw.iter_mut().enumerate() {
        let d = circular_distance_deg(i as f64, mean_deg) / sigma_deg;
        *w = (-0.5 * d * d).exp();
    }
    AngularWeights::from_raw(&raw)
}

/// Periodic gradient noise around the circle, shifted to be non-negative.
///
/// The noise is sampled on a circle of circumference `frequency` lattice
/// units, so the pattern closes seamlessly at 360 degrees and shows about
/// `frequency` bumps per revolution.
pub fn perlin_weights(seed: u64, frequency: f64) -> Result<AngularWeights> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::config("frequency", "must be finite and > 0"));
    }
    let field = Fractal::new(NoiseParams::new(seed, 1.0, 1))?;
    let radius = frequency / TAU;
    // Offset keeps the circle off lattice points, where the noise is pinned to 0.
    let centre = DVec3::new(0.5, 0.5, 0.5);
    let mut raw = [0.0; SECTIONS];
    for (i, w) in raw.iter_mut().enumerate() {
        let theta = (i as f64).to_radians();
        let p = centre + DVec3::new(theta.cos() * radius, theta.sin() * radius, 0.0);
        *w = 0.5 * (field.perlin(p) + 1.0);
    }
    AngularWeights::from_raw(&raw)
}

/// Convex combination `(1 - blend) * g + blend * p`, renormalized.
pub fn hybrid_weights(
    g: &AngularWeights,
    p: &AngularWeights,
    blend: f64,
) -> Result<AngularWeights> {
    if !(0.0..=1.0).contains(&blend) {
        return Err(Error::config("blend", "must lie in [0, 1]"));
    }
    if blend == 0.0 {
        return Ok(g.clone());
    }
    if blend == 1.0 {
        return Ok(p.clone());
    }
    let mut raw = [0.0; SECTIONS];
    for (i, w) in raw.iter_mut().enumerate() {
        *w = (1.0 - blend) * g.get(i) + blend * p.get(i);
    }
    AngularWeights::from_raw(&raw)
}

/// Draws a section index with probability equal to its weight.
///
/// Consumes exactly one `f64` from `rng`.
pub fn sample_section<R: Rng + ?Sized>(w: &AngularWeights, rng: &mut R) -> Result<usize> {
    let total: f64 = w.as_slice().iter().sum();
    let last_positive = w
        .as_slice()
        .iter()
        .rposition(|x| *x > 0.0)
        .ok_or_else(|| Error::DegenerateDistribution("all sections have zero weight".into()))?;
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, x) in w.as_slice().iter().enumerate() {
        acc += x;
        if u < acc && *x > 0.0 {
            return Ok(i);
        }
    }
    Ok(last_positive)
}
