use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{Fractal, NoiseParams};

/// Procedural rock: two-tone Perlin colour, darkened Voronoi veins, a Perlin
/// height field for the normal map and humidity-dependent roughness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    /// Linear RGB.
    pub base_color_a: [f64; 3],
    pub base_color_b: [f64; 3],
    pub color_noise: NoiseParams,
    pub vein_noise: NoiseParams,
    pub vein_strength: f64,
    /// World units.
    pub height_amplitude: f64,
    pub height_noise: NoiseParams,
    pub roughness_base: f64,
    pub roughness_variation: f64,
    pub humidity: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            base_color_a: [0.16, 0.13, 0.10],
            base_color_b: [0.42, 0.37, 0.31],
            color_noise: NoiseParams::new(11, 0.15, 4),
            vein_noise: NoiseParams::new(23, 0.35, 1),
            vein_strength: 0.45,
            height_amplitude: 0.04,
            height_noise: NoiseParams::new(37, 1.2, 3),
            roughness_base: 0.7,
            roughness_variation: 0.2,
            humidity: 0.2,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |k: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::config(format!("material.{k}"), format!("{x} must lie in [0, 1]")))
            }
        };
        for (k, c) in [("base_color_a", self.base_color_a), ("base_color_b", self.base_color_b)] {
            for x in c {
                unit(k, x)?;
            }
        }
        unit("vein_strength", self.vein_strength)?;
        unit("roughness_base", self.roughness_base)?;
        unit("roughness_variation", self.roughness_variation)?;
        unit("humidity", self.humidity)?;
        if !(self.height_amplitude.is_finite() && self.height_amplitude >= 0.0) {
            return Err(Error::config("material.height_amplitude", "must be finite and >= 0"));
        }
        if self.roughness_base - self.roughness_variation < 0.0 || self.roughness_base + self.roughness_variation > 1.0 {
            return Err(Error::config(
                "material.roughness_base, material.roughness_variation",
                "roughness_base +/- roughness_variation must stay within [0, 1]",
            ));
        }
        self.color_noise.validate_at("material.color_noise")?;
        self.vein_noise.validate_at("material.vein_noise")?;
        self.height_noise.validate_at("material.height_noise")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSample {
    /// Linear RGB.
    pub albedo: [f64; 3],
    pub height: f64,
    pub roughness: f64,
}

/// Validated material with its noise fields prepared.
#[derive(Debug, Clone)]
pub struct Material {
    params: MaterialParams,
    color: Fractal,
    vein: Fractal,
    height: Fractal,
}

impl Material {
    pub fn new(params: &MaterialParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params: params.clone(),
            color: Fractal::new(params.color_noise)?,
            vein: Fractal::new(params.vein_noise)?,
            height: Fractal::new(params.height_noise)?,
        })
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    /// Only the height term; used for normal-map differences.
    #[inline]
    pub fn height(&self, p: DVec3) -> f64 {
        if self.params.height_amplitude == 0.0 {
            return 0.0;
        }
        self.height.perlin(p) * self.params.height_amplitude
    }

    pub fn eval(&self, p: DVec3, _n: DVec3) -> MaterialSample {
        let m = &self.params;
        let c = self.color.perlin(p);
        let t = (c + 1.0) * 0.5;
        let edge = if m.vein_strength > 0.0 {
            let f1 = self.vein.voronoi(p).f1 * m.vein_noise.frequency;
            smoothstep(0.4, 0.8, f1)
        } else {
            0.0
        };
        let dark = 1.0 - m.vein_strength * edge;
        let albedo = [0, 1, 2].map(|k| (m.base_color_a[k] + (m.base_color_b[k] - m.base_color_a[k]) * t) * dark);
        MaterialSample {
            albedo,
            height: self.height(p),
            roughness: roughness(m, c).clamp(0.0, 1.0),
        }
    }
}

/// Unclamped roughness for colour-noise value `c`.
fn roughness(m: &MaterialParams, c: f64) -> f64 {
    m.roughness_base + m.roughness_variation * c - 0.5 * m.humidity
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Evaluates the material at surface point `p` with unit normal `n`.
pub fn material_eval(p: DVec3, n: DVec3, params: &MaterialParams) -> Result<MaterialSample> {
    Ok(Material::new(params)?.eval(p, n))
}
