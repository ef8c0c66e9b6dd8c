use std::collections::VecDeque;

use glam::{DVec2, DVec3};
use rayon::prelude::*;

use super::atlas::UVAtlas;
use super::material::Material;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

pub const MIN_RESOLUTION: u32 = 16;
pub const MAX_RESOLUTION: u32 = 8192;

/// Baked images of one chunk, rows stored top to bottom (row 0 is v = 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextureSet {
    pub resolution: u32,
    /// sRGB, 3 bytes per texel.
    pub color: Vec<u8>,
    /// Tangent-space normal, 3 bytes per texel.
    pub normal: Vec<u8>,
    /// Linear grayscale, 1 byte per texel.
    pub roughness: Vec<u8>,
    /// Texels whose centre lies on the surface, before gutter fill.
    pub covered: Vec<bool>,
}

pub fn check_resolution(resolution: u32) -> Result<()> {
    if resolution.is_power_of_two() && (MIN_RESOLUTION..=MAX_RESOLUTION).contains(&resolution) {
        Ok(())
    } else {
        Err(Error::config(
            "texture_resolution",
            format!("{resolution} is not a power of two in [{MIN_RESOLUTION}, {MAX_RESOLUTION}]"),
        ))
    }
}

/// Linear to sRGB transfer, then 8-bit quantization.
pub fn encode_srgb(x: f64) -> u8 {
    let x = x.clamp(0.0, 1.0);
    let s = if x <= 0.003_130_8 { 12.92 * x } else { 1.055 * x.powf(1.0 / 2.4) - 0.055 };
    (s * 255.0).round() as u8
}

/// Maps a unit component in `[-1, 1]` to a byte; 0 maps to 128.
pub fn encode_unit(x: f64) -> u8 {
    ((x * 0.5 + 0.5).clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn decode_normal(rgb: [u8; 3]) -> DVec3 {
    DVec3::new(rgb[0] as f64, rgb[1] as f64, rgb[2] as f64) / 255.0 * 2.0 - DVec3::ONE
}

/// Rasterizes the atlas and evaluates the material at every covered texel.
///
/// The normal map differentiates the height field one texel along each chart
/// axis. Uncovered texels take the value of the nearest covered texel in
/// breadth-first order.
pub fn bake_chunk(mesh: &TriMesh, atlas: &UVAtlas, material: &Material, resolution: u32) -> Result<TextureSet> {
    check_resolution(resolution)?;
    if atlas.resolution != resolution || atlas.uvs.len() != mesh.triangles.len() {
        return Err(Error::Contract(format!(
            "atlas was built for {} triangles at {}px, not {} at {resolution}px",
            atlas.uvs.len(),
            atlas.resolution,
            mesh.triangles.len()
        )));
    }
    let r = resolution as usize;
    let owner = rasterize(atlas, r);
    let delta = atlas.texel_size();

    let rows: Vec<Vec<Option<([u8; 3], [u8; 3], u8)>>> = (0..r)
        .into_par_iter()
        .map(|row| {
            let j = r - 1 - row;
            (0..r)
                .map(|i| {
                    let t = owner[j * r + i];
                    if t == u32::MAX {
                        return None;
                    }
                    let uv = DVec2::new(i as f64 + 0.5, j as f64 + 0.5) / resolution as f64;
                    let (b1, b2) = barycentric(&atlas.uvs[t as usize], uv);
                    let [p0, p1, p2] = mesh.corners(t as usize);
                    let p = p0 + (p1 - p0) * b1 + (p2 - p0) * b2;
                    let axis = atlas.charts[atlas.chart_of[t as usize] as usize].axis;
                    let (du, dv) = axis.basis();
                    let n = (p1 - p0).cross(p2 - p0).normalize_or_zero();
                    let s = material.eval(p, n);
                    let hu = material.height(p + du * delta);
                    let hv = material.height(p + dv * delta);
                    let tn = DVec3::new(-(hu - s.height) / delta, -(hv - s.height) / delta, 1.0).normalize();
                    Some((
                        s.albedo.map(encode_srgb),
                        tn.to_array().map(encode_unit),
                        (s.roughness * 255.0).round() as u8,
                    ))
                })
                .collect()
        })
        .collect();

    let mut set = TextureSet {
        resolution,
        color: vec![0; 3 * r * r],
        normal: vec![0; 3 * r * r],
        roughness: vec![0; r * r],
        covered: vec![false; r * r],
    };
    for (row, texels) in rows.into_iter().enumerate() {
        for (i, texel) in texels.into_iter().enumerate() {
            if let Some((c, n, g)) = texel {
                let k = row * r + i;
                set.color[3 * k..3 * k + 3].copy_from_slice(&c);
                set.normal[3 * k..3 * k + 3].copy_from_slice(&n);
                set.roughness[k] = g;
                set.covered[k] = true;
            }
        }
    }
    dilate(&mut set);
    Ok(set)
}

/// Triangle owning each texel centre (`u32::MAX` if none), rows bottom-up.
/// Ties on shared edges go to the lower triangle index.
fn rasterize(atlas: &UVAtlas, r: usize) -> Vec<u32> {
    let mut owner = vec![u32::MAX; r * r];
    let scale = r as f64;
    for (t, uv) in atlas.uvs.iter().enumerate() {
        let px = uv.map(|c| c * scale);
        let lo = px[0].min(px[1]).min(px[2]);
        let hi = px[0].max(px[1]).max(px[2]);
        let (i0, i1) = (((lo.x - 0.5).ceil().max(0.0)) as usize, ((hi.x - 0.5).floor().min(scale - 1.0)) as usize);
        let (j0, j1) = (((lo.y - 0.5).ceil().max(0.0)) as usize, ((hi.y - 0.5).floor().min(scale - 1.0)) as usize);
        if hi.x < 0.5 || hi.y < 0.5 {
            continue;
        }
        for j in j0..=j1 {
            for i in i0..=i1 {
                if owner[j * r + i] != u32::MAX {
                    continue;
                }
                let c = DVec2::new(i as f64 + 0.5, j as f64 + 0.5) / scale;
                let (b1, b2) = barycentric(uv, c);
                let eps = -1e-9;
                if b1 >= eps && b2 >= eps && 1.0 - b1 - b2 >= eps {
                    owner[j * r + i] = t as u32;
                }
            }
        }
    }
    owner
}

#[inline]
fn barycentric(uv: &[DVec2; 3], p: DVec2) -> (f64, f64) {
    let (e1, e2, d) = (uv[1] - uv[0], uv[2] - uv[0], p - uv[0]);
    let den = e1.perp_dot(e2);
    (d.perp_dot(e2) / den, e1.perp_dot(d) / den)
}

fn dilate(set: &mut TextureSet) {
    let r = set.resolution as usize;
    let mut filled = set.covered.clone();
    let mut queue: VecDeque<usize> = (0..r * r).filter(|&k| filled[k]).collect();
    while let Some(k) = queue.pop_front() {
        let (row, col) = (k / r, k % r);
        let mut next = [None; 4];
        if row > 0 {
            next[0] = Some(k - r);
        }
        if row + 1 < r {
            next[1] = Some(k + r);
        }
        if col > 0 {
            next[2] = Some(k - 1);
        }
        if col + 1 < r {
            next[3] = Some(k + 1);
        }
        for n in next.into_iter().flatten() {
            if filled[n] {
                continue;
            }
            filled[n] = true;
            set.color.copy_within(3 * k..3 * k + 3, 3 * n);
            set.normal.copy_within(3 * k..3 * k + 3, 3 * n);
            set.roughness[n] = set.roughness[k];
            queue.push_back(n);
        }
    }
}
