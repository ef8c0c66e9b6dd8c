//! Per-chunk UV atlases and baked colour, normal and roughness images.

mod atlas;
mod bake;
mod material;

use crate::error::Result;
use crate::mesh::Chunk;

pub use atlas::{build_uv_atlas, Axis, Chart, UVAtlas, CHART_PAD};
pub use bake::{
    bake_chunk, check_resolution, decode_normal, encode_srgb, encode_unit, TextureSet, MAX_RESOLUTION,
    MIN_RESOLUTION,
};
pub use material::{material_eval, Material, MaterialParams, MaterialSample};

/// Builds the atlas for `chunk`, stores its UVs on the chunk mesh and bakes
/// the chunk's textures.
pub fn texture_chunk(chunk: &mut Chunk, material: &Material, resolution: u32) -> Result<UVAtlas> {
    check_resolution(resolution)?;
    let atlas = build_uv_atlas(&chunk.mesh, resolution)?;
    let set = bake_chunk(&chunk.mesh, &atlas, material, resolution)?;
    chunk.mesh.uvs = Some(atlas.uvs.clone());
    chunk.textures = Some(set);
    Ok(atlas)
}
