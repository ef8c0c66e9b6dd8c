//! Tunnel surface: capsule-union distance field, marching cubes, Taubin
//! smoothing, quadric decimation and grid chunking.

mod chunk;
mod decimate;
mod marching;
mod mc_table;
mod sdf;
mod smooth;
mod trimesh;
mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chunk::{chunk_mesh, effective_grid, Chunk};
pub use decimate::{decimate, DecimationReport};
pub use marching::{polygonize, skin_graph, GridSpec};
pub use sdf::{capsule_distance, sdf_eval, Capsule, CapsuleField};
pub use smooth::smooth_mesh;
pub use trimesh::TriMesh;
pub use validate::{validate_mesh, MeshReport};

#[cfg(test)]
pub(crate) use trimesh::fixtures;

/// Default grid budget: 512^3 cells.
pub const DEFAULT_MAX_GRID_CELLS: u64 = 512 * 512 * 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub voxel_size: f64,
    /// Tunnel radius as a multiple of node radius.
    pub radius_scale: f64,
    pub smooth_iterations: u32,
    pub taubin_lambda: f64,
    pub taubin_mu: f64,
    pub decimate_ratio: f64,
    pub chunk_grid: [u32; 3],
    pub max_grid_cells: u64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            voxel_size: 0.5,
            radius_scale: 0.5,
            smooth_iterations: 10,
            taubin_lambda: 0.5,
            taubin_mu: -0.53,
            decimate_ratio: 0.5,
            chunk_grid: [1, 1, 1],
            max_grid_cells: DEFAULT_MAX_GRID_CELLS,
        }
    }
}

impl MeshConfig {
    /// Range checks that do not depend on the graph configuration.
    pub fn validate(&self) -> Result<()> {
        let err = |k: &str, c: String| Err(Error::config(format!("mesh.{k}"), c));
        if !(self.voxel_size.is_finite() && self.voxel_size > 0.0) {
            return err("voxel_size", "must be finite and > 0".into());
        }
        if !(self.radius_scale.is_finite() && self.radius_scale > 0.0) {
            return err("radius_scale", "must be finite and > 0".into());
        }
        if !(self.taubin_lambda > 0.0 && self.taubin_lambda < 1.0) {
            return err("taubin_lambda", "must lie in (0, 1)".into());
        }
        if !(self.taubin_mu > -1.0 && self.taubin_mu < 0.0) {
            return err("taubin_mu", "must lie in (-1, 0)".into());
        }
        if self.taubin_mu.abs() <= self.taubin_lambda {
            return Err(Error::config(
                "mesh.taubin_mu, mesh.taubin_lambda",
                format!(
                    "|taubin_mu| ({}) must exceed taubin_lambda ({})",
                    self.taubin_mu.abs(),
                    self.taubin_lambda
                ),
            ));
        }
        if !(self.decimate_ratio > 0.0 && self.decimate_ratio <= 1.0) {
            return err("decimate_ratio", "must lie in (0, 1]".into());
        }
        if self.chunk_grid.contains(&0) {
            return err("chunk_grid", "every division count must be >= 1".into());
        }
        if self.max_grid_cells == 0 {
            return err("max_grid_cells", "must be >= 1".into());
        }
        Ok(())
    }

    /// Full check, including that tunnels are never thinner than a voxel.
    pub fn validate_with(&self, radius_min: f64) -> Result<()> {
        self.validate()?;
        let thinnest = radius_min * self.radius_scale;
        if self.voxel_size > thinnest {
            return Err(Error::config(
                "mesh.voxel_size, graph.radius_min, mesh.radius_scale",
                format!(
                    "voxel_size ({}) must be <= radius_min * radius_scale ({thinnest})",
                    self.voxel_size
                ),
            ));
        }
        Ok(())
    }
}
