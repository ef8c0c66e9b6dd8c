use glam::DVec3;
use rayon::prelude::*;

use super::{validate_mesh, MeshConfig, TriMesh};
use crate::error::{Error, Result};

/// Taubin smoothing: each iteration is a shrinking step with `taubin_lambda`
/// followed by an inflating step with `taubin_mu`, both using the uniform
/// umbrella Laplacian. Connectivity is untouched.
pub fn smooth_mesh(mesh: &TriMesh, config: &MeshConfig) -> Result<TriMesh> {
    let report = validate_mesh(mesh);
    if !report.is_closed() {
        return Err(Error::Contract(format!(
            "smoothing needs a closed mesh ({} boundary edges, {} non-manifold edges)",
            report.boundary_edges, report.nonmanifold_edges
        )));
    }
    if config.smooth_iterations == 0 {
        return Ok(mesh.clone());
    }
    let (offsets, neighbours) = mesh.vertex_neighbours();
    let mut positions = mesh.positions.clone();
    let mut scratch = positions.clone();
    for _ in 0..config.smooth_iterations {
        for factor in [config.taubin_lambda, config.taubin_mu] {
            scratch.par_iter_mut().enumerate().for_each(|(v, out)| {
                let ring = &neighbours[offsets[v]..offsets[v + 1]];
                let p = positions[v];
                if ring.is_empty() {
                    *out = p;
                    return;
                }
                let sum = ring.iter().fold(DVec3::ZERO, |s, &n| s + positions[n as usize]);
                *out = p + (sum / ring.len() as f64 - p) * factor;
            });
            std::mem::swap(&mut positions, &mut scratch);
        }
    }
    let mut out = TriMesh {
        positions,
        normals: Vec::new(),
        triangles: mesh.triangles.clone(),
        uvs: mesh.uvs.clone(),
    };
    out.compute_normals();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::tetrahedron;
    use crate::mesh::sdf::sdf_eval;
    use crate::mesh::sdf::tests::capsule_graph;
    use crate::mesh::skin_graph;

    #[test]
    fn zero_iterations_is_identity() {
        let t = tetrahedron();
        let c = MeshConfig { smooth_iterations: 0, ..Default::default() };
        assert_eq!(smooth_mesh(&t, &c).unwrap(), t);
    }

    #[test]
    fn open_mesh_rejected() {
        let mut t = tetrahedron();
        t.triangles.pop();
        assert!(matches!(smooth_mesh(&t, &MeshConfig::default()), Err(Error::Contract(_))));
    }

    #[test]
    fn capsule_keeps_shape_and_volume() {
        let g = capsule_graph(DVec3::ZERO, 6.0, DVec3::new(14.0, 3.0, 2.0), 4.0);
        let c = MeshConfig { voxel_size: 0.4, ..Default::default() };
        let raw = skin_graph(&g, &c).unwrap();
        let smooth = smooth_mesh(&raw, &c).unwrap();
        assert_eq!(raw.triangles, smooth.triangles);
        assert_eq!(raw.vertex_count(), smooth.vertex_count());
        let r = validate_mesh(&smooth);
        assert!(r.is_closed_manifold() && r.euler_characteristic == 2);
        let worst = |m: &TriMesh| m.positions.iter().map(|p| sdf_eval(&g, 0.5, *p).abs()).fold(0.0, f64::max);
        assert!(worst(&smooth) <= worst(&raw) + c.voxel_size);
        let dv = (smooth.volume() - raw.volume()).abs() / raw.volume();
        assert!(dv <= 0.05, "{dv}");
    }
}
