use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use glam::DVec3;
use rayon::prelude::*;

use crate::error::Result;
use crate::graph::{generate_graph, Graph};
use crate::io::{write_file, write_png, Axes, PipelineConfig};
use crate::texture::{encode_srgb, Material};

pub const PROOF_SHEET_SIZE: u32 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreviewKind {
    Graph,
    Texture,
}

/// Quick looks that skip the expensive stages. Files go to `dir/preview`;
/// no stage artifact or manifest is touched.
pub fn preview(config: &PipelineConfig, kind: PreviewKind, dir: &Path, axes: Axes) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let out = dir.join("preview");
    match kind {
        PreviewKind::Graph => {
            let graph = generate_graph(&config.graph)?;
            let path = out.join("graph.ply");
            write_file(&path, &graph_line_set(&graph, axes))?;
            Ok(vec![path])
        }
        PreviewKind::Texture => {
            let path = out.join("material.png");
            let n = PROOF_SHEET_SIZE;
            write_png(&path, n, n, 3, &proof_sheet(config, n)?)?;
            Ok(vec![path])
        }
    }
}

/// Skeleton as a binary PLY line set: one vertex per node carrying its
/// radius, one edge record per graph edge.
pub fn graph_line_set(graph: &Graph, axes: Axes) -> Vec<u8> {
    let edges = graph.edge_list();
    let mut head = String::from("ply\nformat binary_little_endian 1.0\n");
    let _ = writeln!(head, "comment cave skeleton, axes: {}", axes.describe());
    let _ = writeln!(head, "element vertex {}", graph.len());
    head.push_str("property double x\nproperty double y\nproperty double z\nproperty double radius\n");
    let _ = writeln!(head, "element edge {}", edges.len());
    head.push_str("property int vertex1\nproperty int vertex2\nend_header\n");
    let mut out = head.into_bytes();
    for n in &graph.nodes {
        for c in axes.apply(n.coordinates).to_array() {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&n.radius.to_le_bytes());
    }
    for (a, b) in edges {
        out.extend_from_slice(&(a as i32).to_le_bytes());
        out.extend_from_slice(&(b as i32).to_le_bytes());
    }
    out
}

/// Albedo of the configured material on the `z = 0` plane, over a square
/// of side `8 * radius_max` centred on the origin. RGB rows top to bottom.
pub fn proof_sheet(config: &PipelineConfig, size: u32) -> Result<Vec<u8>> {
    let material = Material::new(&config.material)?;
    let side = 8.0 * config.graph.radius_max;
    let n = size as usize;
    let rows: Vec<Vec<u8>> = (0..n)
        .into_par_iter()
        .map(|row| {
            let y = ((n - 1 - row) as f64 + 0.5) / n as f64 - 0.5;
            (0..n)
                .flat_map(|i| {
                    let x = (i as f64 + 0.5) / n as f64 - 0.5;
                    let s = material.eval(DVec3::new(x * side, y * side, 0.0), DVec3::Z);
                    s.albedo.map(encode_srgb)
                })
                .collect()
        })
        .collect();
    Ok(rows.concat())
}
