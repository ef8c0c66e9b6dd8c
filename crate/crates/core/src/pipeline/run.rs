use std::path::{Path, PathBuf};
use std::time::Instant;

use glam::DVec3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{generate_graph, graph_to_json, json_to_graph, Graph};
use crate::io::{
    axes_note, export_obj, export_ply, load_manifest, read_manifest, read_ply, write_file, write_manifest,
    write_ply_mesh, write_texture_set, Axes, OutputFormat, PipelineConfig, RunManifest, Stage,
};
use crate::mesh::{chunk_mesh, decimate, skin_graph, smooth_mesh, validate_mesh, Chunk, DecimationReport, MeshReport};
use crate::texture::{texture_chunk, Material};

pub const GRAPH_FILE: &str = "graph.json";
pub const CHUNK_INDEX_FILE: &str = "stage/chunks.json";
pub const MESH_REPORT_FILE: &str = "stage/mesh_report.json";
pub const AXES_FILE: &str = "mesh/AXES.txt";

/// Which stages to run. `None` runs everything, or with `resume` whatever
/// the existing manifest has not finished yet.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StageSelector {
    pub stages: Option<Vec<Stage>>,
    pub resume: bool,
}

impl StageSelector {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn new(stages: Vec<Stage>, resume: bool) -> Result<Self> {
        check_contiguous(&stages)?;
        Ok(Self {
            stages: Some(stages),
            resume,
        })
    }

    /// Parses a comma-separated list such as `mesh,texture`.
    pub fn parse(list: &str, resume: bool) -> Result<Self> {
        let stages = list
            .split(',')
            .map(|s| {
                Stage::parse(s.trim())
                    .ok_or_else(|| Error::config("stages", format!("unknown stage `{s}`; expected graph, mesh or texture")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(stages, resume)
    }
}

fn check_contiguous(stages: &[Stage]) -> Result<()> {
    if stages.is_empty() {
        return Err(Error::config("stages", "select at least one stage"));
    }
    for w in stages.windows(2) {
        if w[1] as usize != w[0] as usize + 1 {
            return Err(Error::config(
                "stages",
                format!(
                    "stages must be contiguous and in order graph, mesh, texture; `{}` cannot follow `{}`",
                    w[1].name(),
                    w[0].name()
                ),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `config.output_dir`.
    pub out_dir: Option<PathBuf>,
    pub z_up: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub stages_run: Vec<Stage>,
    /// Files written by this invocation, manifest last.
    pub files: Vec<PathBuf>,
}

/// Mesh-stage statistics kept next to the chunk checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub raw_triangles: usize,
    pub decimation: DecimationSummary,
    pub chunks: usize,
    pub chunk_triangles: usize,
    pub closed_manifold: bool,
    pub euler_characteristic: i64,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecimationSummary {
    pub input_triangles: usize,
    pub target_triangles: usize,
    pub output_triangles: usize,
    pub reached_target: bool,
}

impl From<&DecimationReport> for DecimationSummary {
    fn from(r: &DecimationReport) -> Self {
        Self {
            input_triangles: r.input_triangles,
            target_triangles: r.target_triangles,
            output_triangles: r.output_triangles,
            reached_target: r.reached_target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChunkEntry {
    index: [u32; 3],
    bounds: [[f64; 3]; 2],
}

fn stage_of(rel: &str) -> Stage {
    if rel.starts_with("textures/") {
        Stage::Texture
    } else if rel == GRAPH_FILE {
        Stage::Graph
    } else {
        Stage::Mesh
    }
}

/// Top-level keys (dotted) on which two configs differ, ignoring where
/// the output goes and the preset label.
pub fn config_differences(a: &PipelineConfig, b: &PipelineConfig) -> Vec<String> {
    fn walk(prefix: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => {
                let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
                keys.sort();
                keys.dedup();
                for k in keys {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    match (x.get(k), y.get(k)) {
                        (Some(u), Some(v)) => walk(&p, u, v, out),
                        _ => out.push(p),
                    }
                }
            }
            _ if a != b => out.push(prefix.to_string()),
            _ => {}
        }
    }
    let strip = |c: &PipelineConfig| {
        let mut c = c.clone();
        c.output_dir = PathBuf::new();
        c.preset_name = None;
        serde_json::to_value(c).expect("config serializes")
    };
    let mut out = Vec::new();
    walk("", &strip(a), &strip(b), &mut out);
    out
}

/// Runs the selected stages, writing artifacts and the manifest under the
/// output directory. The manifest is rewritten after every stage, so a run
/// stopped between stages can be resumed.
pub fn run_pipeline(config: &PipelineConfig, selector: &StageSelector, options: &RunOptions) -> Result<RunOutcome> {
    config.validate()?;
    let out = options.out_dir.clone().unwrap_or_else(|| config.output_dir.clone());
    let mut config = config.clone();
    config.output_dir = out.clone();
    let axes = Axes::from_z_up(options.z_up);

    let prior = if selector.resume { Some(load_manifest(&out)?) } else { None };
    let stages = match (&selector.stages, &prior) {
        (Some(s), _) => {
            check_contiguous(s)?;
            s.clone()
        }
        (None, Some(m)) => Stage::ALL.into_iter().filter(|s| !m.stages.get(*s)).collect(),
        (None, None) => Stage::ALL.to_vec(),
    };
    let mut files = Vec::new();
    let Some(&first) = stages.first() else {
        log::info!("all stages already complete in {}", out.display());
        let manifest = prior.expect("resume with nothing left implies a manifest");
        return Ok(RunOutcome {
            out_dir: out,
            manifest,
            stages_run: stages,
            files,
        });
    };

    let mut manifest = match prior {
        Some(m) if first != Stage::Graph => {
            let diff = config_differences(&m.config, &config);
            if !diff.is_empty() {
                return Err(Error::config(
                    diff.join(", "),
                    "differs from the configuration recorded in the manifest; rerun from the graph stage or restore the recorded value",
                ));
            }
            let upstream = Stage::ALL[first as usize - 1];
            if !m.stages.get(upstream) {
                return Err(Error::Contract(format!(
                    "stage `{}` needs the `{}` stage, which the manifest in {} does not record as complete",
                    first.name(),
                    upstream.name(),
                    out.display()
                )));
            }
            m
        }
        Some(_) => RunManifest::new(config.clone(), options.z_up),
        None => {
            if first != Stage::Graph {
                return Err(Error::Contract(format!(
                    "stage `{}` needs the earlier stages; run them first or pass --resume",
                    first.name()
                )));
            }
            RunManifest::new(config.clone(), options.z_up)
        }
    };
    // A fresh run clears artifacts a previous manifest in the same place
    // recorded; a resumed run drops only what it is about to redo.
    let old = if first == Stage::Graph { read_manifest(&out).ok() } else { None };
    let drop_from = |m: &mut RunManifest, remove: &dyn Fn(&str) -> bool| {
        let gone: Vec<String> = m.artifacts.keys().filter(|r| remove(r)).cloned().collect();
        for rel in gone {
            m.artifacts.remove(&rel);
            let _ = std::fs::remove_file(out.join(&rel));
        }
    };
    if let Some(mut old) = old {
        drop_from(&mut old, &|_| true);
    }
    drop_from(&mut manifest, &|r| stage_of(r) >= first && !(first == Stage::Texture && stage_of(r) == Stage::Mesh));
    for s in Stage::ALL.into_iter().filter(|s| *s >= first) {
        manifest.stages.set(s, false);
        manifest.timings.remove(s.name());
    }
    manifest.config = config.clone();
    manifest.z_up = options.z_up;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    for &stage in &stages {
        let t0 = Instant::now();
        log::info!("stage {} started", stage.name());
        let written = match stage {
            Stage::Graph => graph_stage(&config, &out)?,
            Stage::Mesh => mesh_stage(&config, &out, axes)?,
            Stage::Texture => texture_stage(&config, &out, axes)?,
        };
        for rel in &written {
            manifest.record(&out, rel)?;
            files.push(out.join(rel));
        }
        let secs = t0.elapsed().as_secs_f64();
        manifest.stages.set(stage, true);
        manifest.timings.insert(stage.name().to_string(), secs);
        write_manifest(&manifest, &out)?;
        log::info!("stage {} finished in {secs:.2}s, {} files", stage.name(), written.len());
    }
    files.push(out.join(crate::io::MANIFEST_FILE));
    Ok(RunOutcome {
        out_dir: out,
        manifest,
        stages_run: stages,
        files,
    })
}

fn rel_of(out: &Path, p: &Path) -> String {
    let rel = p.strip_prefix(out).unwrap_or(p);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s.into_bytes()
}

fn graph_stage(config: &PipelineConfig, out: &Path) -> Result<Vec<String>> {
    let graph = generate_graph(&config.graph)?;
    log::info!("graph: {} nodes on {} layers", graph.len(), graph.layers);
    write_file(&out.join(GRAPH_FILE), &json_bytes(&graph_to_json(&graph, &config.graph)))?;
    Ok(vec![GRAPH_FILE.to_string()])
}

/// Reads the graph document written by the graph stage.
pub fn read_graph(out: &Path) -> Result<Graph> {
    let path = out.join(GRAPH_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(json_to_graph(&doc)?.0)
}

fn mesh_stage(config: &PipelineConfig, out: &Path, axes: Axes) -> Result<Vec<String>> {
    let graph = read_graph(out)?;
    let raw = skin_graph(&graph, &config.mesh)?;
    let smooth = smooth_mesh(&raw, &config.mesh)?;
    let (mesh, dec) = decimate(&smooth, &config.mesh)?;
    let report = validate_mesh(&mesh);
    if !report.is_closed_manifold() {
        log::warn!("decimated mesh is not a closed oriented manifold: {report:?}");
    }
    let chunks = chunk_mesh(&mesh, &config.mesh, graph.layers);
    log::info!(
        "mesh: {} raw triangles, {} after decimation, {} chunks",
        raw.triangle_count(),
        mesh.triangle_count(),
        chunks.len()
    );
    let summary = MeshSummary {
        raw_triangles: raw.triangle_count(),
        decimation: (&dec).into(),
        chunks: chunks.len(),
        chunk_triangles: chunks.iter().map(|c| c.mesh.triangle_count()).sum(),
        closed_manifold: report.is_closed_manifold(),
        euler_characteristic: report.euler_characteristic,
        components: report.components,
    };
    let entries: Vec<ChunkEntry> = chunks
        .iter()
        .map(|c| ChunkEntry {
            index: c.index,
            bounds: [c.bounds.0.to_array(), c.bounds.1.to_array()],
        })
        .collect();

    let mut written = vec![CHUNK_INDEX_FILE.to_string(), MESH_REPORT_FILE.to_string()];
    write_file(&out.join(CHUNK_INDEX_FILE), &json_bytes(&entries))?;
    write_file(&out.join(MESH_REPORT_FILE), &json_bytes(&summary))?;
    let per_chunk: Vec<Vec<String>> = chunks
        .par_iter()
        .map(|c| {
            let stage = format!("stage/{}.ply", c.name());
            write_ply_mesh(&out.join(&stage), &c.mesh, Axes::ZUp)?;
            let mut rels = vec![stage];
            rels.extend(write_chunk_meshes(c, config, out, axes)?);
            Ok(rels)
        })
        .collect::<Result<_>>()?;
    written.extend(per_chunk.into_iter().flatten());
    write_file(&out.join(AXES_FILE), axes_note(axes).as_bytes())?;
    written.push(AXES_FILE.to_string());
    Ok(written)
}

/// Exported mesh files of one chunk in the configured formats.
fn write_chunk_meshes(chunk: &Chunk, config: &PipelineConfig, out: &Path, axes: Axes) -> Result<Vec<String>> {
    let dir = out.join("mesh");
    let one = std::slice::from_ref(chunk);
    let mut paths = Vec::new();
    if config.wants(OutputFormat::Obj) {
        paths.extend(export_obj(one, &dir, axes)?);
    }
    if config.wants(OutputFormat::Ply) {
        paths.extend(export_ply(one, &dir, axes)?);
    }
    Ok(paths.iter().map(|p| rel_of(out, p)).collect())
}

/// Reloads the chunk checkpoints written by the mesh stage.
pub fn read_chunks(out: &Path) -> Result<Vec<Chunk>> {
    let path = out.join(CHUNK_INDEX_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let entries: Vec<ChunkEntry> = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })?;
    entries
        .into_iter()
        .map(|e| {
            let [i, j, k] = e.index;
            let ply = out.join(format!("stage/chunk_{i}_{j}_{k}.ply"));
            let mesh = read_ply(&ply)?.to_trimesh(Axes::ZUp);
            Ok(Chunk {
                index: e.index,
                mesh,
                bounds: (DVec3::from_array(e.bounds[0]), DVec3::from_array(e.bounds[1])),
                textures: None,
            })
        })
        .collect()
}

fn texture_stage(config: &PipelineConfig, out: &Path, axes: Axes) -> Result<Vec<String>> {
    let material = Material::new(&config.material)?;
    let res = config.texture_resolution;
    let mut written = Vec::new();
    for mut chunk in read_chunks(out)? {
        let t0 = Instant::now();
        let atlas = texture_chunk(&mut chunk, &material, res)?;
        let set = chunk.textures.as_ref().expect("texture_chunk stores textures");
        let pngs = write_texture_set(&out.join("textures"), &chunk.name(), set)?;
        written.extend(pngs.iter().map(|p| rel_of(out, p)));
        written.extend(write_chunk_meshes(&chunk, config, out, axes)?);
        log::info!(
            "texture: {} with {} charts at {res}px in {:.2}s",
            chunk.name(),
            atlas.charts.len(),
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(written)
}

/// Findings of `validate_run`.
#[derive(Debug, Clone, Serialize)]
pub struct RunValidation {
    /// Artifacts that are missing or whose digest changed.
    pub stale: Vec<(String, String)>,
    /// The chunk checkpoints welded back into one mesh.
    pub mesh: Option<MeshReport>,
    pub chunks: Vec<(String, MeshReport)>,
}

impl RunValidation {
    pub fn is_ok(&self) -> bool {
        self.stale.is_empty() && self.mesh.as_ref().is_none_or(|m| m.is_closed_manifold())
    }
}

/// Audits every digest in the manifest and checks the meshed chunks, which
/// together must form a closed oriented manifold.
pub fn validate_run(out: &Path) -> Result<RunValidation> {
    let manifest = read_manifest(out)?;
    let stale = crate::io::audit_artifacts(&manifest, out);
    let mut v = RunValidation {
        stale,
        mesh: None,
        chunks: Vec::new(),
    };
    if manifest.stages.mesh && v.stale.iter().all(|(r, _)| !r.starts_with("stage/")) {
        let chunks = read_chunks(out)?;
        v.chunks = chunks.iter().map(|c| (c.name(), validate_mesh(&c.mesh))).collect();
        v.mesh = Some(validate_mesh(&weld_chunks(&chunks)));
    }
    Ok(v)
}

/// Joins chunk meshes, merging vertices with identical coordinates.
pub fn weld_chunks(chunks: &[Chunk]) -> crate::mesh::TriMesh {
    let mut index = std::collections::HashMap::new();
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for c in chunks {
        let map: Vec<u32> = c
            .mesh
            .positions
            .iter()
            .map(|p| {
                *index.entry(p.to_array().map(f64::to_bits)).or_insert_with(|| {
                    positions.push(*p);
                    (positions.len() - 1) as u32
                })
            })
            .collect();
        triangles.extend(c.mesh.triangles.iter().map(|t| t.map(|i| map[i as usize])));
    }
    crate::mesh::TriMesh::new(positions, triangles)
}
