use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::GraphConfig;
use crate::mesh::MeshConfig;
use crate::texture::MaterialParams;

pub const CONFIG_VERSION: u32 = 1;
pub const MIN_TEXTURE_RESOLUTION: u32 = 256;
pub const MAX_TEXTURE_RESOLUTION: u32 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Obj,
    Ply,
}

/// Everything a run depends on. Serialized with every key filled in, so a
/// manifest snapshot reproduces the run on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub graph: GraphConfig,
    pub mesh: MeshConfig,
    pub material: MaterialParams,
    pub texture_resolution: u32,
    pub output_formats: Vec<OutputFormat>,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset_name: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            graph: GraphConfig::default(),
            mesh: MeshConfig::default(),
            material: MaterialParams::default(),
            texture_resolution: 1024,
            output_formats: vec![OutputFormat::Obj, OutputFormat::Ply],
            output_dir: PathBuf::from("out"),
            preset_name: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::config(
                "version",
                format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version),
            ));
        }
        self.graph.validate()?;
        self.mesh.validate_with(self.graph.radius_min)?;
        self.material.validate()?;
        let r = self.texture_resolution;
        if !(r.is_power_of_two() && (MIN_TEXTURE_RESOLUTION..=MAX_TEXTURE_RESOLUTION).contains(&r)) {
            return Err(Error::config(
                "texture_resolution",
                format!("{r} is not a power of two in [{MIN_TEXTURE_RESOLUTION}, {MAX_TEXTURE_RESOLUTION}]"),
            ));
        }
        if self.output_formats.is_empty() {
            return Err(Error::config("output_formats", "at least one of \"obj\", \"ply\" is required"));
        }
        let mut seen = self.output_formats.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.output_formats.len() {
            return Err(Error::config("output_formats", "formats must not repeat"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::config("output_dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.output_formats.contains(&format)
    }

    /// Pretty JSON with every effective value.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses a config document.
///
/// Absent keys take their defaults. Top-level `seed` and `node_count_target`
/// are shorthands for the `graph` keys of the same name; giving both forms
/// with different values is an error.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let Some(obj) = doc.as_object_mut() else {
        return Err(Error::Parse {
            path: String::new(),
            message: "config must be a JSON object".into(),
        });
    };
    for key in ["seed", "node_count_target"] {
        let Some(short) = obj.remove(key) else { continue };
        let graph = obj
            .entry("graph")
            .or_insert_with(|| Value::Object(Default::default()));
        let Some(graph) = graph.as_object_mut() else {
            return Err(Error::Parse {
                path: "graph".into(),
                message: "expected an object".into(),
            });
        };
        match graph.get(key) {
            Some(long) if *long != short => {
                return Err(Error::config(
                    format!("{key}, graph.{key}"),
                    format!("shorthand {short} disagrees with graph.{key} = {long}"),
                ));
            }
            _ => {
                graph.insert(key.to_string(), short);
            }
        }
    }
    let config: PipelineConfig = serde_path_to_error::deserialize(&doc).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Loads a config file, or a bundled preset when `path` names one and no
/// such file exists.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    if !path.exists() {
        if let Some(p) = path.to_str().and_then(preset) {
            return Ok(p);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// The sixteen benchmark configurations: layout x chunking x node count x
/// texture resolution.
pub const PRESET_NAMES: [&str; 16] = [
    "single_50n_1k",
    "single_50n_4k",
    "single_250n_1k",
    "single_250n_4k",
    "multi_50n_1k",
    "multi_50n_4k",
    "multi_250n_1k",
    "multi_250n_4k",
    "single_div4_50n_1k",
    "single_div4_50n_4k",
    "single_div4_250n_1k",
    "single_div4_250n_4k",
    "multi_div4_50n_1k",
    "multi_div4_50n_4k",
    "multi_div4_250n_1k",
    "multi_div4_250n_4k",
];

/// Layers used by the multi-layer presets.
pub const MULTI_PRESET_LAYERS: u32 = 3;

pub fn preset(name: &str) -> Option<PipelineConfig> {
    if !PRESET_NAMES.contains(&name) {
        return None;
    }
    let multi = name.starts_with("multi");
    let div4 = name.contains("_div4_");
    let nodes = if name.contains("_250n_") { 250 } else { 50 };
    let resolution = if name.ends_with("_4k") { 4096 } else { 1024 };
    let mut c = PipelineConfig::default();
    c.graph.node_count_target = nodes;
    c.graph.seed = 1;
    if multi {
        c.graph.layers = MULTI_PRESET_LAYERS;
    }
    // Four in-plane divisions; multi-layer caves also split once in z.
    c.mesh.chunk_grid = match (div4, multi) {
        (false, _) => [1, 1, 1],
        (true, false) => [2, 2, 1],
        (true, true) => [2, 2, 2],
    };
    c.texture_resolution = resolution;
    c.output_dir = PathBuf::from("out").join(name);
    c.preset_name = Some(name.to_string());
    Some(c)
}

/// Error for an unknown preset name, listing the valid ones.
pub fn unknown_preset(name: &str) -> Error {
    Error::config(
        "preset",
        format!("unknown preset `{name}`; valid presets: {}", PRESET_NAMES.join(", ")),
    )
}
