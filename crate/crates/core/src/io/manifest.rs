use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{sha256_file, write_file, PipelineConfig};
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Graph,
    Mesh,
    Texture,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Graph, Stage::Mesh, Stage::Texture];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Graph => "graph",
            Stage::Mesh => "mesh",
            Stage::Texture => "texture",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageFlags {
    pub graph: bool,
    pub mesh: bool,
    pub texture: bool,
}

impl StageFlags {
    pub fn get(&self, s: Stage) -> bool {
        match s {
            Stage::Graph => self.graph,
            Stage::Mesh => self.mesh,
            Stage::Texture => self.texture,
        }
    }

    pub fn set(&mut self, s: Stage, done: bool) {
        match s {
            Stage::Graph => self.graph = done,
            Stage::Mesh => self.mesh = done,
            Stage::Texture => self.texture = done,
        }
    }

    /// Later stages imply earlier ones.
    pub fn is_monotone(&self) -> bool {
        (!self.texture || self.mesh) && (!self.mesh || self.graph)
    }
}

/// Record of a run: the effective config, which stages finished, and a
/// SHA-256 digest of every artifact relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub version: u32,
    pub tool_version: String,
    pub config: PipelineConfig,
    pub z_up: bool,
    pub stages: StageFlags,
    /// Relative path with `/` separators to hex digest.
    pub artifacts: BTreeMap<String, String>,
    /// Seconds per stage, keyed by stage name.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(config: PipelineConfig, z_up: bool) -> Self {
        Self {
            version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            z_up,
            stages: StageFlags::default(),
            artifacts: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    /// Hashes `rel` under `dir` and records it.
    pub fn record(&mut self, dir: &Path, rel: &str) -> Result<()> {
        let digest = sha256_file(&dir.join(rel))?;
        self.artifacts.insert(rel.to_string(), digest);
        Ok(())
    }

    fn check_structure(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Validation(format!(
                "unsupported manifest version {} (expected {MANIFEST_VERSION})",
                self.version
            )));
        }
        if !self.stages.is_monotone() {
            return Err(Error::Validation(format!(
                "stage flags are not monotone (graph {}, mesh {}, texture {}); texture implies mesh implies graph",
                self.stages.graph, self.stages.mesh, self.stages.texture
            )));
        }
        for rel in self.artifacts.keys() {
            let p = Path::new(rel);
            if p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                return Err(Error::Validation(format!("artifact path `{rel}` leaves the output directory")));
            }
        }
        Ok(())
    }
}

pub fn write_manifest(manifest: &RunManifest, dir: &Path) -> Result<()> {
    manifest.check_structure()?;
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&dir.join(MANIFEST_FILE), text.as_bytes())
}

/// Parses `dir/manifest.json` and checks its structure, without touching
/// the artifacts.
pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let manifest: RunManifest = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })?;
    manifest.check_structure()?;
    manifest.config.validate()?;
    Ok(manifest)
}

/// Every recorded artifact that is missing or whose digest differs, with
/// the reason.
pub fn audit_artifacts(manifest: &RunManifest, dir: &Path) -> Vec<(String, String)> {
    manifest
        .artifacts
        .iter()
        .filter_map(|(rel, want)| {
            let path = dir.join(rel);
            if !path.is_file() {
                return Some((rel.clone(), "file is missing".to_string()));
            }
            match sha256_file(&path) {
                Ok(got) if got == *want => None,
                Ok(got) => Some((rel.clone(), format!("digest {got} does not match recorded {want}"))),
                Err(e) => Some((rel.clone(), e.to_string())),
            }
        })
        .collect()
}

/// Reads the manifest and verifies every artifact digest. The first stale
/// artifact is reported.
pub fn load_manifest(dir: &Path) -> Result<RunManifest> {
    let manifest = read_manifest(dir)?;
    if let Some((rel, reason)) = audit_artifacts(&manifest, dir).into_iter().next() {
        return Err(Error::StaleArtifact {
            path: dir.join(rel),
            reason,
        });
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (tempfile::TempDir, RunManifest) {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(PipelineConfig::default(), false);
        for (rel, body) in [("graph.json", &b"{}"[..]), ("textures/chunk_0_0_0_color.png", b"\x89PNG fake")] {
            write_file(&dir.path().join(rel), body).unwrap();
            m.record(dir.path(), rel).unwrap();
        }
        m.stages = StageFlags { graph: true, mesh: true, texture: true };
        m.timings.insert("graph".into(), 0.25);
        (dir, m)
    }

    #[test]
    fn write_then_load_is_equal() {
        let (dir, m) = fixture();
        write_manifest(&m, dir.path()).unwrap();
        assert_eq!(load_manifest(dir.path()).unwrap(), m);
    }

    #[test]
    fn tampered_texture_is_stale() {
        let (dir, m) = fixture();
        write_manifest(&m, dir.path()).unwrap();
        let tex = dir.path().join("textures/chunk_0_0_0_color.png");
        let mut bytes = std::fs::read(&tex).unwrap();
        bytes[3] ^= 1;
        std::fs::write(&tex, bytes).unwrap();
        match load_manifest(dir.path()).unwrap_err() {
            Error::StaleArtifact { path, .. } => assert_eq!(path, tex),
            e => panic!("{e}"),
        }
        std::fs::remove_file(&tex).unwrap();
        let e = load_manifest(dir.path()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("missing"));
    }

    #[test]
    fn non_monotone_stages_rejected() {
        let (dir, mut m) = fixture();
        m.stages.mesh = false;
        assert!(matches!(write_manifest(&m, dir.path()), Err(Error::Validation(_))));
        let mut doc = serde_json::to_value(&m).unwrap();
        doc["stages"]["mesh"] = false.into();
        std::fs::write(dir.path().join(MANIFEST_FILE), doc.to_string()).unwrap();
        assert!(matches!(load_manifest(dir.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_document_names_path() {
        let (dir, m) = fixture();
        let mut doc = serde_json::to_value(&m).unwrap();
        doc["stages"]["graph"] = "yes".into();
        std::fs::write(dir.path().join(MANIFEST_FILE), doc.to_string()).unwrap();
        match load_manifest(dir.path()).unwrap_err() {
            Error::Parse { path, .. } => assert!(path.ends_with("stages.graph"), "{path}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn escaping_paths_rejected() {
        let (dir, mut m) = fixture();
        m.artifacts.insert("../x".into(), "00".into());
        assert!(write_manifest(&m, dir.path()).is_err());
    }
}
