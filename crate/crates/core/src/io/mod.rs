//! File formats: pipeline config, OBJ/MTL, binary PLY, PNG and the run
//! manifest with its artifact digests.

mod config;
mod manifest;
mod obj;
mod ply;
mod png;

use std::path::Path;

use glam::DVec3;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::{
    load_config, parse_config, preset, unknown_preset, OutputFormat, PipelineConfig, CONFIG_VERSION,
    MAX_TEXTURE_RESOLUTION, MIN_TEXTURE_RESOLUTION, MULTI_PRESET_LAYERS, PRESET_NAMES,
};
pub use manifest::{
    audit_artifacts, load_manifest, read_manifest, write_manifest, RunManifest, Stage, StageFlags, MANIFEST_FILE,
    MANIFEST_VERSION,
};
pub use obj::{export_obj, fmt9, mtl_text, obj_text, parse_obj, read_obj, texture_refs, ObjMesh};
pub use ply::{export_ply, parse_ply, ply_bytes, read_ply, write_ply_mesh, PlyMesh};
pub use png::{read_png, write_png, write_texture_set, Image};

/// Axis convention of exported files. Internally z is up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Axes {
    /// Right-handed, y up: internal `(x, y, z)` is written as `(x, z, -y)`.
    #[default]
    YUp,
    /// Internal coordinates unchanged.
    ZUp,
}

impl Axes {
    pub fn from_z_up(z_up: bool) -> Self {
        if z_up {
            Axes::ZUp
        } else {
            Axes::YUp
        }
    }

    pub fn apply(self, p: DVec3) -> DVec3 {
        match self {
            Axes::YUp => DVec3::new(p.x, p.z, -p.y),
            Axes::ZUp => p,
        }
    }

    pub fn invert(self, p: DVec3) -> DVec3 {
        match self {
            Axes::YUp => DVec3::new(p.x, -p.z, p.y),
            Axes::ZUp => p,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Axes::YUp => "right-handed, +Y up (generator x, y, z written as x, z, -y)",
            Axes::ZUp => "right-handed, +Z up (generator coordinates)",
        }
    }
}

/// Text of the axis note written beside exported meshes.
pub fn axes_note(axes: Axes) -> String {
    format!(
        "Coordinate convention of the .obj and .ply files in this directory:\n{}\nUnits are generator world units. Faces wind counter-clockwise around normals that point out of the tunnel volume into the rock.\n",
        axes.describe()
    )
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_round_trip() {
        let p = DVec3::new(1.0, -2.5, 3.0);
        for a in [Axes::YUp, Axes::ZUp] {
            assert_eq!(a.invert(a.apply(p)), p);
        }
        // Right-handed: x cross y = z holds in file space too.
        let a = Axes::YUp;
        assert_eq!(a.apply(DVec3::X).cross(a.apply(DVec3::Y)), a.apply(DVec3::Z));
        assert_eq!(a.apply(DVec3::Z), DVec3::Y);
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn unwritable_path_reports_it() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        let target = blocker.join("sub/a.obj");
        match write_file(&target, b"y").unwrap_err() {
            Error::Io { path, .. } => assert!(path.starts_with(&blocker)),
            e => panic!("{e}"),
        }
    }
}
