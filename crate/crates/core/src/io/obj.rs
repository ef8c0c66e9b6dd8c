use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use glam::{DVec2, DVec3};

use super::{write_file, Axes};
use crate::error::{Error, Result};
use crate::mesh::Chunk;

/// Formats `x` with 9 significant digits in plain decimal notation.
pub fn fmt9(x: f64) -> String {
    let x = x + 0.0; // no negative zero
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { format!("{x}") };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else if (exp as usize) + 1 >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', exp as usize + 1 - digits.len()));
    } else {
        let (int, frac) = digits.split_at(exp as usize + 1);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Texture file names of a chunk, relative to the mesh directory.
pub fn texture_refs(name: &str) -> [String; 3] {
    ["color", "normal", "roughness"].map(|k| format!("../textures/{name}_{k}.png"))
}

pub fn mtl_text(name: &str, with_maps: bool) -> String {
    let mut s = format!("# {name}\nnewmtl {name}\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nNs 10\nd 1\nillum 1\n");
    if with_maps {
        let [c, n, r] = texture_refs(name);
        let _ = writeln!(s, "map_Kd {c}");
        let _ = writeln!(s, "map_Bump -bm 1.0 {n}");
        // Roughness in the specular-exponent slot.
        let _ = writeln!(s, "map_Ns {r}");
    }
    s
}

pub fn obj_text(chunk: &Chunk, axes: Axes) -> String {
    let name = chunk.name();
    let m = &chunk.mesh;
    let mut s = String::with_capacity(m.positions.len() * 80 + m.triangles.len() * 40);
    let _ = writeln!(s, "# {name}, {}", axes.describe());
    let _ = writeln!(s, "mtllib {name}.mtl");
    let _ = writeln!(s, "o {name}");
    for p in &m.positions {
        let q = axes.apply(*p);
        let _ = writeln!(s, "v {} {} {}", fmt9(q.x), fmt9(q.y), fmt9(q.z));
    }
    // Identical per-corner UVs share one `vt` record.
    let mut vt_index: HashMap<[u64; 2], usize> = HashMap::new();
    let mut corner_vt: Vec<[usize; 3]> = Vec::new();
    if let Some(uvs) = &m.uvs {
        for tri in uvs {
            corner_vt.push(tri.map(|uv| {
                let next = vt_index.len() + 1;
                *vt_index.entry([uv.x.to_bits(), uv.y.to_bits()]).or_insert_with(|| {
                    let _ = writeln!(s, "vt {} {}", fmt9(uv.x), fmt9(uv.y));
                    next
                })
            }));
        }
    }
    for n in &m.normals {
        let q = axes.apply(*n);
        let _ = writeln!(s, "vn {} {} {}", fmt9(q.x), fmt9(q.y), fmt9(q.z));
    }
    let _ = writeln!(s, "usemtl {name}");
    let has_normals = m.normals.len() == m.positions.len();
    for (t, tri) in m.triangles.iter().enumerate() {
        s.push('f');
        for k in 0..3 {
            let v = tri[k] + 1;
            let vt = corner_vt.get(t).map(|c| c[k]);
            match (vt, has_normals) {
                (Some(vt), true) => write!(s, " {v}/{vt}/{v}"),
                (Some(vt), false) => write!(s, " {v}/{vt}"),
                (None, true) => write!(s, " {v}//{v}"),
                (None, false) => write!(s, " {v}"),
            }
            .unwrap();
        }
        s.push('\n');
    }
    s
}

/// Writes `chunk_i_j_k.obj` and `.mtl` for each chunk. The material lists
/// texture maps only for chunks that carry baked textures.
pub fn export_obj(chunks: &[Chunk], dir: &Path, axes: Axes) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for chunk in chunks {
        let name = chunk.name();
        let obj = dir.join(format!("{name}.obj"));
        let mtl = dir.join(format!("{name}.mtl"));
        write_file(&obj, obj_text(chunk, axes).as_bytes())?;
        write_file(&mtl, mtl_text(&name, chunk.textures.is_some()).as_bytes())?;
        files.push(obj);
        files.push(mtl);
    }
    Ok(files)
}

/// Triangle mesh as stored in an OBJ file, in file coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjMesh {
    pub positions: Vec<DVec3>,
    pub uvs: Vec<DVec2>,
    pub normals: Vec<DVec3>,
    /// Zero-based `(v, vt, vn)` per corner.
    pub faces: Vec<[(u32, Option<u32>, Option<u32>); 3]>,
    pub mtllib: Option<String>,
}

pub fn parse_obj(text: &str) -> std::result::Result<ObjMesh, String> {
    let mut m = ObjMesh::default();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut it = line.split_whitespace();
        let Some(tag) = it.next() else { continue };
        let err = |what: &str| format!("line {}: {what}", ln + 1);
        let floats = |it: std::str::SplitWhitespace, n: usize| -> std::result::Result<Vec<f64>, String> {
            let v: Vec<f64> = it.map(|x| x.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e| err(&e.to_string()))?;
            if v.len() < n {
                return Err(err(&format!("expected {n} numbers")));
            }
            Ok(v)
        };
        match tag {
            "v" => {
                let v = floats(it, 3)?;
                m.positions.push(DVec3::new(v[0], v[1], v[2]));
            }
            "vt" => {
                let v = floats(it, 2)?;
                m.uvs.push(DVec2::new(v[0], v[1]));
            }
            "vn" => {
                let v = floats(it, 3)?;
                m.normals.push(DVec3::new(v[0], v[1], v[2]));
            }
            "f" => {
                let corners: Vec<&str> = it.collect();
                if corners.len() != 3 {
                    return Err(err("only triangles are supported"));
                }
                let mut face = [(0, None, None); 3];
                for (k, c) in corners.iter().enumerate() {
                    let mut parts = c.split('/');
                    let idx = |s: Option<&str>| -> std::result::Result<Option<u32>, String> {
                        match s {
                            None | Some("") => Ok(None),
                            Some(s) => {
                                let i: u32 = s.parse().map_err(|_| err(&format!("bad index `{s}`")))?;
                                if i == 0 {
                                    return Err(err("indices are one-based"));
                                }
                                Ok(Some(i - 1))
                            }
                        }
                    };
                    let v = idx(parts.next())?.ok_or_else(|| err("missing vertex index"))?;
                    face[k] = (v, idx(parts.next())?, idx(parts.next())?);
                }
                m.faces.push(face);
            }
            "mtllib" => m.mtllib = it.next().map(str::to_string),
            _ => {}
        }
    }
    for f in &m.faces {
        for &(v, vt, vn) in f {
            if v as usize >= m.positions.len()
                || vt.is_some_and(|i| i as usize >= m.uvs.len())
                || vn.is_some_and(|i| i as usize >= m.normals.len())
            {
                return Err("face index out of range".into());
            }
        }
    }
    Ok(m)
}

pub fn read_obj(path: &Path) -> Result<ObjMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text).map_err(|message| Error::Parse {
        path: path.display().to_string(),
        message,
    })
}
