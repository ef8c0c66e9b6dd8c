use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use glam::{DVec2, DVec3};

use super::{write_file, Axes};
use crate::error::{Error, Result};
use crate::mesh::{Chunk, TriMesh};

/// Mesh as stored in a PLY file, in file coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlyMesh {
    pub positions: Vec<DVec3>,
    pub normals: Option<Vec<DVec3>>,
    pub uvs: Option<Vec<DVec2>>,
    pub faces: Vec<[u32; 3]>,
    /// `vertex1`, `vertex2` of an `edge` element.
    pub edges: Vec<[u32; 2]>,
    /// Vertex properties other than position, normal and UV.
    pub extra: BTreeMap<String, Vec<f64>>,
    pub comments: Vec<String>,
}

impl PlyMesh {
    /// Back to generator coordinates. Per-vertex UVs become per-corner UVs.
    pub fn to_trimesh(&self, axes: Axes) -> TriMesh {
        let mut m = TriMesh::new(self.positions.iter().map(|p| axes.invert(*p)).collect(), self.faces.clone());
        if let Some(n) = &self.normals {
            m.normals = n.iter().map(|n| axes.invert(*n)).collect();
        }
        if let Some(uv) = &self.uvs {
            m.uvs = Some(self.faces.iter().map(|f| f.map(|i| uv[i as usize])).collect());
        }
        m
    }
}

/// Binary little-endian PLY with double-precision vertex properties.
///
/// A mesh with per-corner UVs gets one file vertex per distinct
/// `(vertex, uv)` pair, in order of first use.
pub fn ply_bytes(mesh: &TriMesh, axes: Axes) -> Vec<u8> {
    let has_normals = mesh.normals.len() == mesh.positions.len() && !mesh.positions.is_empty();
    let (verts, faces): (Vec<(u32, Option<DVec2>)>, Vec<[u32; 3]>) = match &mesh.uvs {
        None => ((0..mesh.positions.len() as u32).map(|i| (i, None)).collect(), mesh.triangles.clone()),
        Some(uvs) => {
            let mut index: HashMap<(u32, [u64; 2]), u32> = HashMap::new();
            let mut verts = Vec::new();
            let faces = mesh
                .triangles
                .iter()
                .zip(uvs)
                .map(|(tri, uv)| {
                    [0, 1, 2].map(|k| {
                        let key = (tri[k], [uv[k].x.to_bits(), uv[k].y.to_bits()]);
                        *index.entry(key).or_insert_with(|| {
                            verts.push((tri[k], Some(uv[k])));
                            (verts.len() - 1) as u32
                        })
                    })
                })
                .collect();
            (verts, faces)
        }
    };

    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    let _ = writeln!(header, "comment axes: {}", axes.describe());
    let _ = writeln!(header, "element vertex {}", verts.len());
    let mut props = vec!["x", "y", "z"];
    if has_normals {
        props.extend(["nx", "ny", "nz"]);
    }
    if mesh.uvs.is_some() {
        props.extend(["u", "v"]);
    }
    for p in &props {
        let _ = writeln!(header, "property double {p}");
    }
    let _ = writeln!(header, "element face {}", faces.len());
    header.push_str("property list uchar uint vertex_indices\nend_header\n");

    let mut out = header.into_bytes();
    out.reserve(verts.len() * props.len() * 8 + faces.len() * 13);
    let put = |out: &mut Vec<u8>, x: f64| out.extend_from_slice(&x.to_le_bytes());
    for (v, uv) in &verts {
        let p = axes.apply(mesh.positions[*v as usize]);
        for c in p.to_array() {
            put(&mut out, c);
        }
        if has_normals {
            for c in axes.apply(mesh.normals[*v as usize]).to_array() {
                put(&mut out, c);
            }
        }
        if let Some(uv) = uv {
            put(&mut out, uv.x);
            put(&mut out, uv.y);
        }
    }
    for f in &faces {
        out.push(3);
        for i in f {
            out.extend_from_slice(&i.to_le_bytes());
        }
    }
    out
}

pub fn write_ply_mesh(path: &Path, mesh: &TriMesh, axes: Axes) -> Result<()> {
    write_file(path, &ply_bytes(mesh, axes))
}

/// Writes `chunk_i_j_k.ply` for each chunk.
pub fn export_ply(chunks: &[Chunk], dir: &Path, axes: Axes) -> Result<Vec<PathBuf>> {
    chunks
        .iter()
        .map(|c| {
            let path = dir.join(format!("{}.ply", c.name()));
            write_ply_mesh(&path, &c.mesh, axes)?;
            Ok(path)
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn read(self, data: &[u8], at: &mut usize) -> std::result::Result<f64, String> {
        let n = match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        };
        let b = data.get(*at..*at + n).ok_or("unexpected end of data")?;
        *at += n;
        Ok(match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b.try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b.try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b.try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b.try_into().unwrap()),
        })
    }
}

enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

/// Reads binary little-endian PLY triangle meshes.
pub fn parse_ply(data: &[u8]) -> std::result::Result<PlyMesh, String> {
    const END: &[u8] = b"end_header\n";
    let end = data
        .windows(END.len())
        .position(|w| w == END)
        .ok_or("missing end_header")?
        + END.len();
    let header = std::str::from_utf8(&data[..end]).map_err(|_| "header is not UTF-8")?;
    let mut lines = header.lines();
    if lines.next() != Some("ply") {
        return Err("missing ply magic".into());
    }
    let mut mesh = PlyMesh::default();
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.as_slice() {
            ["format", "binary_little_endian", "1.0"] => {}
            ["format", f, ..] => return Err(format!("unsupported format `{f}`")),
            ["comment", ..] => mesh.comments.push(line["comment".len()..].trim().to_string()),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| format!("bad element count `{count}`"))?,
                props: Vec::new(),
            }),
            ["property", "list", c, i, name] => {
                let (c, i) = (Scalar::parse(c), Scalar::parse(i));
                let e = elements.last_mut().ok_or("property before element")?;
                e.props.push(Property::List(name.to_string(), c.ok_or("bad list type")?, i.ok_or("bad list type")?));
            }
            ["property", t, name] => {
                let t = Scalar::parse(t).ok_or_else(|| format!("bad property type `{t}`"))?;
                let e = elements.last_mut().ok_or("property before element")?;
                e.props.push(Property::Scalar(name.to_string(), t));
            }
            ["end_header"] | [] => {}
            _ => return Err(format!("unrecognized header line `{line}`")),
        }
    }

    let mut at = end;
    for e in &elements {
        match e.name.as_str() {
            "vertex" => {
                let names: Vec<&str> = e
                    .props
                    .iter()
                    .map(|p| match p {
                        Property::Scalar(n, _) => Ok(n.as_str()),
                        Property::List(..) => Err("list property on vertex"),
                    })
                    .collect::<std::result::Result<_, _>>()?;
                let slot = |n: &str| names.iter().position(|&x| x == n);
                let xyz = [slot("x"), slot("y"), slot("z")];
                let nrm = [slot("nx"), slot("ny"), slot("nz")];
                let uv = [slot("u").or(slot("s")), slot("v").or(slot("t"))];
                if xyz.iter().any(Option::is_none) {
                    return Err("vertex element lacks x, y or z".into());
                }
                let known = ["x", "y", "z", "nx", "ny", "nz", "u", "v", "s", "t"];
                let extra: Vec<usize> = (0..names.len()).filter(|&k| !known.contains(&names[k])).collect();
                let has_n = nrm.iter().all(Option::is_some);
                let has_uv = uv.iter().all(Option::is_some);
                let mut normals = Vec::new();
                let mut uvs = Vec::new();
                let mut vals = vec![0.0; names.len()];
                for _ in 0..e.count {
                    for (k, p) in e.props.iter().enumerate() {
                        let Property::Scalar(_, t) = p else { unreachable!() };
                        vals[k] = t.read(data, &mut at)?;
                    }
                    let get = |s: Option<usize>| vals[s.unwrap()];
                    mesh.positions.push(DVec3::new(get(xyz[0]), get(xyz[1]), get(xyz[2])));
                    if has_n {
                        normals.push(DVec3::new(get(nrm[0]), get(nrm[1]), get(nrm[2])));
                    }
                    if has_uv {
                        uvs.push(DVec2::new(get(uv[0]), get(uv[1])));
                    }
                    for &k in &extra {
                        mesh.extra.entry(names[k].to_string()).or_default().push(vals[k]);
                    }
                }
                mesh.normals = has_n.then_some(normals);
                mesh.uvs = has_uv.then_some(uvs);
            }
            "face" => {
                for _ in 0..e.count {
                    for p in &e.props {
                        match p {
                            Property::List(name, c, i) if name == "vertex_indices" || name == "vertex_index" => {
                                let n = c.read(data, &mut at)? as usize;
                                if n != 3 {
                                    return Err(format!("face with {n} vertices; only triangles are supported"));
                                }
                                let mut f = [0u32; 3];
                                for v in &mut f {
                                    *v = i.read(data, &mut at)? as u32;
                                }
                                mesh.faces.push(f);
                            }
                            Property::List(_, c, i) => {
                                let n = c.read(data, &mut at)? as usize;
                                for _ in 0..n {
                                    i.read(data, &mut at)?;
                                }
                            }
                            Property::Scalar(_, t) => {
                                t.read(data, &mut at)?;
                            }
                        }
                    }
                }
            }
            "edge" => {
                for _ in 0..e.count {
                    let mut ends = [None, None];
                    for p in &e.props {
                        let Property::Scalar(name, t) = p else {
                            return Err("list property on edge".into());
                        };
                        let x = t.read(data, &mut at)? as u32;
                        match name.as_str() {
                            "vertex1" => ends[0] = Some(x),
                            "vertex2" => ends[1] = Some(x),
                            _ => {}
                        }
                    }
                    match ends {
                        [Some(a), Some(b)] => mesh.edges.push([a, b]),
                        _ => return Err("edge element lacks vertex1 or vertex2".into()),
                    }
                }
            }
            other => return Err(format!("unsupported element `{other}`")),
        }
    }
    if at != data.len() {
        return Err(format!("{} trailing bytes", data.len() - at));
    }
    let n = mesh.positions.len();
    if mesh.faces.iter().flatten().chain(mesh.edges.iter().flatten()).any(|&i| i as usize >= n) {
        return Err("face index out of range".into());
    }
    Ok(mesh)
}

pub fn read_ply(path: &Path) -> Result<PlyMesh> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&data).map_err(|message| Error::Parse {
        path: path.display().to_string(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::cube;

    #[test]
    fn header_declares_binary_little_endian() {
        let bytes = ply_bytes(&cube(0.0, 1.0), Axes::YUp);
        let head = String::from_utf8_lossy(&bytes[..200]);
        assert!(head.starts_with("ply\nformat binary_little_endian 1.0\n"));
    }

    #[test]
    fn round_trip_is_bitwise() {
        let mut m = cube(-0.3, 1.7);
        m.compute_normals();
        for axes in [Axes::YUp, Axes::ZUp] {
            let back = parse_ply(&ply_bytes(&m, axes)).unwrap().to_trimesh(axes);
            assert_eq!(back.triangles, m.triangles);
            for (a, b) in back.positions.iter().zip(&m.positions) {
                assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
            }
            assert_eq!(back.normals, m.normals);
        }
    }

    #[test]
    fn uvs_split_vertices() {
        let mut m = cube(0.0, 1.0);
        m.compute_normals();
        // Every triangle gets its own UVs, so no corner is shared.
        let uvs: Vec<[DVec2; 3]> = (0..m.triangle_count())
            .map(|t| [0, 1, 2].map(|k| DVec2::new(t as f64 / 16.0, k as f64 / 4.0)))
            .collect();
        m.uvs = Some(uvs.clone());
        let p = parse_ply(&ply_bytes(&m, Axes::ZUp)).unwrap();
        assert_eq!(p.positions.len(), 3 * m.triangle_count());
        assert_eq!(p.faces.len(), m.triangle_count());
        let back = p.to_trimesh(Axes::ZUp);
        assert_eq!(back.uvs.as_ref().unwrap(), &uvs);
        for t in 0..m.triangle_count() {
            assert_eq!(back.corners(t), m.corners(t));
        }
    }

    #[test]
    fn empty_chunk_list_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        assert!(export_ply(&[], dir.path(), Axes::YUp).unwrap().is_empty());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn truncated_file_rejected() {
        let bytes = ply_bytes(&cube(0.0, 1.0), Axes::YUp);
        assert!(parse_ply(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(parse_ply(&extra).is_err());
        assert!(parse_ply(b"ply\nformat ascii 1.0\nend_header\n").is_err());
    }
}
