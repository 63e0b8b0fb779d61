//! Wavefront OBJ subset: `v x y z [r g b]`, `vt u v`, triangular `f` records.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use super::{load_image, Scene, Texture};
use crate::error::{Error, Result};

/// Parsed OBJ contents. When faces reference texture coordinates the
/// vertices are split so that every output vertex has exactly one UV.
#[derive(Debug, Clone, Default)]
pub struct ObjMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub colors: Option<Vec<[f32; 3]>>,
    pub uvs: Option<Vec<[f32; 2]>>,
    pub triangles: Vec<[u32; 3]>,
}

fn resolve_index(raw: &str, count: usize, what: &str, path: &Path, line: usize) -> Result<usize> {
    let i: i64 = raw
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} index `{raw}`")))?;
    let resolved = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        return Err(Error::parse(path, line, format!("{what} index 0 is invalid (indices are 1-based)")));
    };
    if resolved < 0 || resolved as usize >= count {
        return Err(Error::parse(
            path,
            line,
            format!("{what} index {i} out of range ({count} defined so far)"),
        ));
    }
    Ok(resolved as usize)
}

fn parse_floats<const N: usize>(fields: &[&str], path: &Path, line: usize) -> Result<[f64; N]> {
    let mut out = [0.0f64; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f
            .parse()
            .map_err(|_| Error::parse(path, line, format!("invalid number `{f}`")))?;
        if !slot.is_finite() {
            return Err(Error::parse(path, line, format!("non-finite value `{f}`")));
        }
    }
    Ok(out)
}

pub fn parse_obj(text: &str, path: &Path) -> Result<ObjMesh> {
    let mut positions: Vec<Vector3<f64>> = Vec::new();
    let mut colors: Vec<Option<[f32; 3]>> = Vec::new();
    let mut texcoords: Vec<[f32; 2]> = Vec::new();
    // (position, texcoord) per face corner
    let mut corners: Vec<[(usize, Option<usize>); 3]> = Vec::new();
    let mut skipped: BTreeSet<String> = BTreeSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "v" => {
                let n = fields.len() - 1;
                if n != 3 && n != 6 {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("vertex needs 3 coordinates (optionally + 3 colors), found {n} values"),
                    ));
                }
                let xyz: [f64; 3] = parse_floats(&fields[1..4], path, line_no)?;
                positions.push(Vector3::new(xyz[0], xyz[1], xyz[2]));
                colors.push(if n == 6 {
                    let rgb: [f64; 3] = parse_floats(&fields[4..7], path, line_no)?;
                    Some(rgb.map(|c| c.clamp(0.0, 1.0) as f32))
                } else {
                    None
                });
            }
            "vt" => {
                if fields.len() < 3 {
                    return Err(Error::parse(path, line_no, "texture coordinate needs u and v"));
                }
                let uv: [f64; 2] = parse_floats(&fields[1..3], path, line_no)?;
                texcoords.push([uv[0] as f32, uv[1] as f32]);
            }
            "f" => {
                let n = fields.len() - 1;
                if n != 3 {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("only triangular faces are supported, found {n} vertices"),
                    ));
                }
                let mut tri = [(0usize, None); 3];
                for (slot, token) in tri.iter_mut().zip(&fields[1..]) {
                    let mut parts = token.split('/');
                    let v = resolve_index(parts.next().unwrap_or(""), positions.len(), "vertex", path, line_no)?;
                    let vt = match parts.next() {
                        Some(t) if !t.is_empty() => {
                            Some(resolve_index(t, texcoords.len(), "texture coordinate", path, line_no)?)
                        }
                        _ => None,
                    };
                    *slot = (v, vt);
                }
                corners.push(tri);
            }
            other => {
                skipped.insert(other.to_string());
            }
        }
    }
    for directive in &skipped {
        log::warn!("{}: skipping unsupported OBJ directive `{directive}`", path.display());
    }

    let any_color = colors.iter().any(Option::is_some);
    let uses_uv = corners.iter().flatten().any(|c| c.1.is_some());

    if !uses_uv {
        return Ok(ObjMesh {
            colors: any_color.then(|| colors.iter().map(|c| c.unwrap_or([1.0; 3])).collect()),
            vertices: positions,
            uvs: None,
            triangles: corners
                .iter()
                .map(|t| t.map(|(v, _)| v as u32))
                .collect(),
        });
    }

    let mut remap: HashMap<(usize, Option<usize>), u32> = HashMap::new();
    let mut mesh = ObjMesh {
        colors: any_color.then(Vec::new),
        uvs: Some(Vec::new()),
        ..ObjMesh::default()
    };
    for tri in &corners {
        let mut out = [0u32; 3];
        for (slot, &(v, vt)) in out.iter_mut().zip(tri) {
            *slot = *remap.entry((v, vt)).or_insert_with(|| {
                mesh.vertices.push(positions[v]);
                if let Some(c) = mesh.colors.as_mut() {
                    c.push(colors[v].unwrap_or([1.0; 3]));
                }
                if let Some(u) = mesh.uvs.as_mut() {
                    u.push(vt.map(|t| texcoords[t]).unwrap_or([0.0, 0.0]));
                }
                (mesh.vertices.len() - 1) as u32
            });
        }
        mesh.triangles.push(out);
    }
    Ok(mesh)
}

/// Loads an OBJ mesh without a texture.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mesh = parse_obj(&text, path)?;
    Scene::new(mesh.vertices, mesh.triangles, mesh.colors, None)
}

/// Loads an OBJ mesh and binds `texture` to its `vt` coordinates.
pub fn load_mesh_with_texture(path: impl AsRef<Path>, texture: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mesh = parse_obj(&text, path)?;
    let uvs = mesh.uvs.ok_or_else(|| {
        Error::InvalidScene(format!(
            "{}: texture given but mesh has no texture coordinates",
            path.display()
        ))
    })?;
    let image = load_image(texture)?;
    Scene::new(mesh.vertices, mesh.triangles, mesh.colors, Some(Texture { image, uvs }))
}
