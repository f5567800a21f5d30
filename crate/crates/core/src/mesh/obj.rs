use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, Point3, SimplicialSurface};

/// Reads a Wavefront OBJ surface. Only `v` and `f` records are used.
pub fn load_obj(path: impl AsRef<Path>) -> Result<SimplicialSurface, MeshError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<SimplicialSurface, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    // face records are validated after all vertices are known
    let mut raw_faces: Vec<(usize, Vec<i64>)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| MeshError::Parse {
                        line: lineno + 1,
                        message: format!("bad vertex coordinate: {e}"),
                    })?;
                if coords.len() != 3 {
                    return Err(MeshError::Parse {
                        line: lineno + 1,
                        message: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<i64> = tokens
                    .map(|t| t.split('/').next().unwrap_or("").parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| MeshError::Parse {
                        line: lineno + 1,
                        message: format!("bad face index: {e}"),
                    })?;
                raw_faces.push((lineno + 1, idx));
            }
            _ => {}
        }
    }

    let nv = vertices.len();
    for (f, (line, idx)) in raw_faces.into_iter().enumerate() {
        if idx.len() != 3 {
            return Err(MeshError::NonTriangularFace {
                face: f,
                corners: idx.len(),
            });
        }
        let mut tri = [0usize; 3];
        for (slot, &i) in tri.iter_mut().zip(&idx) {
            // 1-based, negative values count back from the latest vertex
            let resolved = if i > 0 { i - 1 } else { nv as i64 + i };
            if i == 0 || resolved < 0 {
                return Err(MeshError::Parse {
                    line,
                    message: format!("invalid vertex index {i}"),
                });
            }
            *slot = resolved as usize;
        }
        faces.push(tri);
    }

    SimplicialSurface::from_triangles(vertices, faces)
}

/// Serialises a surface back to OBJ text (1-based indices).
pub fn write_obj(surface: &SimplicialSurface) -> String {
    let mut out = String::new();
    for v in surface.vertices() {
        let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
    }
    for f in surface.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}
