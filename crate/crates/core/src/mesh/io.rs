use std::collections::HashMap;
use std::fmt::Write as _;

use super::{CellSpec, FaceMarker, Mesh, Point};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads the `wgmesh` text format.
///
/// ```text
/// wgmesh <d> <#vertices> <#cells> <#bfaces>
/// v x y [z]
/// c v0 v1 ... vm        # 2D: boundary loop; 3D: followed by `f` lines
/// f v0 v1 ... vm        # 3D only: one face loop of the preceding cell
/// b v0 ... vm D|N       # boundary face and its marker
/// ```
pub fn import_mesh(text: &str) -> Result<Mesh> {
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut vertices = Vec::new();
    let mut cells: Vec<CellSpec> = Vec::new();
    let mut markers: HashMap<Vec<usize>, FaceMarker> = HashMap::new();
    let mut nb = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let tag = tok.next().unwrap();
        let rest: Vec<&str> = tok.collect();
        let ints = |rest: &[&str]| -> Result<Vec<usize>> {
            rest.iter()
                .map(|t| t.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad vertex id `{t}`"))))
                .collect()
        };
        if header.is_none() {
            if tag != "wgmesh" || rest.len() != 4 {
                return Err(parse_err(lineno, "expected `wgmesh <d> <#vertices> <#cells> <#bfaces>`"));
            }
            let v = ints(&rest)?;
            if v[0] != 2 && v[0] != 3 {
                return Err(parse_err(lineno, format!("dimension must be 2 or 3, got {}", v[0])));
            }
            header = Some((v[0], v[1], v[2], v[3]));
            continue;
        }
        let (dim, ..) = header.unwrap();
        match tag {
            "v" => {
                if rest.len() != dim {
                    return Err(parse_err(lineno, format!("vertex needs {dim} coordinates")));
                }
                let mut p = Point::zeros();
                for (i, t) in rest.iter().enumerate() {
                    p[i] = t.parse::<f64>().map_err(|_| parse_err(lineno, format!("bad coordinate `{t}`")))?;
                }
                vertices.push(p);
            }
            "c" => {
                let ids = ints(&rest)?;
                if dim == 2 {
                    if ids.len() < 3 {
                        return Err(parse_err(lineno, "polygon needs at least 3 vertices"));
                    }
                    cells.push(CellSpec::Polygon(ids));
                } else {
                    // The vertex list is informative; topology comes from `f` lines.
                    cells.push(CellSpec::Polyhedron(Vec::new()));
                }
            }
            "f" => {
                if dim != 3 {
                    return Err(parse_err(lineno, "`f` lines are only valid in 3D"));
                }
                let ids = ints(&rest)?;
                if ids.len() < 3 {
                    return Err(parse_err(lineno, "face loop needs at least 3 vertices"));
                }
                match cells.last_mut() {
                    Some(CellSpec::Polyhedron(fs)) => fs.push(ids),
                    _ => return Err(parse_err(lineno, "`f` line before any cell")),
                }
            }
            "b" => {
                let (last, ids) = rest.split_last().ok_or_else(|| parse_err(lineno, "empty boundary line"))?;
                let m = match *last {
                    "D" => FaceMarker::Dirichlet,
                    "N" => FaceMarker::Neumann,
                    other => return Err(parse_err(lineno, format!("marker must be D or N, got `{other}`"))),
                };
                let mut key = ints(ids)?;
                if key.len() < dim {
                    return Err(parse_err(lineno, "boundary face has too few vertices"));
                }
                key.sort_unstable();
                markers.insert(key, m);
                nb += 1;
            }
            other => return Err(parse_err(lineno, format!("unknown record `{other}`"))),
        }
    }
    let (dim, nv, nc, nbf) = header.ok_or_else(|| parse_err(1, "missing header"))?;
    if vertices.len() != nv || cells.len() != nc || nb != nbf {
        return Err(parse_err(
            text.lines().count().max(1),
            format!(
                "header declares {nv}/{nc}/{nbf} vertices/cells/boundary faces, found {}/{}/{}",
                vertices.len(),
                cells.len(),
                nb
            ),
        ));
    }
    let mesh = Mesh::new(dim, vertices, cells, |l, _, _| {
        let mut key = l.to_vec();
        key.sort_unstable();
        markers.get(&key).copied()
    })?;
    let boundary = mesh.faces().iter().filter(|f| f.is_boundary()).count();
    if boundary != nb {
        return Err(Error::Topology(format!("{nb} boundary markers given for {boundary} boundary faces")));
    }
    if let Some(&f) = mesh.improper_faces().first() {
        return Err(Error::Topology(format!(
            "face {:?} contains another mesh node; split it at hanging nodes",
            mesh.faces()[f].vertices
        )));
    }
    Ok(mesh)
}

/// Writes the `wgmesh` text format. Coordinates use the shortest
/// representation that reads back to the same `f64`.
pub fn export_mesh(mesh: &Mesh) -> String {
    let d = mesh.dim();
    let boundary: Vec<_> = mesh.faces().iter().filter(|f| f.is_boundary()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "wgmesh {} {} {} {}", d, mesh.vertices().len(), mesh.cells().len(), boundary.len());
    for p in mesh.vertices() {
        out.push('v');
        for i in 0..d {
            let _ = write!(out, " {:?}", p[i]);
        }
        out.push('\n');
    }
    let join = |ids: &[usize]| ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    for (spec, cell) in mesh.cell_specs().iter().zip(mesh.cells()) {
        match spec {
            CellSpec::Polygon(l) => {
                let _ = writeln!(out, "c {}", join(l));
            }
            CellSpec::Polyhedron(fs) => {
                let _ = writeln!(out, "c {}", join(&cell.vertices));
                for l in fs {
                    let _ = writeln!(out, "f {}", join(l));
                }
            }
        }
    }
    for f in boundary {
        let m = if f.marker == FaceMarker::Neumann { "N" } else { "D" };
        let _ = writeln!(out, "b {} {}", join(&f.vertices), m);
    }
    out
}
