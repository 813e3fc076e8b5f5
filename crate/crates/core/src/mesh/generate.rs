use std::collections::HashMap;

use super::{CellSpec, FaceMarker, Mesh, Point};
use crate::error::{Error, Result};

/// How each square of the structured triangle mesh is cut.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalPattern {
    /// Lower-left to upper-right in every square.
    #[default]
    Uniform,
    /// Alternates between the two diagonals like a checkerboard.
    Alternating,
}

fn all_dirichlet(_: &[usize], _: &Point, _: &Point) -> Option<FaceMarker> {
    Some(FaceMarker::Dirichlet)
}

/// Unit square split into `n x n` squares of two triangles each, using the
/// default diagonal pattern. Every boundary edge is Dirichlet.
pub fn triangle_mesh(n: usize) -> Result<Mesh> {
    triangle_mesh_with(n, DiagonalPattern::default())
}

pub fn triangle_mesh_with(n: usize, pattern: DiagonalPattern) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidInput("triangle mesh needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 * h, j as f64 * h, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let rising = match pattern {
                DiagonalPattern::Uniform => true,
                DiagonalPattern::Alternating => (i + j) % 2 == 0,
            };
            if rising {
                cells.push(CellSpec::Polygon(vec![a, b, c]));
                cells.push(CellSpec::Polygon(vec![a, c, d]));
            } else {
                cells.push(CellSpec::Polygon(vec![a, b, d]));
                cells.push(CellSpec::Polygon(vec![b, c, d]));
            }
        }
    }
    Mesh::new(2, vertices, cells, all_dirichlet)
}

/// Unit square covered by `n` rows of rectangles. Odd rows are shifted by
/// half a cell and closed with half-width cells, so every interior
/// horizontal line carries hanging nodes. Every boundary edge is Dirichlet.
pub fn ladder_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidInput("ladder mesh needs n >= 2".into()));
    }
    // Abscissae are kept in half-cell units so vertex lookup is exact.
    let row_grid = |r: usize| -> Vec<usize> {
        if r.is_multiple_of(2) {
            (0..=n).map(|i| 2 * i).collect()
        } else {
            let mut g = vec![0];
            g.extend((0..n).map(|i| 2 * i + 1));
            g.push(2 * n);
            g
        }
    };
    let mut lines: Vec<Vec<usize>> = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut xs = Vec::new();
        if l > 0 {
            xs.extend(row_grid(l - 1));
        }
        if l < n {
            xs.extend(row_grid(l));
        }
        xs.sort_unstable();
        xs.dedup();
        lines.push(xs);
    }
    let mut vertices = Vec::new();
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    for (l, xs) in lines.iter().enumerate() {
        for &x in xs {
            ids.insert((x, l), vertices.len());
            vertices.push(Point::new(x as f64 / (2 * n) as f64, l as f64 / n as f64, 0.0));
        }
    }
    let mut cells = Vec::new();
    for r in 0..n {
        let g = row_grid(r);
        for w in g.windows(2) {
            let (xa, xb) = (w[0], w[1]);
            let mut lp: Vec<usize> = lines[r].iter().filter(|&&x| x >= xa && x <= xb).map(|&x| ids[&(x, r)]).collect();
            lp.extend(lines[r + 1].iter().rev().filter(|&&x| x >= xa && x <= xb).map(|&x| ids[&(x, r + 1)]));
            cells.push(CellSpec::Polygon(lp));
        }
    }
    Mesh::new(2, vertices, cells, all_dirichlet)
}

/// Unit cube split into `n^3` subcubes of six Kuhn tetrahedra each. Every
/// boundary face is Dirichlet.
pub fn cube_tet_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidInput("cube mesh needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    let id = |p: [usize; 3]| (p[2] * (n + 1) + p[1]) * (n + 1) + p[0];
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut p = [i, j, k];
                    let mut tet = vec![id(p)];
                    for axis in perm {
                        p[axis] += 1;
                        tet.push(id(p));
                    }
                    let faces = (0..4).map(|skip| (0..4).filter(|&m| m != skip).map(|m| tet[m]).collect()).collect();
                    cells.push(CellSpec::Polyhedron(faces));
                }
            }
        }
    }
    Mesh::new(3, vertices, cells, all_dirichlet)
}
