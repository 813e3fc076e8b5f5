use serde::Serialize;

use super::Mesh;

/// Cells with `theta` or `ell` below this value are flagged.
pub const DEFAULT_THETA_THRESHOLD: f64 = 1e-2;

/// Shape-regularity indicators per cell.
///
/// `theta[T]` is the smallest distance from `M_T` to the hyperplane of a
/// boundary piece of `T`, divided by `h_T`. `ell[T]` is the shortest distance
/// between two vertices of `T`, divided by `h_T`.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub theta: Vec<f64>,
    pub ell: Vec<f64>,
    pub min_theta: f64,
    pub min_ell: f64,
    pub threshold: f64,
    pub flagged: Vec<usize>,
}

pub fn check_regularity(mesh: &Mesh, threshold: f64) -> RegularityReport {
    let mut theta = Vec::with_capacity(mesh.cells().len());
    let mut ell = Vec::with_capacity(mesh.cells().len());
    for cell in mesh.cells() {
        let h = cell.diameter;
        let m = cell.star_center;
        let t = cell
            .boundary
            .iter()
            .map(|piece| {
                let q = mesh.oriented_piece(piece);
                let n = mesh.piece_normal(piece);
                (q[0] - m).dot(&n) / h
            })
            .fold(f64::INFINITY, f64::min);
        let mut l = f64::INFINITY;
        for (i, &a) in cell.vertices.iter().enumerate() {
            for &b in &cell.vertices[i + 1..] {
                l = l.min((mesh.vertices()[a] - mesh.vertices()[b]).norm() / h);
            }
        }
        theta.push(t);
        ell.push(l);
    }
    let flagged = (0..theta.len()).filter(|&c| theta[c] < threshold || ell[c] < threshold).collect();
    RegularityReport {
        min_theta: theta.iter().copied().fold(f64::INFINITY, f64::min),
        min_ell: ell.iter().copied().fold(f64::INFINITY, f64::min),
        theta,
        ell,
        threshold,
        flagged,
    }
}
