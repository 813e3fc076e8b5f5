use rayon::prelude::*;
use serde::Serialize;

use super::ManufacturedCase;
use crate::assembly::{data_order, WgSolution};
use crate::error::Result;
use crate::mesh::Mesh;
use crate::polyquad::cell_quadrature;

/// Relative L2 errors of the interior unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorNorms {
    /// `||u - u_i|| / ||u||`.
    pub err_u: f64,
    /// `||sigma - sigma_i|| / ||sigma||`.
    pub err_sigma: f64,
    /// Broken `||grad u - grad u_i|| / ||grad u||`.
    pub err_gradu: f64,
}

pub fn error_norms(mesh: &Mesh, case: &ManufacturedCase, solution: &WgSolution) -> Result<ErrorNorms> {
    let d = mesh.dim();
    let order = data_order(solution.k);
    let sums = (0..mesh.cells().len())
        .into_par_iter()
        .map(|c| -> Result<[f64; 6]> {
            let q = cell_quadrature(mesh, c, order)?;
            let mut s = [0.0; 6];
            for (p, w) in q.points.iter().zip(&q.weights) {
                let u = case.displacement(p);
                let eu = u - solution.displacement_at(mesh, c, p);
                let sig = case.stress(p);
                let es = sig - solution.stress_at(mesh, c, p);
                let g = case.gradient(p);
                let eg = g - solution.displacement_gradient_at(mesh, c, p);
                let block = |m: &nalgebra::Matrix3<f64>| -> f64 {
                    (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * m[(i, j)]).sum()
                };
                s[0] += w * eu.norm_squared();
                s[1] += w * u.norm_squared();
                s[2] += w * block(&es);
                s[3] += w * block(&sig);
                s[4] += w * block(&eg);
                s[5] += w * block(&g);
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = [0.0; 6];
    for s in sums {
        for i in 0..6 {
            t[i] += s[i];
        }
    }
    let rel = |e: f64, n: f64| if n > 0.0 { (e / n).sqrt() } else { e.sqrt() };
    Ok(ErrorNorms { err_u: rel(t[0], t[1]), err_sigma: rel(t[2], t[3]), err_gradu: rel(t[4], t[5]) })
}
