use nalgebra::{DVector, Matrix3};
use rayon::prelude::*;

use super::condense::{condense, CondensedCell};
use super::lame::sym_basis;
use super::local::LocalElementSystem;
use super::ElasticityProblem;
use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::polyquad::cell_basis;
use crate::solver::{SparseSymmetric, SymmetricAssembler};
use crate::wgspace::{scott_zhang_boundary, DofMap};

/// Relative asymmetry above which the assembled system is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// The skeleton system after static condensation and Dirichlet elimination.
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    pub matrix: SparseSymmetric,
    pub rhs: Vec<f64>,
    /// Skeleton dof of each free unknown.
    pub free_dofs: Vec<usize>,
    /// Free index of each skeleton dof (`None` when fixed by Dirichlet data).
    pub free_index: Vec<Option<usize>>,
    /// Dirichlet values on fixed dofs, zero elsewhere.
    pub dirichlet_values: Vec<f64>,
    pub cells: Vec<CondensedCell>,
}

impl CondensedSystem {
    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    /// Full skeleton vector from the free unknowns.
    pub fn skeleton_vector(&self, x_free: &[f64]) -> Vec<f64> {
        let mut x = self.dirichlet_values.clone();
        for (f, &dof) in self.free_dofs.iter().enumerate() {
            x[dof] = x_free[f];
        }
        x
    }

    /// Back-substitutes the interior unknowns of every cell.
    pub fn recover(&self, dofs: &DofMap, x_free: &[f64]) -> WgSolution {
        let skel = self.skeleton_vector(x_free);
        let interior: Vec<(DVector<f64>, DVector<f64>)> = self
            .cells
            .par_iter()
            .map(|c| {
                let xk = DVector::from_iterator(c.skeleton_dofs.len(), c.skeleton_dofs.iter().map(|&g| skel[g]));
                let xi = c.recover(&xk);
                (xi.rows(0, c.n_sigma).into_owned(), xi.rows(c.n_sigma, c.n_u).into_owned())
            })
            .collect();
        let (stress, displacement) = interior.into_iter().unzip();
        let nd = dofs.dim * dofs.n_trace_nodes();
        WgSolution {
            dim: dofs.dim,
            k: dofs.k,
            stress,
            displacement,
            trace: skel[..nd].to_vec(),
            stress_trace: skel[nd..].to_vec(),
        }
    }
}

/// Computes every cell's condensed contribution, interpolates the Dirichlet
/// data and assembles the free-dof system.
pub fn assemble_global(mesh: &Mesh, dofs: &DofMap, problem: &ElasticityProblem) -> Result<CondensedSystem> {
    let d = mesh.dim();
    let cells: Vec<CondensedCell> = (0..mesh.cells().len())
        .into_par_iter()
        .map(|c| {
            let local = LocalElementSystem::new(mesh, dofs, problem, c)?;
            condense(&local, dofs)
        })
        .collect::<Result<_>>()?;

    let n_skel = dofs.n_skeleton_dofs();
    let mut dirichlet_values = vec![0.0; n_skel];
    for a in 0..d {
        let g = scott_zhang_boundary(mesh, dofs, |p| (problem.dirichlet)(p)[a])?;
        for node in 0..dofs.n_trace_nodes() {
            if dofs.dirichlet[node] {
                dirichlet_values[dofs.displacement_dof(node, a)] = g.values[node];
            }
        }
    }
    let mut free_index = vec![None; n_skel];
    let mut free_dofs = Vec::with_capacity(n_skel);
    for (dof, slot) in free_index.iter_mut().enumerate() {
        if !dofs.is_fixed(dof) {
            *slot = Some(free_dofs.len());
            free_dofs.push(dof);
        }
    }

    let cliques: Vec<Vec<usize>> =
        cells.iter().map(|c| c.skeleton_dofs.iter().filter_map(|&g| free_index[g]).collect()).collect();
    let mut asm = SymmetricAssembler::from_cliques(free_dofs.len(), cliques.iter().map(|c| c.as_slice()));
    let mut rhs = vec![0.0; free_dofs.len()];
    for c in &cells {
        for (li, &gi) in c.skeleton_dofs.iter().enumerate() {
            let Some(fi) = free_index[gi] else { continue };
            rhs[fi] += c.rhs[li];
            for (lj, &gj) in c.skeleton_dofs.iter().enumerate() {
                match free_index[gj] {
                    Some(fj) => asm.add(fi, fj, c.schur[(li, lj)]),
                    None => rhs[fi] -= c.schur[(li, lj)] * dirichlet_values[gj],
                }
            }
        }
    }
    let matrix = asm.finish(SYMMETRY_TOLERANCE)?;
    Ok(CondensedSystem { matrix, rhs, free_dofs, free_index, dirichlet_values, cells })
}

/// Residual of the uncondensed system at a computed solution, relative to
/// the norm of its right-hand side. Rows of Dirichlet-fixed dofs are left out.
pub fn uncondensed_residual(
    mesh: &Mesh,
    dofs: &DofMap,
    problem: &ElasticityProblem,
    system: &CondensedSystem,
    solution: &WgSolution,
) -> Result<f64> {
    let d = dofs.dim;
    let nd = d * dofs.n_trace_nodes();
    let skel: Vec<f64> = solution.trace.iter().chain(&solution.stress_trace).copied().collect();
    let locals: Vec<(f64, f64, Vec<(usize, f64, f64)>)> = (0..mesh.cells().len())
        .into_par_iter()
        .map(|c| -> Result<_> {
            let local = LocalElementSystem::new(mesh, dofs, problem, c)?;
            let (m, rhs) = local.full_system();
            let (ns, nu) = (local.n_sigma(), local.n_u());
            let mut x = DVector::zeros(m.nrows());
            x.rows_mut(0, ns).copy_from(&solution.stress[c]);
            x.rows_mut(ns, nu).copy_from(&solution.displacement[c]);
            let mut off = ns + nu;
            let mut dof_of = Vec::new();
            for &node in &local.trace_nodes {
                for a in 0..d {
                    dof_of.push(node * d + a);
                }
            }
            for &t in &local.stress_nodes {
                dof_of.push(nd + t);
            }
            for &g in &dof_of {
                x[off] = skel[g];
                off += 1;
            }
            let r = &m * &x - &rhs;
            let ni = ns + nu;
            let rin = r.rows(0, ni).norm_squared();
            let bin = rhs.rows(0, ni).norm_squared();
            let skel_rows = dof_of.iter().enumerate().map(|(l, &g)| (g, r[ni + l], rhs[ni + l])).collect();
            Ok((rin, bin, skel_rows))
        })
        .collect::<Result<_>>()?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut rs = vec![0.0; skel.len()];
    let mut bs = vec![0.0; skel.len()];
    for (rin, bin, rows) in locals {
        num += rin;
        den += bin;
        for (g, r, b) in rows {
            rs[g] += r;
            bs[g] += b;
        }
    }
    for g in 0..skel.len() {
        if system.free_index[g].is_some() {
            num += rs[g] * rs[g];
            den += bs[g] * bs[g];
        }
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

/// Discrete solution: per-cell stress and displacement coefficients plus the
/// skeleton traces.
#[derive(Clone, Debug)]
pub struct WgSolution {
    pub dim: usize,
    pub k: usize,
    /// Per cell, `[s][psi]` coefficients over the symmetric tensor basis.
    pub stress: Vec<DVector<f64>>,
    /// Per cell, `[a][m]` coefficients of the interior displacement.
    pub displacement: Vec<DVector<f64>>,
    /// Displacement trace, `node * d + a`.
    pub trace: Vec<f64>,
    /// Stress trace per stress-trace node (empty when `k + 1 >= d`).
    pub stress_trace: Vec<f64>,
}

impl WgSolution {
    pub fn stress_at(&self, mesh: &Mesh, cell: usize, p: &Point) -> Matrix3<f64> {
        let basis = cell_basis(mesh, cell, self.k);
        let phi = basis.eval(p);
        let ns = phi.len();
        let mut out = Matrix3::zeros();
        for (s, e) in sym_basis(self.dim).iter().enumerate() {
            let c: f64 = (0..ns).map(|q| self.stress[cell][s * ns + q] * phi[q]).sum();
            out += e * c;
        }
        out
    }

    pub fn displacement_at(&self, mesh: &Mesh, cell: usize, p: &Point) -> Point {
        let basis = cell_basis(mesh, cell, self.k + 1);
        let phi = basis.eval(p);
        let nu = phi.len();
        let mut out = Point::zeros();
        for a in 0..self.dim {
            out[a] = (0..nu).map(|m| self.displacement[cell][a * nu + m] * phi[m]).sum();
        }
        out
    }

    /// `grad u_i` with rows indexed by component.
    pub fn displacement_gradient_at(&self, mesh: &Mesh, cell: usize, p: &Point) -> Matrix3<f64> {
        let basis = cell_basis(mesh, cell, self.k + 1);
        let g = basis.grad(p);
        let nu = g.len();
        let mut out = Matrix3::zeros();
        for a in 0..self.dim {
            for b in 0..self.dim {
                out[(a, b)] = (0..nu).map(|m| self.displacement[cell][a * nu + m] * g[m][b]).sum();
            }
        }
        out
    }
}
