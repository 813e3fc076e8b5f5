use nalgebra::{DMatrix, DVector};

use super::local::LocalElementSystem;
use crate::error::{Error, Result};
use crate::wgspace::DofMap;

/// A cell's contribution to the skeleton system after eliminating its
/// interior unknowns, with what is needed to recover them.
///
/// Interior unknowns are `(sigma_i, u_i)`, skeleton unknowns `(u_b, sigma_tr)`
/// in local order. With `N` the local matrix, the interior values are
/// `x_I = x0 - recovery * x_K`.
#[derive(Clone, Debug)]
pub struct CondensedCell {
    pub cell: usize,
    pub n_sigma: usize,
    pub n_u: usize,
    /// Global skeleton dof of each local skeleton unknown.
    pub skeleton_dofs: Vec<usize>,
    pub schur: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub x0: DVector<f64>,
    pub recovery: DMatrix<f64>,
}

impl CondensedCell {
    /// Interior unknowns `(sigma_i, u_i)` given the local skeleton values.
    pub fn recover(&self, x_k: &DVector<f64>) -> DVector<f64> {
        &self.x0 - &self.recovery * x_k
    }
}

/// Solves `N_II X = R` for the saddle-point interior block
/// `[[-P, B], [B^T, S]]` by two Cholesky factorizations.
pub(crate) struct InteriorSolver {
    p: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    c: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    b: DMatrix<f64>,
}

impl InteriorSolver {
    pub(crate) fn new(local: &LocalElementSystem) -> Result<Self> {
        let cell = local.cell;
        let p = (&local.a + &local.z_ii).cholesky().ok_or(Error::SingularInterior { cell })?;
        let pinv_b = p.solve(&local.b_i);
        let c = (&local.s_ii + local.b_i.transpose() * pinv_b).cholesky().ok_or(Error::SingularInterior { cell })?;
        Ok(InteriorSolver { p, c, b: local.b_i.clone() })
    }

    /// Stacked `(sigma, u)` solution for right-hand sides `(r1, r2)`.
    pub(crate) fn solve(&self, r1: &DMatrix<f64>, r2: &DMatrix<f64>) -> DMatrix<f64> {
        let pinv_r1 = self.p.solve(r1);
        let y = self.c.solve(&(r2 + self.b.transpose() * &pinv_r1));
        let x = self.p.solve(&(&self.b * &y)) - pinv_r1;
        let mut out = DMatrix::zeros(x.nrows() + y.nrows(), r1.ncols());
        out.rows_mut(0, x.nrows()).copy_from(&x);
        out.rows_mut(x.nrows(), y.nrows()).copy_from(&y);
        out
    }
}

/// Static condensation of one cell.
pub fn condense(local: &LocalElementSystem, dofs: &DofMap) -> Result<CondensedCell> {
    let d = local.dim;
    let (ns, nu, nb, nt) = (local.n_sigma(), local.n_u(), local.n_b(), local.n_t());
    let nk = nb + nt;
    let solver = InteriorSolver::new(local)?;

    // Coupling N_IK and the interior right-hand side as extra column.
    let mut r1 = DMatrix::zeros(ns, nk + 1);
    let mut r2 = DMatrix::zeros(nu, nk + 1);
    r1.view_mut((0, 0), (ns, nb)).copy_from(&local.b_b);
    r1.view_mut((0, nb), (ns, nt)).copy_from(&-&local.z_it);
    r2.view_mut((0, 0), (nu, nb)).copy_from(&local.s_ib);
    r2.column_mut(nk).copy_from(&-&local.f_i);
    let sol = solver.solve(&r1, &r2);
    let recovery = sol.columns(0, nk).into_owned();
    let x0 = sol.column(nk).into_owned();

    let mut n_ik = DMatrix::zeros(ns + nu, nk);
    n_ik.view_mut((0, 0), (ns, nk)).copy_from(&r1.columns(0, nk));
    n_ik.view_mut((ns, 0), (nu, nk)).copy_from(&r2.columns(0, nk));
    let mut schur = -(n_ik.transpose() * &recovery);
    {
        let mut uu = schur.view_mut((0, 0), (nb, nb));
        uu += &local.s_bb;
    }
    {
        let mut tt = schur.view_mut((nb, nb), (nt, nt));
        tt -= &local.z_tt;
    }
    let mut rhs = -(n_ik.transpose() * &x0);
    {
        let mut rb = rhs.rows_mut(0, nb);
        rb -= &local.f_b;
    }

    let mut skeleton_dofs = Vec::with_capacity(nk);
    for &node in &local.trace_nodes {
        for a in 0..d {
            skeleton_dofs.push(dofs.displacement_dof(node, a));
        }
    }
    for &t in &local.stress_nodes {
        skeleton_dofs.push(dofs.stress_trace_dof(t));
    }
    Ok(CondensedCell { cell: local.cell, n_sigma: ns, n_u: nu, skeleton_dofs, schur, rhs, x0, recovery })
}
