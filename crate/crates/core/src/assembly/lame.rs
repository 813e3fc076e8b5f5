use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lamé coefficients of an isotropic material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LameParameters {
    pub mu: f64,
    pub lambda: f64,
}

impl LameParameters {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) || !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("Lamé parameters must be positive, got mu={mu}, lambda={lambda}")));
        }
        Ok(LameParameters { mu, lambda })
    }

    /// `c` in `A sigma = (sigma - c tr(sigma) I) / (2 mu)`.
    pub fn trace_factor(&self, d: usize) -> f64 {
        self.lambda / (2.0 * self.mu + d as f64 * self.lambda)
    }

    /// The compliance tensor applied to `sigma` (upper-left `d x d` block).
    pub fn compliance(&self, d: usize, sigma: &Matrix3<f64>) -> Matrix3<f64> {
        let tr = (0..d).map(|i| sigma[(i, i)]).sum::<f64>();
        let mut out = *sigma;
        for i in 0..d {
            out[(i, i)] -= self.trace_factor(d) * tr;
        }
        out / (2.0 * self.mu)
    }

    /// `sigma = 2 mu eps + lambda tr(eps) I`.
    pub fn stiffness(&self, d: usize, eps: &Matrix3<f64>) -> Matrix3<f64> {
        let tr = (0..d).map(|i| eps[(i, i)]).sum::<f64>();
        let mut out = eps * (2.0 * self.mu);
        for i in 0..d {
            out[(i, i)] += self.lambda * tr;
        }
        out
    }

    /// Compliance acting on coefficients in [`sym_basis`]:
    /// `(I - c t t^T) / (2 mu)` with `t_s = tr(E^s)`.
    pub fn compliance_matrix(&self, d: usize) -> DMatrix<f64> {
        let basis = sym_basis(d);
        let c = self.trace_factor(d);
        let m = basis.len();
        DMatrix::from_fn(m, m, |s, r| {
            let delta = if s == r { 1.0 } else { 0.0 };
            (delta - c * sym_trace(&basis[s], d) * sym_trace(&basis[r], d)) / (2.0 * self.mu)
        })
    }
}

/// Orthonormal basis of symmetric `d x d` tensors under `A : B`:
/// `e_a e_a^T` for each axis, then `(e_a e_b^T + e_b e_a^T) / sqrt 2` for
/// `a < b`.
pub fn sym_basis(d: usize) -> Vec<Matrix3<f64>> {
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for a in 0..d {
        let mut e = Matrix3::zeros();
        e[(a, a)] = 1.0;
        out.push(e);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..d {
        for b in a + 1..d {
            let mut e = Matrix3::zeros();
            e[(a, b)] = r;
            e[(b, a)] = r;
            out.push(e);
        }
    }
    out
}

pub fn sym_trace(t: &Matrix3<f64>, d: usize) -> f64 {
    (0..d).map(|i| t[(i, i)]).sum()
}

/// Deviatoric part `tau - tr(tau) I / d`.
pub fn deviator(t: &Matrix3<f64>, d: usize) -> Matrix3<f64> {
    let tr = sym_trace(t, d) / d as f64;
    let mut out = *t;
    for i in 0..d {
        out[(i, i)] -= tr;
    }
    out
}

/// Frobenius inner product of the upper-left `d x d` blocks.
pub fn contract(a: &Matrix3<f64>, b: &Matrix3<f64>, d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}
