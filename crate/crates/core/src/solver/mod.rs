//! Sparse symmetric solves of the condensed skeleton system.

mod cg;
mod ldlt;
mod sparse;

use serde::{Deserialize, Serialize};

pub use cg::{pcg, CgOutcome};
pub use ldlt::{amd_ordering, LdltFactor, PIVOT_TOLERANCE};
pub use sparse::{SparseSymmetric, SymmetricAssembler};

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Sparse `L D L^T` on an AMD ordering.
    #[default]
    Direct,
    /// Jacobi-preconditioned CG, falling back to the direct solver if the
    /// matrix shows non-positive curvature or CG does not converge.
    Cg,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub cg_tolerance: f64,
    pub cg_max_iter: usize,
    /// Iterative refinement steps after the direct solve. Residuals are
    /// accumulated in double-double and the iterate is carried as a
    /// double-double pair.
    pub refinement_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { method: SolveMethod::Direct, cg_tolerance: 1e-12, cg_max_iter: 20_000, refinement_steps: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: Option<usize>,
    /// `||K x - b|| / ||b||` of the refined iterate, recomputed from the
    /// inputs in double-double (absolute when `b = 0`).
    pub relative_residual: f64,
    /// The same residual for the iterate rounded to `f64`. For systems with
    /// `||K|| ||x|| >> ||b||` (large `lambda` without a stress trace) this is
    /// bounded below by roughly `eps ||K|| ||x|| / ||b||`.
    pub rounded_residual: f64,
    /// All pivots (or CG curvatures) positive.
    pub positive_definite: bool,
    pub negative_pivots: Option<usize>,
    pub dimension: usize,
}

pub fn relative_residual(a: &SparseSymmetric, x: &[f64], b: &[f64]) -> f64 {
    relative_residual_extended(a, x, &vec![0.0; x.len()], b)
}

/// Relative residual of `x_hi + x_lo`, accumulated in double-double.
pub fn relative_residual_extended(a: &SparseSymmetric, x_hi: &[f64], x_lo: &[f64], b: &[f64]) -> f64 {
    let r = a.residual_extended(b, x_hi, x_lo);
    let num = norm(&r);
    let den = norm(b);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn norm(v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
}

/// Solves `K x = b`.
pub fn solve(a: &SparseSymmetric, b: &[f64], options: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    if options.method == SolveMethod::Cg {
        let out = pcg(a, b, options.cg_tolerance, options.cg_max_iter);
        if out.converged && out.positive_curvature {
            let relative_residual = relative_residual(a, &out.x, b);
            let report = SolveReport {
                method: SolveMethod::Cg,
                iterations: Some(out.iterations),
                relative_residual,
                rounded_residual: relative_residual,
                positive_definite: true,
                negative_pivots: None,
                dimension: a.dim(),
            };
            return Ok((out.x, report));
        }
    }
    let factor = LdltFactor::new(a)?;
    let mut x = factor.solve(b);
    let mut lo = vec![0.0; x.len()];
    for _ in 0..options.refinement_steps {
        let r = a.residual_extended(b, &x, &lo);
        let dx = factor.solve(&r);
        for ((h, l), d) in x.iter_mut().zip(lo.iter_mut()).zip(&dx) {
            let (s, e) = sparse::two_sum(*h, *d);
            let (s, e) = sparse::two_sum(s, e + *l);
            *h = s;
            *l = e;
        }
    }
    let report = SolveReport {
        method: SolveMethod::Direct,
        iterations: None,
        relative_residual: relative_residual_extended(a, &x, &lo, b),
        rounded_residual: relative_residual(a, &x, b),
        positive_definite: factor.is_positive_definite(),
        negative_pivots: Some(factor.negative_pivots()),
        dimension: a.dim(),
    };
    Ok((x, report))
}
