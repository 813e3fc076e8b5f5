use super::SparseSymmetric;

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Whether every search direction had positive curvature `p^T K p`.
    pub positive_curvature: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients, stopping at
/// `||r|| <= tol ||b||` or on the first non-positive curvature.
pub fn pcg(a: &SparseSymmetric, b: &[f64], tol: f64, max_iter: usize) -> CgOutcome {
    let n = a.dim();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return CgOutcome { x, iterations: 0, converged: true, positive_curvature: true };
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let ap = a.mul(&p);
        let curv = dot(&p, &ap);
        if !(curv > 0.0) {
            return CgOutcome { x, iterations: it, converged: false, positive_curvature: false };
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return CgOutcome { x, iterations: it + 1, converged: true, positive_curvature: true };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome { x, iterations: max_iter, converged: false, positive_curvature: true }
}
