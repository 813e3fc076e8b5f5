use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::amd;
use faer::sparse::SymbolicSparseColMatRef;

use super::SparseSymmetric;
use crate::error::{Error, Result};

/// Pivots below this multiple of the largest diagonal entry are treated as
/// zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Sparse `L D L^T` factorization without pivoting, on an approximate
/// minimum degree ordering. Works for positive definite and quasi-definite
/// matrices.
#[derive(Clone, Debug)]
pub struct LdltFactor {
    n: usize,
    /// `perm[k]` is the original index of permuted row `k`.
    perm: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    d: Vec<f64>,
}

/// Approximate minimum degree ordering of the pattern.
pub fn amd_ordering(a: &SparseSymmetric) -> Result<Vec<usize>> {
    let n = a.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let pattern = SymbolicSparseColMatRef::new_checked(n, n, a.col_ptr(), None, a.row_idx());
    let mut buf = MemBuffer::new(amd::order_scratch::<usize>(n, a.nnz()));
    amd::order(&mut perm, &mut perm_inv, pattern, amd::Control::default(), MemStack::new(&mut buf))
        .map_err(|e| Error::InvalidInput(format!("ordering failed: {e:?}")))?;
    Ok(perm)
}

impl LdltFactor {
    pub fn new(a: &SparseSymmetric) -> Result<Self> {
        let perm = amd_ordering(a)?;
        Self::with_ordering(a, perm)
    }

    pub fn with_ordering(a: &SparseSymmetric, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        // Upper triangle of P A P^T by columns: entry (i, j) with i <= j.
        let (ap, ai, ax) = {
            let mut count = vec![0usize; n + 1];
            for j in 0..n {
                for p in a.col_ptr()[j]..a.col_ptr()[j + 1] {
                    let (pi, pj) = (pinv[a.row_idx()[p]], pinv[j]);
                    count[pi.max(pj) + 1] += 1;
                }
            }
            for j in 0..n {
                count[j + 1] += count[j];
            }
            let mut next = count.clone();
            let mut ai = vec![0usize; a.nnz()];
            let mut ax = vec![0.0; a.nnz()];
            for j in 0..n {
                for p in a.col_ptr()[j]..a.col_ptr()[j + 1] {
                    let (pi, pj) = (pinv[a.row_idx()[p]], pinv[j]);
                    let col = pi.max(pj);
                    ai[next[col]] = pi.min(pj);
                    ax[next[col]] = a.values()[p];
                    next[col] += 1;
                }
            }
            (count, ai, ax)
        };

        // Elimination tree and column counts.
        let mut parent = vec![usize::MAX; n];
        let mut flag = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p];
                while i < k && flag[i] != k {
                    if parent[i] == usize::MAX {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut l_ptr = vec![0usize; n + 1];
        for k in 0..n {
            l_ptr[k + 1] = l_ptr[k] + lnz[k];
        }

        // Up-looking numeric factorization.
        let total = l_ptr[n];
        let mut l_idx = vec![0usize; total];
        let mut l_val = vec![0.0; total];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        lnz.iter_mut().for_each(|c| *c = 0);
        for k in 0..n {
            y[k] = 0.0;
            let mut top = n;
            flag[k] = k;
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p];
                y[i] += ax[p];
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let p2 = l_ptr[i] + lnz[i];
                for p in l_ptr[i]..p2 {
                    y[l_idx[p]] -= l_val[p] * yi;
                }
                let lki = yi / d[i];
                d[k] -= lki * yi;
                l_idx[p2] = k;
                l_val[p2] = lki;
                lnz[i] += 1;
            }
            if !(d[k].abs() > PIVOT_TOLERANCE * scale) {
                return Err(Error::SingularSystem { dof: perm[k], pivot: d[k] });
            }
        }
        Ok(LdltFactor { n, perm, l_ptr, l_idx, l_val, d })
    }

    /// True when every pivot is positive, i.e. the matrix is positive
    /// definite.
    pub fn is_positive_definite(&self) -> bool {
        self.d.iter().all(|&v| v > 0.0)
    }

    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn nnz_factor(&self) -> usize {
        self.l_val.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // Rows of L are stored by column of L^T: entry (k, i) lives in column i.
        for i in 0..n {
            let xi = x[i];
            for p in self.l_ptr[i]..self.l_ptr[i + 1] {
                x[self.l_idx[p]] -= self.l_val[p] * xi;
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut xi = x[i];
            for p in self.l_ptr[i]..self.l_ptr[i + 1] {
                xi -= self.l_val[p] * x[self.l_idx[p]];
            }
            x[i] = xi;
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }
}
