use crate::error::{Error, Result};

/// Symmetric sparse matrix stored as its lower triangle (diagonal included)
/// in compressed sparse column form.
#[derive(Clone, Debug)]
pub struct SparseSymmetric {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    /// `max |K_ij - K_ji| / max |K_ij|` measured when the matrix was built.
    asymmetry: f64,
}

impl SparseSymmetric {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the lower triangle.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Builds from entries of the full matrix (both triangles, duplicates
    /// summed). Fails if the result is not symmetric to `tol` relative to its
    /// largest entry.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)], tol: f64) -> Result<Self> {
        let mut asm = SymmetricAssembler::new(n, triplets.iter().map(|&(i, j, _)| (i, j)));
        for &(i, j, v) in triplets {
            asm.add(i, j, v);
        }
        asm.finish(tol)
    }

    /// Builds from a dense symmetric matrix, dropping exact zeros.
    pub fn from_dense(a: &nalgebra::DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = a.nrows();
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, &t, tol)
    }

    /// `y = K x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let v = self.values[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// `b - K (x_hi + x_lo)` accumulated in double-double arithmetic and
    /// rounded once at the end.
    pub fn residual_extended(&self, b: &[f64], x_hi: &[f64], x_lo: &[f64]) -> Vec<f64> {
        let mut hi = b.to_vec();
        let mut lo = vec![0.0; self.n];
        let mut acc = |i: usize, v: f64, j: usize| {
            let p = -v * x_hi[j];
            let e = (-v).mul_add(x_hi[j], -p);
            let (s, t) = two_sum(hi[i], p);
            hi[i] = s;
            lo[i] += t + e - v * x_lo[j];
        };
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let v = self.values[p];
                acc(i, v, j);
                if i != j {
                    acc(j, v, i);
                }
            }
        }
        hi.iter().zip(&lo).map(|(h, l)| h + l).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                if self.row_idx[p] == j {
                    d[j] = self.values[p];
                }
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut a = nalgebra::DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                a[(i, j)] = self.values[p];
                a[(j, i)] = self.values[p];
            }
        }
        a
    }
}

/// Accumulates a symmetric matrix on a fixed full sparsity pattern.
///
/// The pattern is fixed up front so that scattering element matrices is a
/// binary search per entry rather than a triplet list.
#[derive(Clone, Debug)]
pub struct SymmetricAssembler {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricAssembler {
    /// `entries` lists every `(row, col)` position that will receive a value.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in entries {
            cols[j].push(i);
        }
        Self::from_columns(n, cols)
    }

    /// Pattern from groups of dofs that are all coupled to each other.
    pub fn from_cliques<'a>(n: usize, cliques: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for c in cliques {
            for &j in c {
                cols[j].extend_from_slice(c);
            }
        }
        Self::from_columns(n, cols)
    }

    fn from_columns(n: usize, mut cols: Vec<Vec<usize>>) -> Self {
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        for c in cols.iter_mut() {
            c.sort_unstable();
            c.dedup();
            row_idx.extend_from_slice(c);
            col_ptr.push(row_idx.len());
        }
        let values = vec![0.0; row_idx.len()];
        SymmetricAssembler { n, col_ptr, row_idx, values }
    }

    /// Adds `v` at `(i, j)`. Panics if the position is not in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        let p = self.row_idx[range.clone()].binary_search(&i).expect("entry outside the assembly pattern");
        self.values[range.start + p] += v;
    }

    /// Certifies symmetry and keeps the lower triangle.
    pub fn finish(self, tol: f64) -> Result<SparseSymmetric> {
        let n = self.n;
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let get = |i: usize, j: usize| -> f64 {
            let range = self.col_ptr[j]..self.col_ptr[j + 1];
            match self.row_idx[range.clone()].binary_search(&i) {
                Ok(p) => self.values[range.start + p],
                Err(_) => 0.0,
            }
        };
        let mut diff: f64 = 0.0;
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for j in 0..n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                if i < j {
                    continue;
                }
                let v = self.values[p];
                if i != j {
                    diff = diff.max((v - get(j, i)).abs());
                }
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        // Entries present only in the upper triangle.
        for j in 0..n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                if i < j && !self.row_idx[self.col_ptr[i]..self.col_ptr[i + 1]].contains(&j) {
                    diff = diff.max(self.values[p].abs());
                }
            }
        }
        let asymmetry = if scale > 0.0 { diff / scale } else { 0.0 };
        if asymmetry > tol {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric: relative asymmetry {asymmetry:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(SparseSymmetric { n, col_ptr, row_idx, values, asymmetry })
    }
}

/// Error-free sum: `a + b = s + t` exactly.
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}
