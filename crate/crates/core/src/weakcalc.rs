//! Element-local discrete weak gradient and weak divergence.
//!
//! For `v = {v_i, v_b}` on a cell `T`, the weak gradient `grad_w v` in
//! `[P_r(T)]^d` is defined by
//!
//! ```text
//! (grad_w v, psi)_T = -(v_i, div psi)_T + <v_b, psi . n>_{dT}
//! ```
//!
//! and the weak divergence of a vector `v` in `P_r(T)` by
//!
//! ```text
//! (div_w v, q)_T = -(v_i, grad q)_T + <v_b . n, q>_{dT}.
//! ```
//!
//! Traces are passed as coefficients of [`FaceBasis`] on each boundary piece
//! of the cell, in the order of [`Cell::boundary`](crate::mesh::Cell).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{FaceMarker, Mesh, Point};
use crate::polyquad::{cell_basis, face_basis, mass_matrix, CellBasis, FaceBasis, QuadratureRule};

/// A boundary piece of a cell with its quadrature.
#[derive(Clone, Debug)]
pub struct PieceGeometry {
    pub skeleton: usize,
    pub face: usize,
    /// Outward unit normal with respect to the cell.
    pub normal: Point,
    /// Diameter of the parent proper face.
    pub h_face: f64,
    pub marker: FaceMarker,
    pub measure: f64,
    pub quad: QuadratureRule,
}

/// Quadrature on a cell and on every piece of its boundary.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub cell: usize,
    pub dim: usize,
    pub order: usize,
    pub quad: QuadratureRule,
    pub pieces: Vec<PieceGeometry>,
}

impl CellGeometry {
    pub fn new(mesh: &Mesh, cell: usize, order: usize) -> Result<Self> {
        let c = &mesh.cells()[cell];
        let quad = QuadratureRule::on_simplices(&c.subsimplices, order)?;
        let mut pieces = Vec::with_capacity(c.boundary.len());
        for piece in &c.boundary {
            let s = &mesh.skeleton()[piece.skeleton];
            let face = mesh.parent_face(piece.skeleton);
            let pts = mesh.oriented_piece(piece);
            pieces.push(PieceGeometry {
                skeleton: piece.skeleton,
                face: s.parent,
                normal: mesh.piece_normal(piece),
                h_face: face.diameter,
                marker: face.marker,
                measure: s.measure,
                quad: QuadratureRule::on_simplex(&pts, order)?,
            });
        }
        Ok(CellGeometry { cell, dim: mesh.dim(), order, quad, pieces })
    }
}

fn solve_mass(mass: &DMatrix<f64>, rhs: &DMatrix<f64>, blocks: usize, cell: usize) -> Result<DMatrix<f64>> {
    let chol = mass.clone().cholesky().ok_or_else(|| Error::SingularMass(format!("cell {cell}")))?;
    let n = mass.nrows();
    let mut out = rhs.clone();
    for b in 0..blocks {
        let mut rows = out.rows_mut(b * n, n);
        let sol = chol.solve(&rows.clone_owned());
        rows.copy_from(&sol);
    }
    Ok(out)
}

/// The scalar weak gradient on one cell as a dense matrix.
///
/// Columns: `P_{interior_deg}(T)` coefficients, then the face-basis
/// coefficients of degree `trace_deg` on each boundary piece. Rows: component
/// `b` of the gradient times the `P_{target_deg}(T)` basis, i.e. `[b][psi]`.
#[derive(Clone, Debug)]
pub struct WeakGradient {
    pub dim: usize,
    pub interior: CellBasis,
    pub target: CellBasis,
    pub traces: Vec<FaceBasis>,
    /// Column offset of each piece's trace block.
    pub trace_offsets: Vec<usize>,
    pub ncols: usize,
    /// Target-space mass matrix.
    pub mass: DMatrix<f64>,
    /// Moments `(grad_w v, psi e_b)_T`.
    pub moments: DMatrix<f64>,
    /// Coefficients of `grad_w v`.
    pub matrix: DMatrix<f64>,
}

impl WeakGradient {
    pub fn new(
        mesh: &Mesh,
        geom: &CellGeometry,
        interior_deg: usize,
        trace_deg: usize,
        target_deg: usize,
    ) -> Result<Self> {
        let d = geom.dim;
        let interior = cell_basis(mesh, geom.cell, interior_deg);
        let target = cell_basis(mesh, geom.cell, target_deg);
        let traces: Vec<FaceBasis> = geom.pieces.iter().map(|p| face_basis(mesh, p.skeleton, trace_deg)).collect();
        let (ni, nr) = (interior.len(), target.len());
        let mut trace_offsets = Vec::with_capacity(traces.len());
        let mut ncols = ni;
        for t in &traces {
            trace_offsets.push(ncols);
            ncols += t.len();
        }
        let mass = mass_matrix(nr, |p, o| target.eval_into(p, o), &geom.quad);
        let mut moments = DMatrix::zeros(d * nr, ncols);
        let mut phi = vec![0.0; ni];
        let mut dpsi = vec![[0.0; 3]; nr];
        for (p, w) in geom.quad.points.iter().zip(&geom.quad.weights) {
            interior.eval_into(p, &mut phi);
            target.grad_into(p, &mut dpsi);
            for b in 0..d {
                for r in 0..nr {
                    let g = w * dpsi[r][b];
                    if g == 0.0 {
                        continue;
                    }
                    for m in 0..ni {
                        moments[(b * nr + r, m)] -= g * phi[m];
                    }
                }
            }
        }
        let mut psi = vec![0.0; nr];
        for ((piece, tb), &off) in geom.pieces.iter().zip(&traces).zip(&trace_offsets) {
            let mut chi = vec![0.0; tb.len()];
            for (p, w) in piece.quad.points.iter().zip(&piece.quad.weights) {
                target.eval_into(p, &mut psi);
                tb.eval_into(p, &mut chi);
                for b in 0..d {
                    let wn = w * piece.normal[b];
                    for r in 0..nr {
                        for l in 0..chi.len() {
                            moments[(b * nr + r, off + l)] += wn * psi[r] * chi[l];
                        }
                    }
                }
            }
        }
        let matrix = solve_mass(&mass, &moments, d, geom.cell)?;
        Ok(WeakGradient { dim: d, interior, target, traces, trace_offsets, ncols, mass, moments, matrix })
    }

    /// Coefficients of `grad_w v`, laid out as `[b][psi]`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }
}

/// The weak divergence of a vector field on one cell as a dense matrix.
///
/// Columns: `[a][m]` coefficients of the interior field in
/// `[P_{interior_deg}(T)]^d`, then face-basis coefficients of the normal
/// trace `v_b . n` on each boundary piece. Rows: `P_{target_deg}(T)`.
#[derive(Clone, Debug)]
pub struct WeakDivergence {
    pub dim: usize,
    pub interior: CellBasis,
    pub target: CellBasis,
    pub traces: Vec<FaceBasis>,
    pub trace_offsets: Vec<usize>,
    pub ncols: usize,
    pub mass: DMatrix<f64>,
    pub moments: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
}

impl WeakDivergence {
    pub fn new(
        mesh: &Mesh,
        geom: &CellGeometry,
        interior_deg: usize,
        trace_deg: usize,
        target_deg: usize,
    ) -> Result<Self> {
        let d = geom.dim;
        let interior = cell_basis(mesh, geom.cell, interior_deg);
        let target = cell_basis(mesh, geom.cell, target_deg);
        let traces: Vec<FaceBasis> = geom.pieces.iter().map(|p| face_basis(mesh, p.skeleton, trace_deg)).collect();
        let (ni, nr) = (interior.len(), target.len());
        let mut trace_offsets = Vec::with_capacity(traces.len());
        let mut ncols = d * ni;
        for t in &traces {
            trace_offsets.push(ncols);
            ncols += t.len();
        }
        let mass = mass_matrix(nr, |p, o| target.eval_into(p, o), &geom.quad);
        let mut moments = DMatrix::zeros(nr, ncols);
        let mut phi = vec![0.0; ni];
        let mut dq = vec![[0.0; 3]; nr];
        for (p, w) in geom.quad.points.iter().zip(&geom.quad.weights) {
            interior.eval_into(p, &mut phi);
            target.grad_into(p, &mut dq);
            for r in 0..nr {
                for a in 0..d {
                    let g = w * dq[r][a];
                    for m in 0..ni {
                        moments[(r, a * ni + m)] -= g * phi[m];
                    }
                }
            }
        }
        let mut q = vec![0.0; nr];
        for ((piece, tb), &off) in geom.pieces.iter().zip(&traces).zip(&trace_offsets) {
            let mut chi = vec![0.0; tb.len()];
            for (p, w) in piece.quad.points.iter().zip(&piece.quad.weights) {
                target.eval_into(p, &mut q);
                tb.eval_into(p, &mut chi);
                for r in 0..nr {
                    for l in 0..chi.len() {
                        moments[(r, off + l)] += w * q[r] * chi[l];
                    }
                }
            }
        }
        let matrix = solve_mass(&mass, &moments, 1, geom.cell)?;
        Ok(WeakDivergence { dim: d, interior, target, traces, trace_offsets, ncols, mass, moments, matrix })
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }
}
