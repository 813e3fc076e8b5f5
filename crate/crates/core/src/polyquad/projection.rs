use nalgebra::{DMatrix, DVector};

use super::{CellBasis, FaceBasis, QuadratureRule};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Gram matrix `M[m][n] = sum_q w_q phi_m(x_q) phi_n(x_q)`.
pub fn mass_matrix(n: usize, eval: impl Fn(&Point, &mut [f64]), q: &QuadratureRule) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut phi = vec![0.0; n];
    for (p, w) in q.points.iter().zip(&q.weights) {
        eval(p, &mut phi);
        for j in 0..n {
            let wj = w * phi[j];
            for i in j..n {
                m[(i, j)] += wj * phi[i];
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    m
}

/// L2 projection of `f` onto the span of `eval` with respect to `q`.
pub fn l2_project(
    n: usize,
    eval: impl Fn(&Point, &mut [f64]),
    f: impl Fn(&Point) -> f64,
    q: &QuadratureRule,
) -> Result<DVector<f64>> {
    let m = mass_matrix(n, &eval, q);
    let mut rhs = DVector::zeros(n);
    let mut phi = vec![0.0; n];
    for (p, w) in q.points.iter().zip(&q.weights) {
        eval(p, &mut phi);
        let fw = w * f(p);
        for i in 0..n {
            rhs[i] += fw * phi[i];
        }
    }
    let chol = m.cholesky().ok_or_else(|| Error::SingularMass("projection mass matrix".into()))?;
    Ok(chol.solve(&rhs))
}

/// Scaled monomial basis of degree `deg` on a cell, centered at the centroid.
pub fn cell_basis(mesh: &Mesh, cell: usize, deg: usize) -> CellBasis {
    let c = &mesh.cells()[cell];
    CellBasis::new(mesh.dim(), deg, c.centroid, c.diameter)
}

/// Quadrature over a cell, assembled from its sub-simplices.
pub fn cell_quadrature(mesh: &Mesh, cell: usize, order: usize) -> Result<QuadratureRule> {
    QuadratureRule::on_simplices(&mesh.cells()[cell].subsimplices, order)
}

/// Local basis of degree `deg` on a skeleton simplex.
pub fn face_basis(mesh: &Mesh, skeleton: usize, deg: usize) -> FaceBasis {
    let s = &mesh.skeleton()[skeleton];
    let pts: Vec<Point> = s.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
    FaceBasis::new(deg, &s.vertices, &pts)
}

pub fn face_quadrature(mesh: &Mesh, skeleton: usize, order: usize) -> Result<QuadratureRule> {
    let s = &mesh.skeleton()[skeleton];
    let pts: Vec<Point> = s.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
    QuadratureRule::on_simplex(&pts, order)
}

/// `Q_j^i f` on a cell, as coefficients in [`cell_basis`].
pub fn project_interior(mesh: &Mesh, cell: usize, j: usize, f: impl Fn(&Point) -> f64) -> Result<DVector<f64>> {
    let basis = cell_basis(mesh, cell, j);
    let q = cell_quadrature(mesh, cell, 2 * j + 8)?;
    l2_project(basis.len(), |p, o| basis.eval_into(p, o), f, &q)
        .map_err(|_| Error::SingularMass(format!("cell {cell}")))
}

/// `Q_j^b f` on a skeleton simplex, as coefficients in [`face_basis`].
pub fn project_face(mesh: &Mesh, skeleton: usize, j: usize, f: impl Fn(&Point) -> f64) -> Result<DVector<f64>> {
    let basis = face_basis(mesh, skeleton, j);
    let q = face_quadrature(mesh, skeleton, 2 * j + 8)?;
    l2_project(basis.len(), |p, o| basis.eval_into(p, o), f, &q)
        .map_err(|_| Error::SingularMass(format!("skeleton face {skeleton}")))
}
