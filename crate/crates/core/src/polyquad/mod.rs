//! Polynomial bases, simplex quadrature and L2 projections.

mod basis;
mod lagrange;
mod projection;
mod quadrature;

pub use basis::{monomial_exponents, poly_dim, CellBasis, FaceBasis};
pub use lagrange::LagrangeBasis;
pub use projection::{
    cell_basis, cell_quadrature, face_basis, face_quadrature, l2_project, mass_matrix, project_face, project_interior,
};
pub use quadrature::{gauss_legendre, simplex_measure, simplex_rule, QuadratureRule, SimplexRule, MAX_ORDER};
