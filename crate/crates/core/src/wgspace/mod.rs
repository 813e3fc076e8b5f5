//! Degrees of freedom of the discrete spaces and the boundary interpolant
//! used for Dirichlet data.

mod dofmap;
mod scott_zhang;

pub use dofmap::DofMap;
pub use scott_zhang::{scott_zhang_boundary, SkeletonFunction};
