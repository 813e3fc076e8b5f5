//! Weak Galerkin discretization of linear elasticity with symmetric stress
//! and a continuous displacement trace.
//!
//! The main entry point is [`solve_elasticity`]; [`verify`] holds the
//! manufactured solutions and the convergence harness.

pub mod assembly;
pub mod error;
pub mod mesh;
pub mod polyquad;
pub mod solver;
pub mod verify;
pub mod weakcalc;
pub mod wgspace;

pub use assembly::{
    assemble_global, solve_elasticity, CondensedSystem, ElasticityProblem, LameParameters, SolveOutcome, WgSolution,
};
pub use error::{Error, Result};
pub use mesh::{FaceMarker, Mesh, Point};
pub use solver::{SolveMethod, SolveOptions, SolveReport};
pub use verify::{CaseId, ConvergenceReport, ManufacturedCase, MeshFamily, StudyConfig};
pub use wgspace::DofMap;
