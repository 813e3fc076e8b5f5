//! Manufactured solutions, error norms and convergence studies.

mod cases;
mod convergence;
mod norms;
mod selftest;

pub use cases::{CaseId, Factor, ManufacturedCase, Term};
pub use convergence::{
    convergence_study, count_dofs, interior_dofs_per_cell, lambda_sweep, rate, ConvergenceReport, ConvergenceRow,
    MeshFamily, RowDiagnostics, StudyConfig,
};
pub use norms::{error_norms, ErrorNorms};
pub use selftest::{
    algebraic_identities, commutation_check, condensation_check, condensation_discrepancy, dirichlet_integral,
    dirichlet_mean, gradient_identity_check, inf_sup_check, monolithic_solve, projection_suite, residual_check,
    run_selftest, scott_zhang_mean_check, scott_zhang_reproduction_check, single_simplex_mesh, symmetry_check,
    three_cell_mesh, zero_data_check, MonolithicSolution, PropertyResult, SelfTestReport,
};
