//! Local forms, static condensation and the global skeleton system.
//!
//! With `a_h(sigma, tau) = (A sigma, tau)`, `b_h(tau, v) = (tau, grad_w v)`,
//! the stabilizer `s_h` (weight `2 mu / h_E` on `u_i - u_b`) and, when
//! `k + 1 < d`, the stress-trace stabilizer `z_h` (weight `h_E / (2 mu)` on
//! `tr sigma_i - sigma_tr` over interior faces), the scheme reads
//!
//! ```text
//!  a_h(sigma, tau) + z_h(sigma, tau) - b_h(tau, u)  = 0
//! -b_h(sigma, v) - s_h(u, v)                         = (f, v_i) - <g_N, v_b>
//! ```
//!
//! Both equations are negated before assembly, so the displacement block is
//! positive and the stress block negative.

mod condense;
mod global;
mod lame;
mod local;

pub use condense::{condense, CondensedCell};
pub use global::{assemble_global, uncondensed_residual, CondensedSystem, WgSolution, SYMMETRY_TOLERANCE};
pub use lame::{contract, deviator, sym_basis, sym_trace, LameParameters};
pub(crate) use local::barycentric;
pub use local::{data_order, form_order, LocalElementSystem};

use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::solver::{solve, SolveOptions, SolveReport};
use crate::wgspace::DofMap;

pub type VectorField = Box<dyn Fn(&Point) -> Point + Send + Sync>;
/// Traction as a function of position and outward unit normal.
pub type TractionField = Box<dyn Fn(&Point, &Point) -> Point + Send + Sync>;

/// Material and data of a linear elasticity problem.
pub struct ElasticityProblem {
    pub lame: LameParameters,
    pub body_force: VectorField,
    pub dirichlet: VectorField,
    pub neumann: TractionField,
}

impl ElasticityProblem {
    /// Zero body force and boundary data.
    pub fn homogeneous(lame: LameParameters) -> Self {
        ElasticityProblem {
            lame,
            body_force: Box::new(|_| Point::zeros()),
            dirichlet: Box::new(|_| Point::zeros()),
            neumann: Box::new(|_, _| Point::zeros()),
        }
    }
}

impl std::fmt::Debug for ElasticityProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ElasticityProblem").field("lame", &self.lame).finish_non_exhaustive()
    }
}

/// Everything produced by one solve.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub dofs: DofMap,
    pub system: CondensedSystem,
    pub solution: WgSolution,
    pub report: SolveReport,
}

/// Builds the dof map, assembles, solves and recovers interior unknowns.
pub fn solve_elasticity(
    mesh: &Mesh,
    k: usize,
    problem: &ElasticityProblem,
    options: &SolveOptions,
) -> Result<SolveOutcome> {
    let dofs = DofMap::new(mesh, k);
    let system = assemble_global(mesh, &dofs, problem)?;
    let (x, report) = solve(&system.matrix, &system.rhs, options)?;
    let solution = system.recover(&dofs, &x);
    Ok(SolveOutcome { dofs, system, solution, report })
}
