use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{error_norms, CaseId, ManufacturedCase};
use crate::assembly::{solve_elasticity, LameParameters};
use crate::error::{Error, Result};
use crate::mesh::{cube_tet_mesh, ladder_mesh, triangle_mesh_with, DiagonalPattern, Mesh};
use crate::polyquad::poly_dim;
use crate::solver::SolveOptions;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFamily {
    /// Structured triangles of the unit square.
    #[default]
    Triangle,
    /// Rectangles with hanging nodes on the unit square.
    Ladder,
    /// Kuhn tetrahedra of the unit cube.
    CubeTet,
}

impl MeshFamily {
    pub fn dim(self) -> usize {
        match self {
            MeshFamily::CubeTet => 3,
            _ => 2,
        }
    }

    pub fn build(self, n: usize, pattern: DiagonalPattern) -> Result<Mesh> {
        match self {
            MeshFamily::Triangle => triangle_mesh_with(n, pattern),
            MeshFamily::Ladder => ladder_mesh(n),
            MeshFamily::CubeTet => cube_tet_mesh(n),
        }
    }

    /// Skeleton dof count of the `n`-level mesh, from closed-form entity
    /// counts (approximate for the ladder family).
    pub fn estimate_dofs(self, n: usize, k: usize) -> usize {
        let n = n as u128;
        let k = k as u128;
        let (d, vertices, edges, faces): (u128, u128, u128, u128) = match self {
            MeshFamily::Triangle => (2, (n + 1) * (n + 1), 3 * n * n + 2 * n, 0),
            MeshFamily::Ladder => {
                let v = (n + 1) * (2 * n + 1);
                (2, v, v + n * n + n / 2, 0)
            }
            MeshFamily::CubeTet => {
                let v = (n + 1).pow(3);
                let e = 3 * n * (n + 1) * (n + 1) + 3 * n * n * (n + 1) + n * n * n;
                let f = 6 * n * n * (n + 1) + 6 * n * n * n;
                (3, v, e, f)
            }
        };
        let face_interior = if d == 3 && k >= 1 { k * (k.saturating_sub(1)) / 2 } else { 0 };
        let nodes = vertices + k * edges + face_interior * faces;
        let stress_trace = if k + 1 < d { vertices } else { 0 };
        (d * nodes + stress_trace).min(usize::MAX as u128) as usize
    }
}

/// Parameters of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub case: CaseId,
    pub family: MeshFamily,
    pub pattern: DiagonalPattern,
    pub k: usize,
    pub mu: f64,
    pub lambdas: Vec<f64>,
    /// Mesh sizes `n` (cells per side), in increasing order.
    pub levels: Vec<usize>,
    /// Largest allowed estimated skeleton dof count.
    pub dof_budget: Option<usize>,
    pub solve: SolveOptions,
}

impl StudyConfig {
    pub fn new(case: CaseId, k: usize, lambdas: Vec<f64>, levels: Vec<usize>) -> Self {
        let family = if case.dim() == 3 { MeshFamily::CubeTet } else { MeshFamily::Triangle };
        StudyConfig {
            case,
            family,
            pattern: DiagonalPattern::default(),
            k,
            mu: case.default_mu(),
            lambdas,
            levels,
            dof_budget: None,
            solve: SolveOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family.dim() != self.case.dim() {
            return Err(Error::InvalidInput(format!(
                "case {} needs a {}D mesh family",
                self.case.name(),
                self.case.dim()
            )));
        }
        if self.lambdas.is_empty() || self.levels.is_empty() {
            return Err(Error::InvalidInput("at least one lambda and one level are required".into()));
        }
        LameParameters::new(self.mu, 1.0)?;
        for &l in &self.lambdas {
            LameParameters::new(self.mu, l)?;
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) || self.levels[0] == 0 {
            return Err(Error::InvalidInput("levels must be positive and increasing".into()));
        }
        if self.k > 5 {
            return Err(Error::InvalidInput(format!("k = {} is above the supported maximum 5", self.k)));
        }
        Ok(())
    }
}

/// One line of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub case: String,
    pub k: usize,
    pub lambda: f64,
    pub level: usize,
    pub dofs: usize,
    pub err_u: f64,
    pub rate_u: Option<f64>,
    pub err_sigma: f64,
    pub rate_sigma: Option<f64>,
    pub err_gradu: f64,
    pub rate_gradu: Option<f64>,
}

/// Solver diagnostics kept alongside each row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowDiagnostics {
    pub free_dofs: usize,
    pub relative_residual: f64,
    pub rounded_residual: f64,
    pub positive_definite: bool,
    pub asymmetry: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub diagnostics: Vec<RowDiagnostics>,
}

pub fn rate(prev_err: f64, err: f64, prev_n: usize, n: usize) -> f64 {
    (prev_err / err).ln() / (n as f64 / prev_n as f64).ln()
}

impl ConvergenceReport {
    /// Rows for one lambda, in level order.
    pub fn for_lambda(&self, lambda: f64) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.lambda == lambda).collect()
    }

    pub fn row(&self, lambda: f64, level: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.lambda == lambda && r.level == level)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Solves the manufactured case on every level for every lambda.
pub fn convergence_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if let Some(cap) = cfg.dof_budget {
        let largest = *cfg.levels.last().unwrap();
        let estimated = cfg.family.estimate_dofs(largest, cfg.k);
        if estimated > cap {
            return Err(Error::BudgetExceeded { estimated, cap });
        }
    }
    let mut report = ConvergenceReport::default();
    let meshes: Vec<Mesh> = cfg.levels.iter().map(|&n| cfg.family.build(n, cfg.pattern)).collect::<Result<_>>()?;
    for &lambda in &cfg.lambdas {
        let case = ManufacturedCase::new(cfg.case, LameParameters::new(cfg.mu, lambda)?);
        let problem = case.problem();
        let mut prev: Option<(usize, f64, f64, f64)> = None;
        for (mesh, &n) in meshes.iter().zip(&cfg.levels) {
            let out = solve_elasticity(mesh, cfg.k, &problem, &cfg.solve)?;
            let e = error_norms(mesh, &case, &out.solution)?;
            let rates = prev.map(|(pn, pu, ps, pg)| {
                (rate(pu, e.err_u, pn, n), rate(ps, e.err_sigma, pn, n), rate(pg, e.err_gradu, pn, n))
            });
            report.rows.push(ConvergenceRow {
                case: cfg.case.name().to_string(),
                k: cfg.k,
                lambda,
                level: n,
                dofs: out.dofs.n_skeleton_dofs(),
                err_u: e.err_u,
                rate_u: rates.map(|r| r.0),
                err_sigma: e.err_sigma,
                rate_sigma: rates.map(|r| r.1),
                err_gradu: e.err_gradu,
                rate_gradu: rates.map(|r| r.2),
            });
            report.diagnostics.push(RowDiagnostics {
                free_dofs: out.system.n_free(),
                relative_residual: out.report.relative_residual,
                rounded_residual: out.report.rounded_residual,
                positive_definite: out.report.positive_definite,
                asymmetry: out.system.matrix.asymmetry(),
            });
            prev = Some((n, e.err_u, e.err_sigma, e.err_gradu));
        }
    }
    Ok(report)
}

/// `err(lambda_hi) / err(lambda_lo)` for `(u, sigma)` on one mesh.
pub fn lambda_sweep(
    case: CaseId,
    k: usize,
    mesh: &Mesh,
    lambda_lo: f64,
    lambda_hi: f64,
    options: &SolveOptions,
) -> Result<(f64, f64)> {
    let errs = [lambda_lo, lambda_hi]
        .iter()
        .map(|&l| {
            let c = ManufacturedCase::with_lambda(case, l);
            let out = solve_elasticity(mesh, k, &c.problem(), options)?;
            error_norms(mesh, &c, &out.solution)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((errs[1].err_u / errs[0].err_u, errs[1].err_sigma / errs[0].err_sigma))
}

/// Skeleton dof count of the `n`-level triangle mesh computed from the
/// actual dof map (no solve).
pub fn count_dofs(family: MeshFamily, pattern: DiagonalPattern, n: usize, k: usize) -> Result<usize> {
    let mesh = family.build(n, pattern)?;
    Ok(crate::wgspace::DofMap::new(&mesh, k).n_skeleton_dofs())
}

/// Interior unknowns per cell for a `d`-dimensional problem of order `k`.
pub fn interior_dofs_per_cell(d: usize, k: usize) -> usize {
    d * (d + 1) / 2 * poly_dim(d, k) + d * poly_dim(d, k + 1)
}
