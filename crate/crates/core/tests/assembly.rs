use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wg_elasticity::assembly::{condense, uncondensed_residual, LocalElementSystem};
use wg_elasticity::mesh::{cube_tet_mesh, ladder_mesh, triangle_mesh, CellSpec, FaceMarker, Mesh, Point};
use wg_elasticity::solver::SparseSymmetric;
use wg_elasticity::verify::{monolithic_solve, three_cell_mesh, ManufacturedCase};
use wg_elasticity::{
    assemble_global, solve_elasticity, CaseId, DofMap, ElasticityProblem, LameParameters, SolveOptions,
};

fn unit_square() -> Mesh {
    let v = vec![
        Point::new(0.0, 0.0, 0.0),
        Point::new(1.0, 0.0, 0.0),
        Point::new(1.0, 1.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
    ];
    Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2, 3])], |_, _, _| Some(FaceMarker::Dirichlet)).unwrap()
}

fn problem(mu: f64, lambda: f64) -> ElasticityProblem {
    ElasticityProblem::homogeneous(LameParameters::new(mu, lambda).unwrap())
}

fn manufactured(dim: usize, lambda: f64) -> ElasticityProblem {
    let id = if dim == 2 { CaseId::Case2d } else { CaseId::Case3d };
    ManufacturedCase::with_lambda(id, lambda).problem()
}

#[test]
fn stabilizer_of_a_constant_on_the_unit_square() {
    // A unit interior constant against a zero trace: each of the four unit
    // edges contributes h_E^{-1} |E| = 1, scaled by 2 mu.
    let m = unit_square();
    let dofs = DofMap::new(&m, 0);
    let local = LocalElementSystem::new(&m, &dofs, &problem(1.0, 1.0), 0).unwrap();
    // The first displacement basis function is the constant 1 in component 0.
    assert!((local.s_ii[(0, 0)] - 8.0).abs() < 1e-12, "{}", local.s_ii[(0, 0)]);
}

#[test]
fn stabilizer_vanishes_on_matching_traces() {
    // Interior P_{k+1} function with its own Lagrange trace: zero jump.
    let m = triangle_mesh(2).unwrap();
    for k in 0..=1 {
        let dofs = DofMap::new(&m, k);
        let local = LocalElementSystem::new(&m, &dofs, &problem(1.0, 1.0), 3).unwrap();
        let (full, _) = local.full_system();
        let (ns, nu, nb) = (local.n_sigma(), local.n_u(), local.n_b());
        let f = |p: &Point| 0.3 + p.x - 2.0 * p.y;
        let mut x = DVector::zeros(full.nrows());
        let coef = wg_elasticity::polyquad::project_interior(&m, 3, k + 1, f).unwrap();
        let nm = nu / 2;
        x.rows_mut(ns, nm).copy_from(&coef);
        for (j, &node) in local.trace_nodes.iter().enumerate() {
            x[ns + nu + 2 * j] = f(&dofs.trace_nodes[node]);
        }
        let stab = full.view((ns, ns), (nu + nb, nu + nb)) * x.rows(ns, nu + nb);
        let energy = x.rows(ns, nu + nb).dot(&stab);
        assert!(energy.abs() < 1e-12, "k={k}: {energy}");
    }
}

#[test]
fn compliance_is_bounded_as_lambda_grows() {
    let m = triangle_mesh(2).unwrap();
    let dofs = DofMap::new(&m, 1);
    let a1 = LocalElementSystem::new(&m, &dofs, &problem(1.0, 1e3), 0).unwrap().a;
    let a2 = LocalElementSystem::new(&m, &dofs, &problem(1.0, 1e9), 0).unwrap().a;
    let diff = (&a1 - &a2).amax();
    assert!(diff < 1e-2 * a1.amax(), "{diff}");
    assert!(a2.symmetric_eigenvalues().min() > -1e-12);
    // Only the trace part degenerates: one small eigenvalue per scalar mode.
    let ev = a2.symmetric_eigenvalues();
    let small = ev.iter().filter(|&&e| e < 1e-6 * a2.amax()).count();
    assert_eq!(small, local_scalar_dim(1));
}

#[test]
fn continuity_of_the_local_form() {
    // |x^T M y| <= ||M|| |x| |y| with ||M|| the spectral norm.
    let m = triangle_mesh(2).unwrap();
    let dofs = DofMap::new(&m, 1);
    let local = LocalElementSystem::new(&m, &dofs, &problem(1.0, 10.0), 2).unwrap();
    let (full, _) = local.full_system();
    let norm = full.symmetric_eigenvalues().amax();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let x: DVector<f64> = DVector::from_fn(full.nrows(), |_, _| rng.gen_range(-1.0..1.0));
        let y = DVector::from_fn(full.nrows(), |_, _| rng.gen_range(-1.0..1.0));
        assert!(x.dot(&(&full * &y)).abs() <= norm * x.norm() * y.norm() * (1.0 + 1e-12));
    }
}

fn local_scalar_dim(k: usize) -> usize {
    wg_elasticity::polyquad::poly_dim(2, k)
}

/// Eliminates the first `ni` unknowns of a dense system.
fn eliminate(m: &DMatrix<f64>, rhs: &DVector<f64>, ni: usize) -> (DMatrix<f64>, DVector<f64>) {
    let n = m.nrows();
    let nk = n - ni;
    let m_ii = m.view((0, 0), (ni, ni)).clone_owned();
    let m_ik = m.view((0, ni), (ni, nk)).clone_owned();
    let lu = m_ii.lu();
    let y = lu.solve(&m_ik).unwrap();
    let yr = lu.solve(&rhs.rows(0, ni).clone_owned()).unwrap();
    let s = m.view((ni, ni), (nk, nk)) - m_ik.transpose() * y;
    let r = rhs.rows(ni, nk) - m_ik.transpose() * yr;
    (s, r)
}

#[test]
fn condensed_energy_matches_direct_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases: Vec<(Mesh, usize)> = vec![
        (triangle_mesh(2).unwrap(), 0),
        (triangle_mesh(2).unwrap(), 1),
        (ladder_mesh(2).unwrap(), 2),
        (three_cell_mesh().unwrap(), 1),
        (cube_tet_mesh(1).unwrap(), 0),
        (cube_tet_mesh(1).unwrap(), 1),
    ];
    for (m, k) in cases {
        let dofs = DofMap::new(&m, k);
        let d = m.dim();
        let prob = manufactured(d, 100.0);
        for cell in [0, m.cells().len() - 1] {
            let local = LocalElementSystem::new(&m, &dofs, &prob, cell).unwrap();
            let cc = condense(&local, &dofs).unwrap();
            let (full, rhs) = local.full_system();
            let ni = local.n_sigma() + local.n_u();
            let (s, r) = eliminate(&full, &rhs, ni);
            let scale = s.amax();
            for _ in 0..5 {
                let xk: DVector<f64> = DVector::from_fn(s.nrows(), |_, _| rng.gen_range(-1.0..1.0));
                let e1 = xk.dot(&(&s * &xk));
                let e2 = xk.dot(&(&cc.schur * &xk));
                assert!((e1 - e2).abs() < 1e-10 * scale * xk.norm_squared(), "k={k}: {e1} vs {e2}");
            }
            assert!((&r - &cc.rhs).amax() < 1e-10 * r.amax().max(1.0), "k={k} rhs");
        }
    }
}

#[test]
fn zero_data_gives_zero_condensed_load() {
    let m = triangle_mesh(3).unwrap();
    let dofs = DofMap::new(&m, 1);
    let sys = assemble_global(&m, &dofs, &problem(1.0, 5.0)).unwrap();
    assert!(sys.rhs.iter().all(|&v| v == 0.0));
    let out = solve_elasticity(&m, 1, &problem(1.0, 5.0), &SolveOptions::default()).unwrap();
    assert!(out.solution.displacement.iter().all(|c| c.iter().all(|&v| v == 0.0)));
}

#[test]
fn condensed_solve_matches_monolithic_solve() {
    for (m, k) in [(triangle_mesh(1).unwrap(), 0), (triangle_mesh(1).unwrap(), 1), (three_cell_mesh().unwrap(), 1)] {
        let prob = manufactured(2, 10.0);
        let out = solve_elasticity(&m, k, &prob, &SolveOptions::default()).unwrap();
        let mono = monolithic_solve(&m, &out.dofs, &prob, &out.system.dirichlet_values).unwrap();
        for c in 0..m.cells().len() {
            let ds = (&out.solution.stress[c] - &mono.stress[c]).amax();
            let du = (&out.solution.displacement[c] - &mono.displacement[c]).amax();
            assert!(ds < 1e-10 && du < 1e-10, "k={k} cell={c}: {ds} {du}");
        }
    }
}

#[test]
fn global_matrix_is_symmetric() {
    for (m, k) in [(triangle_mesh(4).unwrap(), 0), (ladder_mesh(2).unwrap(), 1), (cube_tet_mesh(2).unwrap(), 0)] {
        let d = m.dim();
        let sys = assemble_global(&m, &DofMap::new(&m, k), &manufactured(d, 1e6)).unwrap();
        assert!(sys.matrix.asymmetry() < 1e-12, "{}", sys.matrix.asymmetry());
        let dense = sys.matrix.to_dense();
        assert_eq!(dense, dense.transpose());
        assert!(SparseSymmetric::from_dense(&dense, 1e-12).is_ok());
    }
}

#[test]
fn uncondensed_system_is_satisfied() {
    for (m, k) in [(triangle_mesh(4).unwrap(), 0), (triangle_mesh(4).unwrap(), 1), (cube_tet_mesh(1).unwrap(), 1)] {
        let d = m.dim();
        let prob = manufactured(d, 1e3);
        let out = solve_elasticity(&m, k, &prob, &SolveOptions::default()).unwrap();
        let r = uncondensed_residual(&m, &out.dofs, &prob, &out.system, &out.solution).unwrap();
        assert!(r < 1e-9, "k={k}: {r}");
        assert!(out.report.relative_residual < 1e-9);
    }
}

#[test]
fn discrete_stress_is_symmetric_everywhere() {
    let m = ladder_mesh(2).unwrap();
    let out = solve_elasticity(&m, 1, &manufactured(2, 1e3), &SolveOptions::default()).unwrap();
    for c in 0..m.cells().len() {
        let p = m.cells()[c].centroid;
        let s = out.solution.stress_at(&m, c, &p);
        assert_eq!(s, s.transpose());
    }
}

#[test]
fn pure_dirichlet_problems_are_nonsingular() {
    for lambda in [1.0, 1e6] {
        for (m, k) in [(triangle_mesh(2).unwrap(), 0), (cube_tet_mesh(1).unwrap(), 0), (cube_tet_mesh(1).unwrap(), 2)] {
            let d = m.dim();
            let out = solve_elasticity(&m, k, &manufactured(d, lambda), &SolveOptions::default()).unwrap();
            assert!(out.report.relative_residual < 1e-9);
            assert!(out.solution.displacement.iter().all(|c| c.iter().all(|v| v.is_finite())));
        }
    }
}

#[test]
fn definiteness_depends_on_the_stress_trace() {
    // Without a stress trace the condensed matrix is positive definite. The
    // stress trace enters with a negative sign, so it contributes negative
    // pivots whenever it has active nodes.
    let m = triangle_mesh(4).unwrap();
    let k0 = solve_elasticity(&m, 0, &manufactured(2, 1.0), &SolveOptions::default()).unwrap();
    assert!(!k0.report.positive_definite);
    let active = k0.dofs.stress_trace_active.iter().filter(|&&a| a).count();
    assert_eq!(k0.report.negative_pivots, Some(active));
    let k1 = solve_elasticity(&m, 1, &manufactured(2, 1.0), &SolveOptions::default()).unwrap();
    assert!(k1.report.positive_definite);
    assert_eq!(k1.report.negative_pivots, Some(0));
}
