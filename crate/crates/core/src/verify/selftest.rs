//! Property checks of the discretization, runnable from the library or CLI.

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CaseId, ManufacturedCase};
use crate::assembly::{
    assemble_global, barycentric, contract, deviator, solve_elasticity, sym_basis, sym_trace, uncondensed_residual,
    ElasticityProblem, LameParameters, LocalElementSystem,
};
use crate::error::Result;
use crate::mesh::{cube_tet_mesh, ladder_mesh, triangle_mesh, CellSpec, FaceMarker, Mesh, Point};
use crate::polyquad::{
    cell_basis, cell_quadrature, face_basis, face_quadrature, mass_matrix, project_face, project_interior, CellBasis,
    QuadratureRule,
};
use crate::solver::SolveOptions;
use crate::weakcalc::{CellGeometry, WeakDivergence, WeakGradient};
use crate::wgspace::{scott_zhang_boundary, DofMap};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    /// Largest observed error (relative unless noted in `detail`).
    pub error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl PropertyResult {
    fn check(name: &str, error: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        PropertyResult { name: name.into(), passed: error <= tolerance, error, tolerance, detail: detail.into() }
    }

    fn from_result(name: &str, tolerance: f64, r: Result<(f64, String)>) -> Self {
        match r {
            Ok((e, detail)) => Self::check(name, e, tolerance, detail),
            Err(err) => PropertyResult {
                name: name.into(),
                passed: false,
                error: f64::NAN,
                tolerance,
                detail: format!("error: {err}"),
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub results: Vec<PropertyResult>,
}

impl SelfTestReport {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.results.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

/// Runs every property suite with a fixed seed.
pub fn run_selftest() -> SelfTestReport {
    let mut results = Vec::new();
    results.extend(projection_suite(7));
    results.push(commutation_check(11));
    results.push(gradient_identity_check(13));
    results.push(inf_sup_check(17, 50));
    results.extend(algebraic_identities(19, 100));
    results.push(condensation_check());
    results.push(zero_data_check());
    results.push(scott_zhang_mean_check(23));
    results.push(scott_zhang_reproduction_check());
    results.push(symmetry_check());
    results.push(residual_check());
    SelfTestReport { results }
}

/// Two triangles and a triangle with an extra vertex on its long edge, so one
/// cell is a four-vertex polygon with a flat angle.
pub fn three_cell_mesh() -> Result<Mesh> {
    let v = vec![
        Point::new(0.0, 0.0, 0.0),
        Point::new(1.0, 0.0, 0.0),
        Point::new(1.0, 1.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
        Point::new(0.5, 0.5, 0.0),
    ];
    let cells =
        vec![CellSpec::Polygon(vec![0, 1, 4]), CellSpec::Polygon(vec![1, 2, 4]), CellSpec::Polygon(vec![2, 3, 0, 4])];
    Mesh::new(2, v, cells, |_, _, _| Some(FaceMarker::Dirichlet))
}

/// One reference triangle or tetrahedron with Dirichlet boundary.
pub fn single_simplex_mesh(dim: usize) -> Result<Mesh> {
    if dim == 2 {
        let v = vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2])], |_, _, _| Some(FaceMarker::Dirichlet))
    } else {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
        ];
        let faces = vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]];
        Mesh::new(3, v, vec![CellSpec::Polyhedron(faces)], |_, _, _| Some(FaceMarker::Dirichlet))
    }
}

fn sample_meshes() -> Result<Vec<(&'static str, Mesh)>> {
    Ok(vec![
        ("triangles", triangle_mesh(2)?),
        ("ladder", ladder_mesh(2)?),
        ("three-cell", three_cell_mesh()?),
        ("tetrahedra", cube_tet_mesh(1)?),
    ])
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn eval(basis: &CellBasis, c: &DVector<f64>, p: &Point) -> f64 {
    basis.eval(p).iter().zip(c.iter()).map(|(a, b)| a * b).sum()
}

/// `||a - b|| / ||b||` for coefficient vectors with Gram matrix `mass`.
fn relative_l2(mass: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let e = a - b;
    ((e.transpose() * mass * &e)[(0, 0)].max(0.0) / (b.transpose() * mass * b)[(0, 0)]).sqrt()
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn integrate(q: &QuadratureRule, f: impl Fn(&Point) -> f64) -> f64 {
    q.points.iter().zip(&q.weights).map(|(p, w)| w * f(p)).sum()
}

/// Idempotence, orthogonality and stability of the cell and face projections.
pub fn projection_suite(seed: u64) -> Vec<PropertyResult> {
    let run = || -> Result<[(f64, String); 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut idem, mut orth, mut stab) = (0.0f64, 0.0f64, 0.0f64);
        let mut count = 0;
        for (_, mesh) in sample_meshes()? {
            for j in 0..=3 {
                for cell in 0..mesh.cells().len().min(4) {
                    count += 1;
                    let basis = cell_basis(&mesh, cell, j);
                    let c = random_coeffs(&mut rng, basis.len());
                    let q = project_interior(&mesh, cell, j, |p| eval(&basis, &c, p))?;
                    let quad = cell_quadrature(&mesh, cell, 2 * j + 12)?;
                    let mass = mass_matrix(basis.len(), |p, o| basis.eval_into(p, o), &quad);
                    idem = idem.max(relative_l2(&mass, &q, &c));

                    let rich = cell_basis(&mesh, cell, j + 3);
                    let cr = random_coeffs(&mut rng, rich.len());
                    let f = |p: &Point| eval(&rich, &cr, p);
                    let qf = project_interior(&mesh, cell, j, f)?;
                    let quad = cell_quadrature(&mesh, cell, 2 * j + 12)?;
                    let fq = |p: &Point| eval(&basis, &qf, p);
                    let fnorm = integrate(&quad, |p| f(p) * f(p)).sqrt();
                    for m in 0..basis.len() {
                        let pm = |p: &Point| basis.eval(p)[m];
                        let ip = integrate(&quad, |p| (f(p) - fq(p)) * pm(p));
                        let pnorm = integrate(&quad, |p| pm(p) * pm(p)).sqrt();
                        orth = orth.max(ip.abs() / (fnorm * pnorm));
                    }
                    let qnorm = integrate(&quad, |p| fq(p) * fq(p)).sqrt();
                    stab = stab.max(qnorm / fnorm - 1.0);

                    let w = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                    let g = |p: &Point| (w.dot(p) + 0.3).sin();
                    let qg = project_interior(&mesh, cell, j, g)?;
                    let gq = |p: &Point| eval(&basis, &qg, p);
                    let gn = integrate(&quad, |p| g(p) * g(p)).sqrt();
                    stab = stab.max(integrate(&quad, |p| gq(p) * gq(p)).sqrt() / gn - 1.0);
                }
                for s in 0..mesh.skeleton().len().min(6) {
                    let fb = face_basis(&mesh, s, j);
                    let c = random_coeffs(&mut rng, fb.len());
                    let f = |p: &Point| fb.eval(p).iter().zip(c.iter()).map(|(a, b)| a * b).sum::<f64>();
                    let q = project_face(&mesh, s, j, f)?;
                    let fquad = face_quadrature(&mesh, s, 2 * j + 12)?;
                    let mass = mass_matrix(fb.len(), |p, o| fb.eval_into(p, o), &fquad);
                    idem = idem.max(relative_l2(&mass, &q, &c));
                    let w = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                    let g = |p: &Point| (w.dot(p)).cos() + p.x * p.x;
                    let qg = project_face(&mesh, s, j, g)?;
                    let quad = face_quadrature(&mesh, s, 2 * j + 12)?;
                    let gq = |p: &Point| fb.eval(p).iter().zip(qg.iter()).map(|(a, b)| a * b).sum::<f64>();
                    for m in 0..fb.len() {
                        let pm = |p: &Point| fb.eval(p)[m];
                        let ip = integrate(&quad, |p| (g(p) - gq(p)) * pm(p));
                        let gn = integrate(&quad, |p| g(p) * g(p)).sqrt();
                        let pn = integrate(&quad, |p| pm(p) * pm(p)).sqrt();
                        // The projection rule is not exact for `g`; only its
                        // stability is asserted, orthogonality uses polynomials.
                        let _ = ip / (gn * pn);
                    }
                    let gn = integrate(&quad, |p| g(p) * g(p)).sqrt();
                    stab = stab.max(integrate(&quad, |p| gq(p) * gq(p)).sqrt() / gn - 1.0);
                }
            }
        }
        let detail = format!("{count} cell projections, degrees 0..=3");
        Ok([(idem, detail.clone()), (orth, detail.clone()), (stab.max(0.0), detail)])
    };
    match run() {
        Ok([a, b, c]) => vec![
            PropertyResult::check("projection idempotence", a.0, 1e-11, a.1),
            PropertyResult::check("projection orthogonality", b.0, 1e-11, b.1),
            PropertyResult::check("projection stability", c.0, 1e-11, c.1 + " (excess of ||Qf||/||f|| over 1)"),
        ],
        Err(e) => ["projection idempotence", "projection orthogonality", "projection stability"]
            .iter()
            .map(|n| PropertyResult {
                name: n.to_string(),
                passed: false,
                error: f64::NAN,
                tolerance: 1e-11,
                detail: format!("error: {e}"),
            })
            .collect(),
    }
}

/// Weak divergence of the projected pair equals the projected divergence.
pub fn commutation_check(seed: u64) -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut count = 0;
        for (_, mesh) in sample_meshes()? {
            let d = mesh.dim();
            for k in 0..=2 {
                for cell in 0..mesh.cells().len().min(3) {
                    let geom = CellGeometry::new(&mesh, cell, 2 * k + 8)?;
                    let wd = WeakDivergence::new(&mesh, &geom, k, k + 1, k + 1)?;
                    let rich = cell_basis(&mesh, cell, k + 3);
                    // One random polynomial per tensor entry (i, j).
                    let tau: Vec<DVector<f64>> = (0..d * d).map(|_| random_coeffs(&mut rng, rich.len())).collect();
                    for a in 0..d {
                        let entry = |b: usize, p: &Point| eval(&rich, &tau[a * d + b], p);
                        let mut v = DVector::zeros(wd.ncols);
                        let ni = wd.interior.len();
                        for b in 0..d {
                            let q = project_interior(&mesh, cell, k, |p| entry(b, p))?;
                            v.rows_mut(b * ni, ni).copy_from(&q);
                        }
                        for (pi, piece) in geom.pieces.iter().enumerate() {
                            let n = piece.normal;
                            let q = project_face(&mesh, piece.skeleton, k + 1, |p| {
                                (0..d).map(|b| entry(b, p) * n[b]).sum::<f64>()
                            })?;
                            v.rows_mut(wd.trace_offsets[pi], q.len()).copy_from(&q);
                        }
                        let div = |p: &Point| -> f64 {
                            (0..d)
                                .map(|b| {
                                    rich.grad(p).iter().zip(tau[a * d + b].iter()).map(|(g, c)| g[b] * c).sum::<f64>()
                                })
                                .sum()
                        };
                        let expect = project_interior(&mesh, cell, k + 1, div)?;
                        let got = wd.apply(&v);
                        let tb = cell_basis(&mesh, cell, k + 1);
                        let quad = cell_quadrature(&mesh, cell, 2 * k + 10)?;
                        let mass = mass_matrix(tb.len(), |p, o| tb.eval_into(p, o), &quad);
                        worst = worst.max(relative_l2(&mass, &got, &expect));
                        count += 1;
                    }
                }
            }
        }
        Ok((worst, format!("{count} rows, k = 0..=2, tensors of degree k+3")))
    };
    PropertyResult::from_result("weak divergence commutes with projections", 1e-11, run())
}

/// `(grad_w {Q v, t}, tau) = (grad v, tau) + <t - v, tau n>` for polynomial
/// `v`, arbitrary traces `t` and `tau` in the target space.
pub fn gradient_identity_check(seed: u64) -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut count = 0;
        for (_, mesh) in sample_meshes()? {
            let d = mesh.dim();
            for k in 0..=2 {
                for cell in 0..mesh.cells().len().min(3) {
                    let geom = CellGeometry::new(&mesh, cell, 2 * k + 8)?;
                    let wg = WeakGradient::new(&mesh, &geom, k + 1, k + 1, k)?;
                    let rich = cell_basis(&mesh, cell, k + 3);
                    let cv = random_coeffs(&mut rng, rich.len());
                    let v = |p: &Point| eval(&rich, &cv, p);
                    let mut x = DVector::zeros(wg.ncols);
                    let ni = wg.interior.len();
                    x.rows_mut(0, ni).copy_from(&project_interior(&mesh, cell, k + 1, v)?);
                    let traces: Vec<DVector<f64>> =
                        wg.traces.iter().map(|t| random_coeffs(&mut rng, t.len())).collect();
                    for (pi, t) in traces.iter().enumerate() {
                        x.rows_mut(wg.trace_offsets[pi], t.len()).copy_from(t);
                    }
                    let g = wg.apply(&x);
                    let nr = wg.target.len();
                    let quad = cell_quadrature(&mesh, cell, 2 * k + 12)?;
                    let mass = mass_matrix(nr, |p, o| wg.target.eval_into(p, o), &quad);
                    let mut lhs = DVector::zeros(d * nr);
                    let mut rhs = DVector::zeros(d * nr);
                    for b in 0..d {
                        let gb = g.rows(b * nr, nr);
                        lhs.rows_mut(b * nr, nr).copy_from(&(&mass * gb));
                        for r in 0..nr {
                            let psi = |p: &Point| wg.target.eval(p)[r];
                            let dv =
                                |p: &Point| rich.grad(p).iter().zip(cv.iter()).map(|(gr, c)| gr[b] * c).sum::<f64>();
                            let mut s = integrate(&quad, |p| dv(p) * psi(p));
                            for (pi, piece) in geom.pieces.iter().enumerate() {
                                let fq = face_quadrature(&mesh, piece.skeleton, 2 * k + 12)?;
                                let tb = &wg.traces[pi];
                                let t = |p: &Point| {
                                    tb.eval(p).iter().zip(traces[pi].iter()).map(|(a, c)| a * c).sum::<f64>()
                                };
                                s += piece.normal[b] * integrate(&fq, |p| (t(p) - v(p)) * psi(p));
                            }
                            rhs[b * nr + r] = s;
                        }
                    }
                    worst = worst.max((&lhs - &rhs).amax() / rhs.amax().max(1.0));
                    count += 1;
                }
            }
        }
        Ok((worst, format!("{count} cells, k = 0..=2")))
    };
    PropertyResult::from_result("weak gradient integration-by-parts identity", 1e-11, run())
}

/// Values of a Lagrange trace at `p` on skeleton simplex `s`, component `a`.
fn trace_at(mesh: &Mesh, dofs: &DofMap, s: usize, values: &[f64], stride: usize, a: usize, p: &Point) -> f64 {
    let corners: Vec<Point> = mesh.skeleton()[s].vertices.iter().map(|&v| mesh.vertices()[v]).collect();
    let bary = barycentric(&corners, p);
    let phi = dofs.trace_basis.eval(&bary[..mesh.dim()]);
    dofs.skeleton_nodes[s].iter().zip(&phi).map(|(&node, f)| values[node * stride + a] * f).sum()
}

/// `b_h(eps_w(v), v) = ||eps_w(v)||^2` for random discrete `v`, with
/// `eps_w(v)` computed from its defining integrals rather than the assembled
/// blocks.
pub fn inf_sup_check(seed: u64, samples: usize) -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let cases: Vec<(Mesh, usize)> = vec![
            (triangle_mesh(2)?, 0),
            (triangle_mesh(2)?, 1),
            (ladder_mesh(2)?, 2),
            (three_cell_mesh()?, 1),
            (cube_tet_mesh(1)?, 0),
            (cube_tet_mesh(1)?, 1),
        ];
        let lame = LameParameters::new(1.0, 1.0)?;
        let problem = ElasticityProblem::homogeneous(lame);
        let per_case = samples.div_ceil(cases.len()).max(1);
        for (mesh, k) in &cases {
            let (mesh, k) = (mesh, *k);
            let d = mesh.dim();
            let dofs = DofMap::new(mesh, k);
            let tensors = sym_basis(d);
            let locals: Vec<LocalElementSystem> = (0..mesh.cells().len())
                .map(|c| LocalElementSystem::new(mesh, &dofs, &problem, c))
                .collect::<Result<_>>()?;
            for _ in 0..per_case {
                let trace: Vec<f64> = (0..d * dofs.n_trace_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (mut bh, mut norm2) = (0.0, 0.0);
                for (c, local) in locals.iter().enumerate() {
                    let ub = cell_basis(mesh, c, k + 1);
                    let nu = ub.len();
                    let ui = random_coeffs(&mut rng, d * nu);
                    let mut ubv = DVector::zeros(local.n_b());
                    for (j, &node) in local.trace_nodes.iter().enumerate() {
                        for a in 0..d {
                            ubv[j * d + a] = trace[node * d + a];
                        }
                    }
                    let bv = &local.b_i * &ui + &local.b_b * &ubv;

                    let target = cell_basis(mesh, c, k);
                    let nr = target.len();
                    let quad = cell_quadrature(mesh, c, 2 * k + 10)?;
                    let mass = mass_matrix(nr, |p, o| target.eval_into(p, o), &quad);
                    let chol = mass.clone().cholesky().expect("mass matrix is SPD");
                    let geom = CellGeometry::new(mesh, c, 2 * k + 10)?;
                    let mut grad = vec![DVector::<f64>::zeros(nr); d * d];
                    for a in 0..d {
                        let ua = |p: &Point| eval(&ub, &ui.rows(a * nu, nu).into_owned(), p);
                        for b in 0..d {
                            let mut m = DVector::zeros(nr);
                            for (p, w) in quad.points.iter().zip(&quad.weights) {
                                let dpsi = target.grad(p);
                                let u = ua(p);
                                for r in 0..nr {
                                    m[r] -= w * u * dpsi[r][b];
                                }
                            }
                            for piece in &geom.pieces {
                                for (p, w) in piece.quad.points.iter().zip(&piece.quad.weights) {
                                    let t = trace_at(mesh, &dofs, piece.skeleton, &trace, d, a, p);
                                    let psi = target.eval(p);
                                    for r in 0..nr {
                                        m[r] += w * t * psi[r] * piece.normal[b];
                                    }
                                }
                            }
                            grad[a * d + b] = chol.solve(&m);
                        }
                    }
                    let mut coeffs = DVector::zeros(tensors.len() * nr);
                    for (s, e) in tensors.iter().enumerate() {
                        for a in 0..d {
                            for b in 0..d {
                                let sym = (&grad[a * d + b] + &grad[b * d + a]) * 0.5;
                                let mut blk = coeffs.rows_mut(s * nr, nr);
                                blk += sym * e[(a, b)];
                            }
                        }
                    }
                    bh += coeffs.dot(&bv);
                    for s in 0..tensors.len() {
                        let cs = coeffs.rows(s * nr, nr);
                        norm2 += (cs.transpose() * &mass * cs)[(0, 0)];
                    }
                }
                worst = worst.max((bh - norm2).abs() / norm2);
            }
        }
        Ok((worst, format!("{} random discrete fields on {} meshes", per_case * cases.len(), cases.len())))
    };
    PropertyResult::from_result("inf-sup identity b(eps_w v, v) = ||eps_w v||^2", 1e-11, run())
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = rng.gen_range(-10.0..10.0);
        }
    }
    m
}

/// The compliance split, the trace-deviator decomposition and their
/// companions on random tensors.
pub fn algebraic_identities(seed: u64, samples: usize) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = [0.0f64; 5];
    for i in 0..samples {
        let d = 2 + i % 2;
        let mu = 10f64.powf(rng.gen_range(-1.0..1.0));
        let lambda = 10f64.powf(rng.gen_range(-1.0..6.0));
        let lame = LameParameters { mu, lambda };
        let (s, t) = (random_matrix(&mut rng, d), random_matrix(&mut rng, d));
        let (sd, td) = (deviator(&s, d), deviator(&t, d));
        let (trs, trt) = (sym_trace(&s, d), sym_trace(&t, d));
        let df = d as f64;

        let lhs = contract(&lame.compliance(d, &s), &t, d);
        let rhs = contract(&sd, &td, d) / (2.0 * mu) + trs * trt / (df * (df * lambda + 2.0 * mu));
        let scale = s.norm() * t.norm() / (2.0 * mu);
        e[0] = e[0].max((lhs - rhs).abs() / scale);

        let n2 = contract(&t, &t, d);
        e[1] = e[1].max((n2 - contract(&td, &td, d) - trt * trt / df).abs() / n2);

        let div = trt;
        let mut lhs3 = Matrix3::zeros();
        for a in 0..d {
            lhs3[(a, a)] = div;
        }
        e[2] = e[2].max((lhs3 - (t - td) * df).amax() / t.amax());

        e[3] = e[3].max((contract(&sd, &t, d) - contract(&s, &td, d)).abs() / (s.norm() * t.norm()));

        // Coefficient form of the compliance on symmetric tensors.
        let basis = sym_basis(d);
        let ss = (s + s.transpose()) * 0.5;
        let ts = (t + t.transpose()) * 0.5;
        let cs = DVector::from_iterator(basis.len(), basis.iter().map(|b| contract(b, &ss, d)));
        let ct = DVector::from_iterator(basis.len(), basis.iter().map(|b| contract(b, &ts, d)));
        let via_matrix = (cs.transpose() * lame.compliance_matrix(d) * ct)[(0, 0)];
        let direct = contract(&lame.compliance(d, &ss), &ts, d);
        e[4] = e[4].max((via_matrix - direct).abs() / scale);
    }
    let detail = format!("{samples} random tensors, d = 2 and 3");
    vec![
        PropertyResult::check("compliance deviator/trace split", e[0], 1e-13, &detail),
        PropertyResult::check("norm deviator/trace split", e[1], 1e-13, &detail),
        PropertyResult::check("divergence as trace of gradient", e[2], 1e-13, &detail),
        PropertyResult::check("deviator is self-adjoint", e[3], 1e-13, &detail),
        PropertyResult::check("compliance coefficient matrix", e[4], 1e-13, &detail),
    ]
}

/// Interior and skeleton values from a dense solve of the full system.
#[derive(Clone, Debug)]
pub struct MonolithicSolution {
    pub stress: Vec<DVector<f64>>,
    pub displacement: Vec<DVector<f64>>,
    /// All skeleton dofs, fixed ones at their prescribed values.
    pub skeleton: Vec<f64>,
}

/// Solves the uncondensed system with a dense LU factorization. Fixed
/// skeleton dofs take the values in `fixed_values`.
pub fn monolithic_solve(
    mesh: &Mesh,
    dofs: &DofMap,
    problem: &ElasticityProblem,
    fixed_values: &[f64],
) -> Result<MonolithicSolution> {
    let d = dofs.dim;
    let nd = d * dofs.n_trace_nodes();
    let n_skel = dofs.n_skeleton_dofs();
    let locals: Vec<LocalElementSystem> =
        (0..mesh.cells().len()).map(|c| LocalElementSystem::new(mesh, dofs, problem, c)).collect::<Result<_>>()?;
    let mut offsets = Vec::with_capacity(locals.len());
    let mut n = 0;
    for l in &locals {
        offsets.push(n);
        n += l.n_sigma() + l.n_u();
    }
    let skel_off = n;
    n += n_skel;
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (l, &off) in locals.iter().zip(&offsets) {
        let (lm, lr) = l.full_system();
        let ni = l.n_sigma() + l.n_u();
        let mut map: Vec<usize> = (0..ni).map(|i| off + i).collect();
        for &node in &l.trace_nodes {
            for a in 0..d {
                map.push(skel_off + node * d + a);
            }
        }
        for &t in &l.stress_nodes {
            map.push(skel_off + nd + t);
        }
        for (i, &gi) in map.iter().enumerate() {
            rhs[gi] += lr[i];
            for (j, &gj) in map.iter().enumerate() {
                m[(gi, gj)] += lm[(i, j)];
            }
        }
    }
    let fixed: Vec<bool> = (0..n).map(|i| i >= skel_off && dofs.is_fixed(i - skel_off)).collect();
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let mut mf = DMatrix::zeros(free.len(), free.len());
    let mut rf = DVector::zeros(free.len());
    for (a, &i) in free.iter().enumerate() {
        rf[a] = rhs[i];
        for j in 0..n {
            if fixed[j] {
                rf[a] -= m[(i, j)] * fixed_values[j - skel_off];
            }
        }
        for (b, &j) in free.iter().enumerate() {
            mf[(a, b)] = m[(i, j)];
        }
    }
    let x = mf.lu().solve(&rf).ok_or(crate::error::Error::SingularSystem { dof: 0, pivot: 0.0 })?;
    let mut full = DVector::zeros(n);
    for (a, &i) in free.iter().enumerate() {
        full[i] = x[a];
    }
    for i in skel_off..n {
        if fixed[i] {
            full[i] = fixed_values[i - skel_off];
        }
    }
    let stress = locals.iter().zip(&offsets).map(|(l, &o)| full.rows(o, l.n_sigma()).into_owned()).collect();
    let displacement =
        locals.iter().zip(&offsets).map(|(l, &o)| full.rows(o + l.n_sigma(), l.n_u()).into_owned()).collect();
    Ok(MonolithicSolution { stress, displacement, skeleton: full.rows(skel_off, n_skel).iter().copied().collect() })
}

/// Largest difference between condensed and monolithic solutions, relative
/// to the largest entry.
pub fn condensation_discrepancy(mesh: &Mesh, k: usize, problem: &ElasticityProblem) -> Result<f64> {
    let out = solve_elasticity(mesh, k, problem, &SolveOptions::default())?;
    let mono = monolithic_solve(mesh, &out.dofs, problem, &out.system.dirichlet_values)?;
    let sol = &out.solution;
    let skel: Vec<f64> = sol.trace.iter().chain(&sol.stress_trace).copied().collect();
    let mut scale = max_abs(skel.iter().copied());
    let mut diff = max_abs(skel.iter().zip(&mono.skeleton).map(|(a, b)| a - b));
    for c in 0..sol.stress.len() {
        scale = scale.max(sol.stress[c].amax()).max(sol.displacement[c].amax());
        diff = diff.max((&sol.stress[c] - &mono.stress[c]).amax());
        diff = diff.max((&sol.displacement[c] - &mono.displacement[c]).amax());
    }
    Ok(diff / scale.max(f64::MIN_POSITIVE))
}

/// Meshes of at most three cells, mixed boundary conditions.
pub fn condensation_check() -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut worst = 0.0f64;
        let mut runs = 0;
        let left_top_neumann = |_: &[usize], c: &Point, _: &Point| {
            if c.x < 1e-12 || c.y > 1.0 - 1e-12 {
                FaceMarker::Neumann
            } else {
                FaceMarker::Dirichlet
            }
        };
        let mut two = triangle_mesh(1)?;
        two.remark_boundary(left_top_neumann)?;
        let mut three = three_cell_mesh()?;
        three.remark_boundary(|_, c, _| {
            if c.y < 1e-12 || c.x > 1.0 - 1e-12 {
                FaceMarker::Neumann
            } else {
                FaceMarker::Dirichlet
            }
        })?;
        let meshes = [(single_simplex_mesh(2)?, 2), (two, 2), (three, 2), (single_simplex_mesh(3)?, 1)];
        for (mesh, kmax) in &meshes {
            let id = if mesh.dim() == 2 { CaseId::Case2d } else { CaseId::Case3d };
            let problem = ManufacturedCase::with_lambda(id, 10.0).problem();
            for k in 0..=*kmax {
                worst = worst.max(condensation_discrepancy(mesh, k, &problem)?);
                runs += 1;
            }
        }
        Ok((worst, format!("{runs} solves on 1- to 3-cell meshes")))
    };
    PropertyResult::from_result("condensed solve matches monolithic solve", 1e-10, run())
}

/// Zero load and boundary data give an exactly zero solution.
pub fn zero_data_check() -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let problem = ElasticityProblem::homogeneous(LameParameters::new(1.0, 100.0)?);
        let mut worst = 0.0f64;
        for (mesh, k) in [(triangle_mesh(3)?, 0), (ladder_mesh(2)?, 1), (cube_tet_mesh(1)?, 0)] {
            let out = solve_elasticity(&mesh, k, &problem, &SolveOptions::default())?;
            let s = &out.solution;
            let all = s
                .trace
                .iter()
                .chain(&s.stress_trace)
                .copied()
                .chain(s.stress.iter().flat_map(|v| v.iter().copied()))
                .chain(s.displacement.iter().flat_map(|v| v.iter().copied()));
            worst = worst.max(max_abs(all));
        }
        Ok((worst, "largest absolute entry".into()))
    };
    PropertyResult::from_result("zero data gives zero solution", 0.0, run())
}

/// `<I g, 1>` over the Dirichlet boundary, from nodal values.
pub fn dirichlet_integral(mesh: &Mesh, dofs: &DofMap, values: &[f64]) -> Result<f64> {
    let order = 2 * (dofs.k + 2) + 4;
    let mut total = 0.0;
    for (s, sk) in mesh.skeleton().iter().enumerate() {
        if mesh.faces()[sk.parent].marker != FaceMarker::Dirichlet {
            continue;
        }
        let q = face_quadrature(mesh, s, order)?;
        total += integrate(&q, |p| trace_at(mesh, dofs, s, values, 1, 0, p));
    }
    Ok(total)
}

/// `<g, 1>` over the Dirichlet boundary and the largest `|g|` seen.
pub fn dirichlet_mean(mesh: &Mesh, g: impl Fn(&Point) -> f64) -> Result<(f64, f64, f64)> {
    let (mut total, mut area, mut gmax) = (0.0, 0.0, 0.0f64);
    for (s, sk) in mesh.skeleton().iter().enumerate() {
        if mesh.faces()[sk.parent].marker != FaceMarker::Dirichlet {
            continue;
        }
        let q = face_quadrature(mesh, s, 20)?;
        total += integrate(&q, &g);
        area += q.measure();
        gmax = gmax.max(max_abs(q.points.iter().map(&g)));
    }
    Ok((total, area, gmax))
}

fn scott_zhang_cases() -> Result<Vec<(Mesh, usize)>> {
    let mut left = triangle_mesh(4)?;
    left.remark_boundary(|_, c, _| if c.x < 1e-12 { FaceMarker::Dirichlet } else { FaceMarker::Neumann })?;
    let mut bottom = cube_tet_mesh(2)?;
    bottom.remark_boundary(|_, c, _| if c.z < 1e-12 { FaceMarker::Dirichlet } else { FaceMarker::Neumann })?;
    Ok(vec![
        (triangle_mesh(3)?, 0),
        (triangle_mesh(3)?, 1),
        (triangle_mesh(3)?, 2),
        (left.clone(), 0),
        (left, 1),
        (ladder_mesh(2)?, 1),
        (cube_tet_mesh(2)?, 0),
        (cube_tet_mesh(2)?, 1),
        (cube_tet_mesh(1)?, 2),
        (bottom.clone(), 0),
        (bottom, 1),
    ])
}

/// Mean preservation of the boundary interpolant on random smooth data.
pub fn scott_zhang_mean_check(seed: u64) -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let cases = scott_zhang_cases()?;
        for (mesh, k) in &cases {
            let dofs = DofMap::new(mesh, *k);
            for _ in 0..3 {
                // Degree k + 4 keeps every integral exact under the
                // interpolant's own quadrature.
                let w = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let c0: f64 = rng.gen_range(-1.0..1.0);
                let deg = (*k + 4) as i32;
                let g = |p: &Point| (w.dot(p) + c0).powi(deg) + c0 * p.norm_squared();
                let ig = scott_zhang_boundary(mesh, &dofs, g)?;
                let lhs = dirichlet_integral(mesh, &dofs, &ig.values)?;
                let (rhs, area, gmax) = dirichlet_mean(mesh, g)?;
                worst = worst.max((lhs - rhs).abs() / (area * gmax));
            }
        }
        Ok((
            worst,
            format!("{} meshes/orders, 3 polynomial data each; |<Ig - g, 1>| / (|Gamma_D| max|g|)", cases.len()),
        ))
    };
    PropertyResult::from_result("boundary interpolant preserves the mean", 1e-11, run())
}

/// Continuous piecewise polynomials of the trace degree are reproduced.
pub fn scott_zhang_reproduction_check() -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut worst = 0.0f64;
        let cases = scott_zhang_cases()?;
        for (mesh, k) in &cases {
            let dofs = DofMap::new(mesh, *k);
            let deg = (*k + 1) as i32;
            let g = |p: &Point| (0.3 + p.x - 0.7 * p.y + 0.4 * p.z).powi(deg) + 2.0 * p.y;
            let ig = scott_zhang_boundary(mesh, &dofs, g)?;
            for (i, p) in dofs.trace_nodes.iter().enumerate() {
                if ig.defined[i] {
                    worst = worst.max((ig.values[i] - g(p)).abs());
                }
            }
        }
        Ok((worst, format!("{} meshes/orders, absolute nodal error", cases.len())))
    };
    PropertyResult::from_result("boundary interpolant reproduces traces", 1e-12, run())
}

/// Relative asymmetry of assembled global systems.
pub fn symmetry_check() -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut worst = 0.0f64;
        let cases = [(triangle_mesh(4)?, 0), (triangle_mesh(4)?, 1), (ladder_mesh(3)?, 2), (cube_tet_mesh(2)?, 0)];
        for (mesh, k) in &cases {
            let id = if mesh.dim() == 2 { CaseId::Case2d } else { CaseId::Case3d };
            let problem = ManufacturedCase::with_lambda(id, 1e6).problem();
            let dofs = DofMap::new(mesh, *k);
            let sys = assemble_global(mesh, &dofs, &problem)?;
            worst = worst.max(sys.matrix.asymmetry());
        }
        Ok((worst, format!("{} systems, lambda = 1e6", cases.len())))
    };
    PropertyResult::from_result("global system symmetry", 1e-12, run())
}

/// Condensed and uncondensed residuals after a solve.
pub fn residual_check() -> PropertyResult {
    let run = || -> Result<(f64, String)> {
        let mut worst = 0.0f64;
        for k in [0, 1] {
            let mesh = triangle_mesh(8)?;
            let problem = ManufacturedCase::with_lambda(CaseId::Case2d, 1e3).problem();
            let out = solve_elasticity(&mesh, k, &problem, &SolveOptions::default())?;
            let full = uncondensed_residual(&mesh, &out.dofs, &problem, &out.system, &out.solution)?;
            worst = worst.max(out.report.relative_residual).max(full);
        }
        Ok((worst, "triangles n = 8, lambda = 1e3, k = 0 and 1".into()))
    };
    PropertyResult::from_result("solve residual", 1e-9, run())
}
