use nalgebra::{DMatrix, DVector};

use super::lame::{sym_basis, sym_trace};
use super::ElasticityProblem;
use crate::error::{Error, Result};
use crate::mesh::{FaceMarker, Mesh, Point};
use crate::polyquad::{cell_basis, LagrangeBasis, QuadratureRule};
use crate::weakcalc::{CellGeometry, WeakGradient};
use crate::wgspace::DofMap;

/// Default quadrature order for the bilinear forms.
pub fn form_order(k: usize) -> usize {
    2 * (k + 2)
}

/// Quadrature order for loads, boundary data and error norms.
pub fn data_order(k: usize) -> usize {
    2 * (k + 2) + 4
}

/// Barycentric coordinates of `p` with respect to a segment or triangle.
pub(crate) fn barycentric(corners: &[Point], p: &Point) -> [f64; 4] {
    let a = corners[0];
    match corners.len() {
        2 => {
            let t = corners[1] - a;
            let s = (p - a).dot(&t) / t.norm_squared();
            [1.0 - s, s, 0.0, 0.0]
        }
        3 => {
            let (u, v, w) = (corners[1] - a, corners[2] - a, p - a);
            let (uu, uv, vv) = (u.dot(&u), u.dot(&v), v.dot(&v));
            let (wu, wv) = (w.dot(&u), w.dot(&v));
            let det = uu * vv - uv * uv;
            let s = (wu * vv - wv * uv) / det;
            let t = (wv * uu - wu * uv) / det;
            [1.0 - s - t, s, t, 0.0]
        }
        _ => {
            let (u, v, z, w) = (corners[1] - a, corners[2] - a, corners[3] - a, p - a);
            let m = nalgebra::Matrix3::from_columns(&[u, v, z]);
            let x = m.lu().solve(&w).unwrap_or_default();
            [1.0 - x.sum(), x[0], x[1], x[2]]
        }
    }
}

/// All blocks of the scheme restricted to one cell.
///
/// Unknown layouts: stress `[s][psi]` over the symmetric tensor basis and
/// scalar `P_k`; interior displacement `[a][m]` over scalar `P_{k+1}`;
/// displacement trace `j * d + a` over the cell's local trace nodes; stress
/// trace one value per local stress-trace node.
#[derive(Clone, Debug)]
pub struct LocalElementSystem {
    pub cell: usize,
    pub dim: usize,
    /// Global displacement-trace node of each local trace node.
    pub trace_nodes: Vec<usize>,
    /// Global stress-trace node of each local stress-trace node.
    pub stress_nodes: Vec<usize>,
    pub a: DMatrix<f64>,
    pub z_ii: DMatrix<f64>,
    pub z_it: DMatrix<f64>,
    pub z_tt: DMatrix<f64>,
    pub b_i: DMatrix<f64>,
    pub b_b: DMatrix<f64>,
    pub s_ii: DMatrix<f64>,
    pub s_ib: DMatrix<f64>,
    pub s_bb: DMatrix<f64>,
    /// `(f, v_i)_T`.
    pub f_i: DVector<f64>,
    /// `-<g_N, v_b>` over Neumann pieces.
    pub f_b: DVector<f64>,
    /// Scalar `P_k` mass matrix.
    pub mass_k: DMatrix<f64>,
}

impl LocalElementSystem {
    pub fn new(mesh: &Mesh, dofs: &DofMap, problem: &ElasticityProblem, cell: usize) -> Result<Self> {
        let d = mesh.dim();
        let k = dofs.k;
        let mu = problem.lame.mu;
        let geom = CellGeometry::new(mesh, cell, form_order(k))?;
        let wg = WeakGradient::new(mesh, &geom, k + 1, k + 1, k)?;
        let ns = wg.target.len();
        let nu = wg.interior.len();
        let tensors = sym_basis(d);
        let nt = tensors.len();
        let n_sigma = nt * ns;
        let n_u = d * nu;
        let lag = &dofs.trace_basis;
        let nl = lag.len();

        // Local numbering of trace nodes.
        let mut trace_nodes: Vec<usize> = Vec::new();
        let mut piece_nodes: Vec<Vec<usize>> = Vec::with_capacity(geom.pieces.len());
        for piece in &geom.pieces {
            let ids = dofs.skeleton_nodes[piece.skeleton]
                .iter()
                .map(|&g| match trace_nodes.iter().position(|&x| x == g) {
                    Some(j) => j,
                    None => {
                        trace_nodes.push(g);
                        trace_nodes.len() - 1
                    }
                })
                .collect();
            piece_nodes.push(ids);
        }
        let n_b = d * trace_nodes.len();

        let mut stress_nodes: Vec<usize> = Vec::new();
        let mut piece_stress: Vec<Option<Vec<usize>>> = Vec::with_capacity(geom.pieces.len());
        for piece in &geom.pieces {
            piece_stress.push(dofs.skeleton_stress_nodes[piece.skeleton].as_ref().map(|ids| {
                ids.iter()
                    .map(|&g| match stress_nodes.iter().position(|&x| x == g) {
                        Some(j) => j,
                        None => {
                            stress_nodes.push(g);
                            stress_nodes.len() - 1
                        }
                    })
                    .collect()
            }));
        }
        let n_t = stress_nodes.len();

        // a_h: compliance times the scalar mass matrix.
        let comp = problem.lame.compliance_matrix(d);
        let mass_k = wg.mass.clone();
        let mut a = DMatrix::zeros(n_sigma, n_sigma);
        for s in 0..nt {
            for r in 0..nt {
                a.view_mut((s * ns, r * ns), (ns, ns)).copy_from(&(&mass_k * comp[(s, r)]));
            }
        }

        // b_h(tau, v) = (tau, grad_w v): contract the weak-gradient moments
        // with the symmetric tensor basis.
        let corners_of =
            |sk: usize| -> Vec<Point> { mesh.skeleton()[sk].vertices.iter().map(|&v| mesh.vertices()[v]).collect() };
        let mut b_i = DMatrix::zeros(n_sigma, n_u);
        let mut b_b = DMatrix::zeros(n_sigma, n_b);
        for (s, e) in tensors.iter().enumerate() {
            for a_ in 0..d {
                for b in 0..d {
                    let eab = e[(a_, b)];
                    if eab == 0.0 {
                        continue;
                    }
                    let src = wg.moments.view((b * ns, 0), (ns, nu));
                    let mut dst = b_i.view_mut((s * ns, a_ * nu), (ns, nu));
                    dst += src * eab;
                }
            }
        }
        let mut chi = Vec::new();
        let mut phil = vec![0.0; nl];
        for (pi, piece) in geom.pieces.iter().enumerate() {
            // Face-basis coefficients of each Lagrange function on the piece.
            let fb = &wg.traces[pi];
            let nf = fb.len();
            chi.resize(nf, 0.0);
            let corners = corners_of(piece.skeleton);
            let mut mf = DMatrix::zeros(nf, nf);
            let mut rhs = DMatrix::zeros(nf, nl);
            for (p, w) in piece.quad.points.iter().zip(&piece.quad.weights) {
                fb.eval_into(p, &mut chi);
                lag.eval_into(&barycentric(&corners, p)[..d], &mut phil);
                for i in 0..nf {
                    for j in 0..nf {
                        mf[(i, j)] += w * chi[i] * chi[j];
                    }
                    for l in 0..nl {
                        rhs[(i, l)] += w * chi[i] * phil[l];
                    }
                }
            }
            let lmap = mf
                .cholesky()
                .ok_or_else(|| Error::SingularMass(format!("skeleton face {}", piece.skeleton)))?
                .solve(&rhs);
            let moments = wg.moments.columns(wg.trace_offsets[pi], nf) * lmap;
            for (s, e) in tensors.iter().enumerate() {
                for a_ in 0..d {
                    for b in 0..d {
                        let eab = e[(a_, b)];
                        if eab == 0.0 {
                            continue;
                        }
                        for (l, &j) in piece_nodes[pi].iter().enumerate() {
                            for psi in 0..ns {
                                b_b[(s * ns + psi, j * d + a_)] += eab * moments[(b * ns + psi, l)];
                            }
                        }
                    }
                }
            }
        }

        // s_h and z_h on the boundary pieces.
        let mut s_ii = DMatrix::zeros(n_u, n_u);
        let mut s_ib = DMatrix::zeros(n_u, n_b);
        let mut s_bb = DMatrix::zeros(n_b, n_b);
        let mut z_ii = DMatrix::zeros(n_sigma, n_sigma);
        let mut z_it = DMatrix::zeros(n_sigma, n_t);
        let mut z_tt = DMatrix::zeros(n_t, n_t);
        let p1 = LagrangeBasis::new(d, 1);
        let mut phi = vec![0.0; nu];
        let mut psi = vec![0.0; ns];
        let mut lam = vec![0.0; d];
        let traces: Vec<f64> = tensors.iter().map(|e| sym_trace(e, d)).collect();
        for (pi, piece) in geom.pieces.iter().enumerate() {
            let alpha = 2.0 * mu / piece.h_face;
            let corners = corners_of(piece.skeleton);
            let nodes = &piece_nodes[pi];
            for (p, w) in piece.quad.points.iter().zip(&piece.quad.weights) {
                wg.interior.eval_into(p, &mut phi);
                let bary = barycentric(&corners, p);
                lag.eval_into(&bary[..d], &mut phil);
                let aw = alpha * w;
                for m in 0..nu {
                    for m2 in 0..nu {
                        let v = aw * phi[m] * phi[m2];
                        for c in 0..d {
                            s_ii[(c * nu + m, c * nu + m2)] += v;
                        }
                    }
                    for (l, &j) in nodes.iter().enumerate() {
                        let v = aw * phi[m] * phil[l];
                        for c in 0..d {
                            s_ib[(c * nu + m, j * d + c)] -= v;
                        }
                    }
                }
                for (l, &j) in nodes.iter().enumerate() {
                    for (l2, &j2) in nodes.iter().enumerate() {
                        let v = aw * phil[l] * phil[l2];
                        for c in 0..d {
                            s_bb[(j * d + c, j2 * d + c)] += v;
                        }
                    }
                }
                if let Some(tnodes) = &piece_stress[pi] {
                    let beta = piece.h_face / (2.0 * mu);
                    let bw = beta * w;
                    wg.target.eval_into(p, &mut psi);
                    p1.eval_into(&bary[..d], &mut lam);
                    for s in 0..nt {
                        if traces[s] == 0.0 {
                            continue;
                        }
                        for q in 0..ns {
                            let tq = bw * traces[s] * psi[q];
                            for r in 0..nt {
                                if traces[r] == 0.0 {
                                    continue;
                                }
                                for q2 in 0..ns {
                                    z_ii[(s * ns + q, r * ns + q2)] += tq * traces[r] * psi[q2];
                                }
                            }
                            for (l, &t) in tnodes.iter().enumerate() {
                                z_it[(s * ns + q, t)] -= tq * lam[l];
                            }
                        }
                    }
                    for (l, &t) in tnodes.iter().enumerate() {
                        for (l2, &t2) in tnodes.iter().enumerate() {
                            z_tt[(t, t2)] += bw * lam[l] * lam[l2];
                        }
                    }
                }
            }
        }

        // Loads with the higher data order.
        let order = data_order(k);
        let basis = cell_basis(mesh, cell, k + 1);
        let qc = QuadratureRule::on_simplices(&mesh.cells()[cell].subsimplices, order)?;
        let mut f_i = DVector::zeros(n_u);
        for (p, w) in qc.points.iter().zip(&qc.weights) {
            let f = (problem.body_force)(p);
            basis.eval_into(p, &mut phi);
            for c in 0..d {
                let fw = w * f[c];
                for m in 0..nu {
                    f_i[c * nu + m] += fw * phi[m];
                }
            }
        }
        let mut f_b = DVector::zeros(n_b);
        for (pi, piece) in geom.pieces.iter().enumerate() {
            if piece.marker != FaceMarker::Neumann {
                continue;
            }
            let corners = corners_of(piece.skeleton);
            let oriented = mesh.oriented_piece(&mesh.cells()[cell].boundary[pi]);
            let q = QuadratureRule::on_simplex(&oriented, order)?;
            for (p, w) in q.points.iter().zip(&q.weights) {
                let g = (problem.neumann)(p, &piece.normal);
                lag.eval_into(&barycentric(&corners, p)[..d], &mut phil);
                for (l, &j) in piece_nodes[pi].iter().enumerate() {
                    for c in 0..d {
                        f_b[j * d + c] -= w * g[c] * phil[l];
                    }
                }
            }
        }

        Ok(LocalElementSystem {
            cell,
            dim: d,
            trace_nodes,
            stress_nodes,
            a,
            z_ii,
            z_it,
            z_tt,
            b_i,
            b_b,
            s_ii,
            s_ib,
            s_bb,
            f_i,
            f_b,
            mass_k,
        })
    }

    pub fn n_sigma(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.s_ii.nrows()
    }

    pub fn n_b(&self) -> usize {
        self.s_bb.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.z_tt.nrows()
    }

    /// The full local matrix in the sign convention of the global system,
    /// ordered `(sigma_i, u_i, u_b, sigma_tr)`, and its right-hand side.
    pub fn full_system(&self) -> (DMatrix<f64>, DVector<f64>) {
        let (ns, nu, nb, nt) = (self.n_sigma(), self.n_u(), self.n_b(), self.n_t());
        let n = ns + nu + nb + nt;
        let (o_u, o_b, o_t) = (ns, ns + nu, ns + nu + nb);
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (ns, ns)).copy_from(&-(&self.a + &self.z_ii));
        m.view_mut((0, o_u), (ns, nu)).copy_from(&self.b_i);
        m.view_mut((0, o_b), (ns, nb)).copy_from(&self.b_b);
        m.view_mut((0, o_t), (ns, nt)).copy_from(&-&self.z_it);
        m.view_mut((o_u, o_u), (nu, nu)).copy_from(&self.s_ii);
        m.view_mut((o_u, o_b), (nu, nb)).copy_from(&self.s_ib);
        m.view_mut((o_b, o_b), (nb, nb)).copy_from(&self.s_bb);
        m.view_mut((o_t, o_t), (nt, nt)).copy_from(&-&self.z_tt);
        for i in 0..n {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        let mut rhs = DVector::zeros(n);
        rhs.rows_mut(o_u, nu).copy_from(&-&self.f_i);
        rhs.rows_mut(o_b, nb).copy_from(&-&self.f_b);
        (m, rhs)
    }
}
