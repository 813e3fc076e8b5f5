use wg_elasticity::mesh::{triangle_mesh, CellSpec, FaceMarker, Mesh, Point};
use wg_elasticity::polyquad::{
    cell_basis, cell_quadrature, face_basis, face_quadrature, gauss_legendre, monomial_exponents, poly_dim,
    project_face, project_interior, simplex_rule, CellBasis, LagrangeBasis, QuadratureRule, MAX_ORDER,
};
use wg_elasticity::Error;

fn unit_square() -> Mesh {
    let v = vec![
        Point::new(0.0, 0.0, 0.0),
        Point::new(1.0, 0.0, 0.0),
        Point::new(1.0, 1.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
    ];
    Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2, 3])], |_, _, _| Some(FaceMarker::Dirichlet)).unwrap()
}

fn reference_triangle() -> Mesh {
    let v = vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
    Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2])], |_, _, _| Some(FaceMarker::Dirichlet)).unwrap()
}

#[test]
fn dimensions_are_binomials() {
    assert_eq!(poly_dim(2, 0), 1);
    assert_eq!(poly_dim(2, 1), 3);
    assert_eq!(poly_dim(2, 2), 6);
    assert_eq!(poly_dim(3, 1), 4);
    assert_eq!(poly_dim(3, 2), 10);
    assert_eq!(poly_dim(1, 4), 5);
    for d in 1..=3 {
        for k in 0..6 {
            assert_eq!(monomial_exponents(d, k).len(), poly_dim(d, k));
        }
    }
}

#[test]
fn basis_at_centroid() {
    let b = CellBasis::new(2, 3, Point::new(0.3, 0.7, 0.0), 0.5);
    let v = b.eval(&Point::new(0.3, 0.7, 0.0));
    assert_eq!(v[0], 1.0);
    assert!(v[1..].iter().all(|&x| x == 0.0));
}

#[test]
fn unit_square_integrals() {
    let m = unit_square();
    let q = cell_quadrature(&m, 0, 4).unwrap();
    assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-13);
    assert!((q.measure() - 1.0).abs() < 1e-13);
    assert!((q.integrate(|p| p.x * p.x * p.y * p.y) - 1.0 / 9.0).abs() < 1e-13);
    assert!(q.weights.iter().all(|&w| w > 0.0));
}

#[test]
fn simplex_rules_are_exact() {
    // Monomials x^a y^b z^c on the reference simplex integrate to
    // a! b! c! / (a + b + c + d)!.
    let fact = |n: u32| (1..=n).map(|i| i as f64).product::<f64>();
    for d in 1..=3usize {
        for order in [0, 1, 3, 6, 10, 2 * 5 + 6] {
            let rule = simplex_rule(d, order).unwrap();
            let corners: Vec<Point> = (0..=d)
                .map(|i| {
                    let mut p = Point::zeros();
                    if i > 0 {
                        p[i - 1] = 1.0;
                    }
                    p
                })
                .collect();
            let q = QuadratureRule::on_simplex(&corners, order).unwrap();
            assert_eq!(rule.bary.len(), q.len());
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for e in monomial_exponents(d, order) {
                let exact = e.iter().map(|&a| fact(a)).product::<f64>() / fact(e.iter().sum::<u32>() + d as u32);
                let got = q.integrate(|p| (0..d).map(|i| p[i].powi(e[i] as i32)).product());
                assert!((got - exact).abs() < 1e-14 + 1e-12 * exact, "d={d} order={order} {e:?}: {got} vs {exact}");
            }
        }
    }
}

#[test]
fn order_limit() {
    assert!(matches!(simplex_rule(2, MAX_ORDER + 1), Err(Error::UnsupportedOrder { .. })));
    assert!(simplex_rule(3, MAX_ORDER).is_ok());
}

#[test]
fn gauss_legendre_weights() {
    for n in 1..12 {
        let (x, w) = gauss_legendre(n);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(x.iter().all(|&t| (0.0..=1.0).contains(&t)));
        // Exact up to degree 2n - 1 on [0, 1].
        for m in [2 * n - 2, 2 * n - 1] {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(m as i32)).sum();
            assert!((got - 1.0 / (m as f64 + 1.0)).abs() < 1e-14);
        }
    }
}

#[test]
fn products_of_trace_basis_integrate_exactly() {
    // Lagrange P2 on the unit segment: the mass matrix is
    // [[4, 2, -1], [2, 16, 2], [-1, 2, 4]] / 30 in vertex, vertex, midpoint
    // order up to permutation; check its sum and trace.
    let k = 1;
    let basis = LagrangeBasis::new(2, k + 1);
    let rule = simplex_rule(1, 2 * (k + 1) + 2).unwrap();
    let mut mass = vec![vec![0.0; basis.len()]; basis.len()];
    for (b, w) in rule.bary.iter().zip(&rule.weights) {
        let phi = basis.eval(&b[..2]);
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                mass[i][j] += w * phi[i] * phi[j];
            }
        }
    }
    let total: f64 = mass.iter().flatten().sum();
    let trace: f64 = (0..3).map(|i| mass[i][i]).sum();
    assert!((total - 1.0).abs() < 1e-13);
    assert!((trace - 24.0 / 30.0).abs() < 1e-13);
}

#[test]
fn projection_of_polynomials_is_exact() {
    let m = triangle_mesh(2).unwrap();
    for j in 0..=3 {
        let b = cell_basis(&m, 3, j);
        let f = |p: &Point| (0.2 + p.x - 0.5 * p.y).powi(j as i32) + 0.3;
        let c = project_interior(&m, 3, j, f).unwrap();
        let q = cell_quadrature(&m, 3, 2 * j + 4).unwrap();
        for p in &q.points {
            let v: f64 = b.eval(p).iter().zip(c.iter()).map(|(a, b)| a * b).sum();
            assert!((v - f(p)).abs() < 1e-12);
        }
    }
}

#[test]
fn piecewise_constant_projection_is_the_mean() {
    // x^(j+1) with j = 0 on the reference triangle: mean 1/3.
    let m = reference_triangle();
    let c = project_interior(&m, 0, 0, |p| p.x).unwrap();
    assert!((c[0] - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn face_projection_of_s_squared() {
    // Q_1 s^2 on [0, 1] is s - 1/6.
    let m = unit_square();
    let s = m
        .skeleton()
        .iter()
        .position(|s| {
            let a = m.vertices()[s.vertices[0]];
            let b = m.vertices()[s.vertices[1]];
            a.y == 0.0 && b.y == 0.0
        })
        .unwrap();
    let fb = face_basis(&m, s, 1);
    let c = project_face(&m, s, 1, |p| p.x * p.x).unwrap();
    for t in [0.0, 0.25, 0.5, 0.9, 1.0] {
        let p = Point::new(t, 0.0, 0.0);
        let v: f64 = fb.eval(&p).iter().zip(c.iter()).map(|(a, b)| a * b).sum();
        assert!((v - (t - 1.0 / 6.0)).abs() < 1e-13, "t={t}: {v}");
    }
    let q = face_quadrature(&m, s, 2).unwrap();
    assert!((q.measure() - 1.0).abs() < 1e-14);
}

#[test]
fn projection_approximation_order() {
    // ||f - Q_j f|| over the unit square decreases like h^(j+1).
    let f = |p: &Point| (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin();
    for j in 0..=2 {
        let err = |n: usize| {
            let m = triangle_mesh(n).unwrap();
            let mut e2 = 0.0;
            for c in 0..m.cells().len() {
                let b = cell_basis(&m, c, j);
                let coef = project_interior(&m, c, j, f).unwrap();
                let q = cell_quadrature(&m, c, 2 * j + 10).unwrap();
                e2 += q.integrate(|p| {
                    let v: f64 = b.eval(p).iter().zip(coef.iter()).map(|(a, b)| a * b).sum();
                    (f(p) - v).powi(2)
                });
            }
            e2.sqrt()
        };
        let rate = (err(4) / err(8)).log2();
        assert!((rate - (j as f64 + 1.0)).abs() < 0.15, "j={j}: rate {rate}");
    }
}

#[test]
fn lagrange_basis_is_nodal_and_sums_to_one() {
    for corners in [2, 3] {
        for deg in 1..=3 {
            let b = LagrangeBasis::new(corners, deg);
            for i in 0..b.len() {
                let phi = b.eval(&b.node_bary(i));
                for (j, v) in phi.iter().enumerate() {
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
                }
            }
            let bary: Vec<f64> = if corners == 2 { vec![0.3, 0.7] } else { vec![0.2, 0.5, 0.3] };
            assert!((b.eval(&bary).iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }
}
