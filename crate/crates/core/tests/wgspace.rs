use wg_elasticity::mesh::{
    cube_tet_mesh, ladder_mesh, triangle_mesh, triangle_mesh_with, DiagonalPattern, FaceMarker, Mesh, Point,
};
use wg_elasticity::polyquad::face_quadrature;
use wg_elasticity::verify::{dirichlet_integral, dirichlet_mean, single_simplex_mesh};
use wg_elasticity::wgspace::{scott_zhang_boundary, DofMap};
use wg_elasticity::{ElasticityProblem, Error, LameParameters};

#[test]
fn skeleton_dof_counts_match_the_closed_form() {
    for (n, want) in [(4, 75), (8, 243), (16, 867)] {
        for pattern in [DiagonalPattern::Uniform, DiagonalPattern::Alternating] {
            let m = triangle_mesh_with(n, pattern).unwrap();
            let dofs = DofMap::new(&m, 0);
            assert_eq!(dofs.n_skeleton_dofs(), want);
            assert_eq!(dofs.n_skeleton_dofs(), 3 * (n + 1) * (n + 1));
        }
    }
}

#[test]
fn stress_trace_exists_only_below_the_dimension() {
    assert!(DofMap::new(&triangle_mesh(2).unwrap(), 0).has_stress_trace());
    assert!(!DofMap::new(&triangle_mesh(2).unwrap(), 1).has_stress_trace());
    assert!(DofMap::new(&cube_tet_mesh(1).unwrap(), 1).has_stress_trace());
    assert!(!DofMap::new(&cube_tet_mesh(1).unwrap(), 2).has_stress_trace());
}

#[test]
fn per_cell_dimensions() {
    let m = single_simplex_mesh(2).unwrap();
    let dofs = DofMap::new(&m, 1);
    assert_eq!(dofs.n_stress_local(), 9);
    assert_eq!(dofs.n_disp_local(), 12);
    let m3 = single_simplex_mesh(3).unwrap();
    let dofs3 = DofMap::new(&m3, 0);
    assert_eq!(dofs3.n_stress_local(), 6);
    assert_eq!(dofs3.n_disp_local(), 12);
}

#[test]
fn trace_nodes_are_shared() {
    // P_{k+1} Lagrange nodes on the edges of the n x n triangle mesh:
    // vertices + k interior nodes per edge.
    for k in 0..=2 {
        let n = 3;
        let m = triangle_mesh(n).unwrap();
        let dofs = DofMap::new(&m, k);
        assert_eq!(dofs.n_trace_nodes(), (n + 1) * (n + 1) + k * (3 * n * n + 2 * n));
    }
    // 3D, k = 2: vertices, two nodes per edge and one per face.
    let m = cube_tet_mesh(1).unwrap();
    let dofs = DofMap::new(&m, 2);
    assert_eq!(dofs.n_trace_nodes(), 8 + 2 * 19 + 18);
}

#[test]
fn free_dimension_after_dirichlet_elimination() {
    // 16 boundary vertices carry fixed displacement dofs. With the alternating
    // diagonal every stress-trace node touches an interior edge; with the
    // uniform diagonal the two corners off the diagonal do not and are fixed
    // at zero as well.
    let lame = LameParameters::new(1.0, 1.0).unwrap();
    let problem = ElasticityProblem::homogeneous(lame);
    for (pattern, free) in [(DiagonalPattern::Alternating, 43), (DiagonalPattern::Uniform, 41)] {
        let m = triangle_mesh_with(4, pattern).unwrap();
        let dofs = DofMap::new(&m, 0);
        assert_eq!(dofs.n_dirichlet_nodes(), 16);
        let sys = wg_elasticity::assemble_global(&m, &dofs, &problem).unwrap();
        assert_eq!(sys.n_free(), free, "{pattern:?}");
    }
}

#[test]
fn interpolant_of_zero_is_zero() {
    for k in 0..=2 {
        let m = triangle_mesh(3).unwrap();
        let dofs = DofMap::new(&m, k);
        let g = scott_zhang_boundary(&m, &dofs, |_| 0.0).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
        assert_eq!(g.defined, dofs.dirichlet);
    }
}

#[test]
fn interpolant_reproduces_continuous_piecewise_polynomials() {
    for (m, k) in [(triangle_mesh(3).unwrap(), 0), (triangle_mesh(3).unwrap(), 2), (cube_tet_mesh(1).unwrap(), 1)] {
        let dofs = DofMap::new(&m, k);
        let deg = k as i32 + 1;
        let g = |p: &Point| (p.x - 2.0 * p.y + 0.5 * p.z + 0.1).powi(deg);
        let ig = scott_zhang_boundary(&m, &dofs, g).unwrap();
        for (i, p) in dofs.trace_nodes.iter().enumerate() {
            if dofs.dirichlet[i] {
                assert!((ig.values[i] - g(p)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn left_edge_mean_of_x_and_y() {
    // With Gamma_D the left edge, g = x vanishes there; g = y has mean 1/2.
    let mut m = triangle_mesh(4).unwrap();
    m.remark_boundary(|_, c, _| if c.x < 1e-12 { FaceMarker::Dirichlet } else { FaceMarker::Neumann }).unwrap();
    for k in 0..=2 {
        let dofs = DofMap::new(&m, k);
        for g in [|p: &Point| p.x, |p: &Point| p.y * p.y * p.y + 0.2] {
            let ig = scott_zhang_boundary(&m, &dofs, g).unwrap();
            let lhs = dirichlet_integral(&m, &dofs, &ig.values).unwrap();
            let (rhs, _, _) = dirichlet_mean(&m, g).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "k={k}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn empty_dirichlet_boundary_is_an_error() {
    let mut m = triangle_mesh(2).unwrap();
    m.remark_boundary(|_, _, _| FaceMarker::Neumann).unwrap();
    let dofs = DofMap::new(&m, 0);
    assert!(matches!(scott_zhang_boundary(&m, &dofs, |_| 1.0), Err(Error::EmptyDirichlet)));
}

/// `||g - I g||` over the Dirichlet boundary of a 2D mesh.
fn boundary_error(m: &Mesh, k: usize, g: impl Fn(&Point) -> f64 + Copy) -> f64 {
    let dofs = DofMap::new(m, k);
    let ig = scott_zhang_boundary(m, &dofs, g).unwrap();
    let mut e2 = 0.0;
    for (s, sk) in m.skeleton().iter().enumerate() {
        if m.faces()[sk.parent].marker != FaceMarker::Dirichlet {
            continue;
        }
        let a = m.vertices()[sk.vertices[0]];
        let b = m.vertices()[sk.vertices[1]];
        let q = face_quadrature(m, s, 2 * k + 10).unwrap();
        e2 += q.integrate(|p| {
            let t = (p - a).norm() / (b - a).norm();
            let phi = dofs.trace_basis.eval(&[1.0 - t, t]);
            let v: f64 = dofs.skeleton_nodes[s].iter().zip(&phi).map(|(&i, f)| ig.values[i] * f).sum();
            (g(p) - v).powi(2)
        });
    }
    e2.sqrt()
}

#[test]
fn interpolation_rate() {
    let g = |p: &Point| (2.0 * std::f64::consts::PI * (p.x + p.y)).sin();
    for k in 0..=2 {
        let e1 = boundary_error(&triangle_mesh(8).unwrap(), k, g);
        let e2 = boundary_error(&triangle_mesh(16).unwrap(), k, g);
        let rate = (e1 / e2).log2();
        assert!((rate - (k as f64 + 2.0)).abs() < 0.2, "k={k}: rate {rate}");
    }
}

#[test]
fn interpolant_is_local() {
    // A bump supported inside one boundary edge changes only nearby nodes.
    let m = triangle_mesh(8).unwrap();
    for k in 0..=1 {
        let dofs = DofMap::new(&m, k);
        let g = |p: &Point| p.x * p.x + p.y;
        let bump = |p: &Point| {
            let t = (p.x - 0.4375) / 0.0625;
            if p.y.abs() < 1e-12 && t.abs() < 1.0 {
                (-1.0 / (1.0 - t * t)).exp()
            } else {
                0.0
            }
        };
        let a = scott_zhang_boundary(&m, &dofs, g).unwrap();
        let b = scott_zhang_boundary(&m, &dofs, |p| g(p) + bump(p)).unwrap();
        let mut changed = 0;
        for (i, p) in dofs.trace_nodes.iter().enumerate() {
            if (a.values[i] - b.values[i]).abs() > 1e-14 {
                changed += 1;
                let dist = (p - Point::new(0.4375, 0.0, 0.0)).norm();
                assert!(dist < 3.0 * 0.125, "k={k}: node {p:?} changed");
            }
        }
        assert!(changed > 0);
    }
}

#[test]
fn ladder_traces_follow_hanging_nodes() {
    let m = ladder_mesh(2).unwrap();
    let dofs = DofMap::new(&m, 0);
    assert_eq!(dofs.n_trace_nodes(), m.vertices().len());
    for s in 0..m.skeleton().len() {
        assert_eq!(dofs.skeleton_nodes[s].len(), 2);
    }
}
