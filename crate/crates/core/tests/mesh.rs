use std::collections::{HashMap, HashSet};

use wg_elasticity::mesh::{
    check_regularity, cube_tet_mesh, export_mesh, import_mesh, ladder_mesh, triangle_mesh, triangle_mesh_with,
    CellSpec, DiagonalPattern, FaceMarker, Mesh, Point, DEFAULT_THETA_THRESHOLD,
};
use wg_elasticity::polyquad::simplex_measure;
use wg_elasticity::Error;

fn p2(x: f64, y: f64) -> Point {
    Point::new(x, y, 0.0)
}

fn all_dirichlet(_: &[usize], _: &Point, _: &Point) -> Option<FaceMarker> {
    Some(FaceMarker::Dirichlet)
}

#[test]
fn triangle_mesh_single_square() {
    let m = triangle_mesh(1).unwrap();
    assert_eq!(m.cells().len(), 2);
    assert_eq!(m.vertices().len(), 4);
    assert_eq!(m.faces().len(), 5);
    assert!(m.faces().iter().filter(|f| f.is_boundary()).all(|f| f.marker == FaceMarker::Dirichlet));
}

#[test]
fn triangle_mesh_counts() {
    for n in [2, 4, 8] {
        for pattern in [DiagonalPattern::Uniform, DiagonalPattern::Alternating] {
            let m = triangle_mesh_with(n, pattern).unwrap();
            assert_eq!(m.vertices().len(), (n + 1) * (n + 1));
            assert_eq!(m.cells().len(), 2 * n * n);
            assert_eq!(m.faces().len(), 3 * n * n + 2 * n);
            assert!((m.total_volume() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn uniform_diagonal_runs_lower_left_to_upper_right() {
    let m = triangle_mesh(3).unwrap();
    for f in m.faces() {
        let a = m.vertices()[f.vertices[0]];
        let b = m.vertices()[f.vertices[1]];
        let d = b - a;
        if d.x.abs() > 1e-12 && d.y.abs() > 1e-12 {
            assert!(d.x * d.y > 0.0, "diagonal {a:?} -> {b:?}");
        }
    }
}

#[test]
fn ladder_mesh_partition_and_regularity() {
    for n in 2..=6 {
        let m = ladder_mesh(n).unwrap();
        let area: f64 = m.cells().iter().map(|c| c.volume).sum();
        assert!((area - 1.0).abs() < 1e-12, "n={n}: area {area}");
    }
    let r = check_regularity(&ladder_mesh(2).unwrap(), DEFAULT_THETA_THRESHOLD);
    assert!(r.min_theta >= 0.2, "theta {}", r.min_theta);
    assert!(r.flagged.is_empty());
}

#[test]
fn ladder_mesh_has_hanging_nodes() {
    let m = ladder_mesh(4).unwrap();
    // Some cell has two collinear proper edges on the same side, each shared
    // with a different neighbour.
    let witness = m.cells().iter().enumerate().any(|(c, cell)| {
        let inner: Vec<_> = cell.faces.iter().map(|&f| &m.faces()[f]).filter(|f| !f.is_boundary()).collect();
        inner.iter().enumerate().any(|(i, f)| {
            inner[i + 1..].iter().any(|g| {
                let other = |x: &&wg_elasticity::mesh::Face| *x.cells.iter().find(|&&o| o != c).unwrap();
                (f.normal - g.normal).norm() < 1e-12
                    && (f.normal.dot(&(g.centroid - f.centroid))).abs() < 1e-12
                    && other(f) != other(g)
            })
        })
    });
    assert!(witness);
}

#[test]
fn cube_mesh_counts_and_volume() {
    let m = cube_tet_mesh(1).unwrap();
    assert_eq!(m.cells().len(), 6);
    assert_eq!(m.vertices().len(), 8);
    for n in 1..=3 {
        let m = cube_tet_mesh(n).unwrap();
        assert_eq!(m.cells().len(), 6 * n * n * n);
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cube_mesh_interior_faces_have_two_tets() {
    let m = cube_tet_mesh(2).unwrap();
    let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
    for spec in m.cell_specs() {
        let CellSpec::Polyhedron(faces) = spec else { panic!("expected polyhedra") };
        for f in faces {
            let mut key = f.clone();
            key.sort();
            *count.entry(key).or_default() += 1;
        }
    }
    for f in m.faces() {
        let mut key = f.vertices.clone();
        key.sort();
        let expected = if f.is_boundary() { 1 } else { 2 };
        assert_eq!(count[&key], expected);
        assert_eq!(f.cells.len(), expected);
    }
}

#[test]
fn submesh_of_triangle_is_the_cell() {
    let m = triangle_mesh(2).unwrap();
    for c in m.cells() {
        let total: f64 = c.subsimplices.iter().map(|s| simplex_measure(s)).sum();
        assert!((total - c.volume).abs() < 1e-12 * c.volume);
        assert!(c.subsimplices.len() <= 3);
    }
}

#[test]
fn square_cell_fans_into_four_quarters() {
    let v = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0)];
    let m = Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2, 3])], all_dirichlet).unwrap();
    let c = &m.cells()[0];
    assert!((c.star_center - p2(0.5, 0.5)).norm() < 1e-14);
    assert_eq!(c.subsimplices.len(), 4);
    for s in &c.subsimplices {
        assert!((simplex_measure(s) - 0.25).abs() < 1e-14);
    }
}

#[test]
fn square_with_hanging_node_fans_into_five() {
    let v = vec![p2(0.0, 0.0), p2(0.5, 0.0), p2(1.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0)];
    let m = Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2, 3, 4])], all_dirichlet).unwrap();
    let c = &m.cells()[0];
    assert_eq!(c.subsimplices.len(), 5);
    let total: f64 = c.subsimplices.iter().map(|s| simplex_measure(s)).sum();
    assert!((total - 1.0).abs() < 1e-14);
    // The collinear vertex splits the bottom into two proper edges.
    assert_eq!(c.faces.len(), 5);
}

#[test]
fn regularity_of_equilateral_triangle() {
    let s3 = 3f64.sqrt();
    let v = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(0.5, s3 / 2.0)];
    let m = Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2])], all_dirichlet).unwrap();
    let r = check_regularity(&m, DEFAULT_THETA_THRESHOLD);
    assert!((r.theta[0] - 1.0 / (2.0 * s3)).abs() < 1e-6);
    assert!((r.ell[0] - 1.0).abs() < 1e-12);
}

#[test]
fn regularity_of_unit_square() {
    let v = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0)];
    let m = Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2, 3])], all_dirichlet).unwrap();
    let r = check_regularity(&m, DEFAULT_THETA_THRESHOLD);
    assert!((r.ell[0] - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    assert!((r.theta[0] - 0.5 / 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn regularity_flags_slivers() {
    let v = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(0.5, 1e-6)];
    let m = Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2])], all_dirichlet).unwrap();
    let r = check_regularity(&m, DEFAULT_THETA_THRESHOLD);
    assert!(r.min_theta < DEFAULT_THETA_THRESHOLD);
    assert_eq!(r.flagged, vec![0]);
}

const TWO_TRIANGLES: &str = "\
# unit square split along a diagonal
wgmesh 2 4 2 4
v 0 0
v 1 0
v 1 1
v 0 1
c 0 1 2
c 0 2 3
b 0 1 D
b 1 2 D
b 2 3 N
b 3 0 N
";

#[test]
fn import_minimal_file() {
    let m = import_mesh(TWO_TRIANGLES).unwrap();
    assert_eq!(m.cells().len(), 2);
    let neumann = m.faces().iter().filter(|f| f.marker == FaceMarker::Neumann).count();
    assert_eq!(neumann, 2);
}

#[test]
fn import_rejects_unmarked_boundary_face() {
    let text = TWO_TRIANGLES.replace("b 3 0 N\n", "").replace("wgmesh 2 4 2 4", "wgmesh 2 4 2 3");
    assert!(matches!(import_mesh(&text), Err(Error::Topology(_))));
}

#[test]
fn import_reports_line_numbers() {
    let text = TWO_TRIANGLES.replace("v 1 1", "v 1 one");
    match import_mesh(&text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn import_rejects_dangling_vertex() {
    let text = TWO_TRIANGLES.replace("c 0 2 3", "c 0 2 7");
    assert!(import_mesh(&text).is_err());
}

fn topology(m: &Mesh) -> (Vec<[u64; 3]>, Vec<Vec<usize>>, Vec<(Vec<usize>, FaceMarker)>) {
    let verts = m.vertices().iter().map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]).collect();
    let cells = m.cells().iter().map(|c| c.vertices.clone()).collect();
    let faces = m.faces().iter().map(|f| (f.vertices.clone(), f.marker)).collect();
    (verts, cells, faces)
}

#[test]
fn round_trip_is_exact() {
    for m in [triangle_mesh(4).unwrap(), ladder_mesh(3).unwrap(), cube_tet_mesh(2).unwrap()] {
        let back = import_mesh(&export_mesh(&m)).unwrap();
        assert_eq!(topology(&m), topology(&back));
    }
}

#[test]
fn round_trip_keeps_irrational_coordinates() {
    let v = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(0.1 + 0.2, 1.0 / 3.0)];
    let m = Mesh::new(2, v, vec![CellSpec::Polygon(vec![0, 1, 2])], all_dirichlet).unwrap();
    let back = import_mesh(&export_mesh(&m)).unwrap();
    assert_eq!(topology(&m), topology(&back));
}

#[test]
fn two_dimensional_skeleton_equals_proper_edges() {
    for m in [triangle_mesh(3).unwrap(), ladder_mesh(3).unwrap()] {
        let skel: HashSet<Vec<usize>> = m
            .skeleton()
            .iter()
            .map(|s| {
                let mut v = s.vertices.clone();
                v.sort();
                v
            })
            .collect();
        let edges: HashSet<Vec<usize>> = m
            .faces()
            .iter()
            .map(|f| {
                let mut v = f.vertices.clone();
                v.sort();
                v
            })
            .collect();
        assert_eq!(skel, edges);
    }
}

#[test]
fn no_vertex_inside_a_proper_face() {
    for m in [triangle_mesh(4).unwrap(), ladder_mesh(4).unwrap(), cube_tet_mesh(2).unwrap()] {
        assert!(m.improper_faces().is_empty());
    }
}

#[test]
fn skeleton_simplices_shared_by_two_subsimplices() {
    // Count each sub-simplex facet; facets on the mesh boundary appear once,
    // all others twice.
    for m in [ladder_mesh(3).unwrap(), cube_tet_mesh(1).unwrap()] {
        let d = m.dim();
        let key = |p: &Point| [(p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64, (p.z * 1e9).round() as i64];
        let mut count: HashMap<Vec<[i64; 3]>, usize> = HashMap::new();
        for c in m.cells() {
            for s in &c.subsimplices {
                for skip in 0..=d {
                    let mut f: Vec<[i64; 3]> = (0..=d).filter(|&i| i != skip).map(|i| key(&s[i])).collect();
                    f.sort();
                    *count.entry(f).or_default() += 1;
                }
            }
        }
        let on_boundary =
            |f: &Vec<[i64; 3]>| (0..d).any(|a| f.iter().all(|p| p[a] == 0) || f.iter().all(|p| p[a] == 1_000_000_000));
        for (f, n) in count {
            assert_eq!(n, if on_boundary(&f) { 1 } else { 2 }, "facet {f:?}");
        }
    }
}

#[test]
fn boundary_parts_need_two_faces() {
    let mut m = triangle_mesh(2).unwrap();
    let r =
        m.remark_boundary(|_, c, _| if c.x < 1e-12 && c.y < 0.5 { FaceMarker::Neumann } else { FaceMarker::Dirichlet });
    assert!(matches!(r, Err(Error::Topology(_))));
    let r = m.remark_boundary(|_, c, _| if c.x < 1e-12 { FaceMarker::Neumann } else { FaceMarker::Dirichlet });
    assert!(r.is_ok());
}

#[test]
fn non_star_shaped_cell_is_rejected() {
    // A thin comb: no point sees the whole boundary.
    let v = vec![
        p2(0.0, 0.0),
        p2(3.0, 0.0),
        p2(3.0, 1.0),
        p2(2.9, 1.0),
        p2(2.9, 0.1),
        p2(0.1, 0.1),
        p2(0.1, 1.0),
        p2(0.0, 1.0),
    ];
    let spec = CellSpec::Polygon((0..8).collect());
    let r = Mesh::new(2, v, vec![spec], all_dirichlet);
    assert!(matches!(r, Err(Error::NonStarShaped { cell: 0 })), "{r:?}");
}

#[test]
fn nonconvex_star_shaped_cell_uses_kernel_center() {
    // An L-shape: the centroid is outside the kernel region near the corner.
    let v = vec![p2(0.0, 0.0), p2(2.0, 0.0), p2(2.0, 0.2), p2(0.2, 0.2), p2(0.2, 2.0), p2(0.0, 2.0)];
    let m = Mesh::new(2, v, vec![CellSpec::Polygon((0..6).collect())], all_dirichlet).unwrap();
    let c = &m.cells()[0];
    let total: f64 = c.subsimplices.iter().map(|s| simplex_measure(s)).sum();
    assert!((total - c.volume).abs() < 1e-12);
    assert!(c.star_center.x < 0.2 && c.star_center.y < 0.2);
}
