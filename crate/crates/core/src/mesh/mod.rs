//! Polytopal meshes: cells, proper faces, the boundary skeleton and the
//! auxiliary simplicial submesh used for integration.
//!
//! A mesh is built once from a list of cells and is immutable afterwards.
//! Hanging nodes are ordinary cell vertices, so proper faces never span one.

mod generate;
mod io;
mod regularity;
mod submesh;

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub use generate::{cube_tet_mesh, ladder_mesh, triangle_mesh, triangle_mesh_with, DiagonalPattern};
pub use io::{export_mesh, import_mesh};
pub use regularity::{check_regularity, RegularityReport, DEFAULT_THETA_THRESHOLD};

/// Coordinates are always stored in three components; 2D meshes keep `z = 0`.
pub type Point = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceMarker {
    Interior,
    Dirichlet,
    Neumann,
}

/// Input description of one cell.
#[derive(Clone, Debug, PartialEq)]
pub enum CellSpec {
    /// Boundary loop of a polygon, hanging nodes included.
    Polygon(Vec<usize>),
    /// Vertex loops of the faces of a polyhedron.
    Polyhedron(Vec<Vec<usize>>),
}

/// A proper edge (2D) or face (3D).
#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex pair (2D) or vertex loop (3D), oriented counterclockwise as
    /// seen from outside `cells[0]`.
    pub vertices: Vec<usize>,
    /// One adjacent cell on the boundary, two in the interior.
    pub cells: Vec<usize>,
    pub marker: FaceMarker,
    /// Unit normal pointing out of `cells[0]`.
    pub normal: Point,
    pub measure: f64,
    pub diameter: f64,
    pub centroid: Point,
    /// Skeleton simplices covering this face.
    pub skeleton: Vec<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }
}

/// A simplex of the skeleton: a segment in 2D, a triangle in 3D.
#[derive(Clone, Debug)]
pub struct SkeletonFace {
    /// `d` vertex ids, oriented like the parent face.
    pub vertices: Vec<usize>,
    pub parent: usize,
    pub measure: f64,
}

/// A skeleton simplex seen from one of its cells.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPiece {
    pub skeleton: usize,
    /// `+1.0` when the parent face normal points out of this cell.
    pub sign: f64,
}

#[derive(Clone, Debug)]
pub struct Cell {
    /// Boundary loop in counterclockwise order (2D), or all vertices in order
    /// of first appearance (3D).
    pub vertices: Vec<usize>,
    pub faces: Vec<usize>,
    pub boundary: Vec<BoundaryPiece>,
    pub diameter: f64,
    pub volume: f64,
    pub centroid: Point,
    /// The point `M_T` the cell is star-shaped with respect to.
    pub star_center: Point,
    /// Simplices of the auxiliary submesh covering the cell, as `d + 1` points.
    pub subsimplices: Vec<Vec<Point>>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    skeleton: Vec<SkeletonFace>,
    specs: Vec<CellSpec>,
    h: f64,
}

impl Mesh {
    /// Builds a mesh from cells. `marker` is asked for the marker of every
    /// boundary face (vertex loop, centroid, outward normal); returning `None`
    /// leaves the face unmarked, which is a topology error.
    pub fn new<F>(dim: usize, vertices: Vec<Point>, specs: Vec<CellSpec>, marker: F) -> Result<Self>
    where
        F: Fn(&[usize], &Point, &Point) -> Option<FaceMarker>,
    {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("unsupported dimension {dim}")));
        }
        if specs.is_empty() {
            return Err(Error::Topology("mesh has no cells".into()));
        }
        if let Some(p) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::Topology(format!("vertex {p} has non-finite coordinates")));
        }
        let nv = vertices.len();
        for (c, spec) in specs.iter().enumerate() {
            let ok = match (dim, spec) {
                (2, CellSpec::Polygon(l)) => l.len() >= 3 && l.iter().all(|&v| v < nv),
                (3, CellSpec::Polyhedron(fs)) => {
                    fs.len() >= 4 && fs.iter().all(|l| l.len() >= 3 && l.iter().all(|&v| v < nv))
                }
                _ => false,
            };
            if !ok {
                return Err(Error::Topology(format!("cell {c} is malformed or references a missing vertex")));
            }
        }
        let mut specs = specs;
        if dim == 2 {
            for spec in specs.iter_mut() {
                if let CellSpec::Polygon(l) = spec {
                    if signed_area(&vertices, l) < 0.0 {
                        l.reverse();
                    }
                }
            }
        }
        let mut builder = Builder { faces: Vec::new(), keys: HashMap::new() };
        let mut cell_faces = Vec::with_capacity(specs.len());
        for (c, spec) in specs.iter().enumerate() {
            let loops = face_loops(spec);
            let mut ids = Vec::with_capacity(loops.len());
            for l in loops {
                ids.push(builder.insert(c, l)?);
            }
            cell_faces.push(ids);
        }
        let mut faces = builder.faces;

        // Cell geometry that does not depend on face orientation.
        let mut cells: Vec<Cell> = Vec::with_capacity(specs.len());
        for (c, spec) in specs.iter().enumerate() {
            let verts = cell_vertices(spec);
            let (volume, centroid) = match spec {
                CellSpec::Polygon(l) => polygon_area_centroid(&vertices, l),
                CellSpec::Polyhedron(fs) => polyhedron_volume_centroid(&vertices, fs),
            };
            if !(volume > 0.0) {
                return Err(Error::Topology(format!("cell {c} has non-positive measure")));
            }
            let diameter = diameter_of(&vertices, &verts);
            cells.push(Cell {
                vertices: verts,
                faces: cell_faces[c].clone(),
                boundary: Vec::new(),
                diameter,
                volume,
                centroid,
                star_center: centroid,
                subsimplices: Vec::new(),
            });
        }

        // Orient faces outward from their first cell and mark the boundary.
        for (f, face) in faces.iter_mut().enumerate() {
            let owner = &cells[face.cells[0]];
            let (measure, centroid, mut normal) = face_geometry(dim, &vertices, &face.vertices);
            if dim == 3 && normal.dot(&(centroid - owner.centroid)) < 0.0 {
                face.vertices.reverse();
                normal = -normal;
            }
            face.normal = normal;
            face.measure = measure;
            face.centroid = centroid;
            face.diameter = diameter_of(&vertices, &face.vertices);
            if !(measure > 0.0) {
                return Err(Error::Topology(format!("face {f} is degenerate")));
            }
            face.marker = if face.is_boundary() {
                marker(&face.vertices, &centroid, &normal)
                    .ok_or_else(|| Error::Topology(format!("boundary face {:?} has no D/N marker", face.vertices)))?
            } else {
                FaceMarker::Interior
            };
            if face.is_boundary() && face.marker == FaceMarker::Interior {
                return Err(Error::Topology(format!("boundary face {:?} marked interior", face.vertices)));
            }
        }
        for class in [FaceMarker::Dirichlet, FaceMarker::Neumann] {
            if faces.iter().filter(|f| f.marker == class).count() == 1 {
                return Err(Error::Topology(format!("boundary part {class:?} must contain at least two faces")));
            }
        }

        let skeleton = submesh::build_skeleton(dim, &vertices, &mut faces)?;
        for (c, cell) in cells.iter_mut().enumerate() {
            for &f in &cell.faces {
                let sign = if faces[f].cells[0] == c { 1.0 } else { -1.0 };
                for &s in &faces[f].skeleton {
                    cell.boundary.push(BoundaryPiece { skeleton: s, sign });
                }
            }
        }
        let h = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        let mut mesh = Mesh { dim, vertices, cells, faces, skeleton, specs, h };
        submesh::build_submesh(&mut mesh)?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn skeleton(&self) -> &[SkeletonFace] {
        &self.skeleton
    }

    /// The cell descriptions the mesh was built from (with 2D loops made
    /// counterclockwise).
    pub fn cell_specs(&self) -> &[CellSpec] {
        &self.specs
    }

    /// Largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Parent face of a skeleton simplex.
    pub fn parent_face(&self, skeleton: usize) -> &Face {
        &self.faces[self.skeleton[skeleton].parent]
    }

    /// Corner points of a skeleton simplex oriented outward from `cell`.
    pub fn oriented_piece(&self, piece: &BoundaryPiece) -> Vec<Point> {
        let s = &self.skeleton[piece.skeleton];
        let mut pts: Vec<Point> = s.vertices.iter().map(|&v| self.vertices[v]).collect();
        if piece.sign < 0.0 {
            pts.reverse();
        }
        pts
    }

    /// Outward unit normal of a boundary piece.
    pub fn piece_normal(&self, piece: &BoundaryPiece) -> Point {
        self.parent_face(piece.skeleton).normal * piece.sign
    }

    /// Replaces the markers of boundary faces; `marker` sees the face loop,
    /// centroid and outward normal.
    pub fn remark_boundary<F>(&mut self, marker: F) -> Result<()>
    where
        F: Fn(&[usize], &Point, &Point) -> FaceMarker,
    {
        for face in self.faces.iter_mut().filter(|f| f.is_boundary()) {
            let m = marker(&face.vertices, &face.centroid, &face.normal);
            if m == FaceMarker::Interior {
                return Err(Error::Topology("boundary face marked interior".into()));
            }
            face.marker = m;
        }
        for class in [FaceMarker::Dirichlet, FaceMarker::Neumann] {
            if self.faces.iter().filter(|f| f.marker == class).count() == 1 {
                return Err(Error::Topology(format!("boundary part {class:?} must contain at least two faces")));
            }
        }
        Ok(())
    }

    /// Proper faces that contain some other mesh node in their relative
    /// interior (distance test with tolerance `1e-10 h_E`). Empty for a valid
    /// mesh.
    pub fn improper_faces(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a].x.total_cmp(&self.vertices[b].x));
        let xs: Vec<f64> = order.iter().map(|&v| self.vertices[v].x).collect();
        let mut bad = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            let tol = 1e-10 * face.diameter;
            let (lo, hi) = bbox(&self.vertices, &face.vertices);
            let start = xs.partition_point(|&x| x < lo.x - tol);
            let end = xs.partition_point(|&x| x <= hi.x + tol);
            for &v in &order[start..end] {
                if face.vertices.contains(&v) {
                    continue;
                }
                let p = self.vertices[v];
                if (0..3).any(|i| p[i] < lo[i] - tol || p[i] > hi[i] + tol) {
                    continue;
                }
                if point_in_face_interior(self.dim, &self.vertices, &face.vertices, &p, tol) {
                    bad.push(f);
                    break;
                }
            }
        }
        bad
    }
}

struct Builder {
    faces: Vec<Face>,
    keys: HashMap<Vec<usize>, usize>,
}

impl Builder {
    fn insert(&mut self, cell: usize, l: Vec<usize>) -> Result<usize> {
        let mut key = l.clone();
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Topology(format!("face {l:?} of cell {cell} repeats a vertex")));
        }
        if let Some(&f) = self.keys.get(&key) {
            let face = &mut self.faces[f];
            if face.cells.len() >= 2 || face.cells[0] == cell {
                return Err(Error::Topology(format!("face {l:?} is shared by more than two cells")));
            }
            face.cells.push(cell);
            return Ok(f);
        }
        let f = self.faces.len();
        self.keys.insert(key, f);
        self.faces.push(Face {
            vertices: l,
            cells: vec![cell],
            marker: FaceMarker::Interior,
            normal: Point::zeros(),
            measure: 0.0,
            diameter: 0.0,
            centroid: Point::zeros(),
            skeleton: Vec::new(),
        });
        Ok(f)
    }
}

fn face_loops(spec: &CellSpec) -> Vec<Vec<usize>> {
    match spec {
        CellSpec::Polygon(l) => (0..l.len()).map(|i| vec![l[i], l[(i + 1) % l.len()]]).collect(),
        CellSpec::Polyhedron(fs) => fs.clone(),
    }
}

fn cell_vertices(spec: &CellSpec) -> Vec<usize> {
    match spec {
        CellSpec::Polygon(l) => l.clone(),
        CellSpec::Polyhedron(fs) => {
            let mut out = Vec::new();
            for &v in fs.iter().flatten() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            out
        }
    }
}

pub(crate) fn signed_area(vertices: &[Point], l: &[usize]) -> f64 {
    let mut a = 0.0;
    for i in 0..l.len() {
        let p = vertices[l[i]];
        let q = vertices[l[(i + 1) % l.len()]];
        a += p.x * q.y - q.x * p.y;
    }
    0.5 * a
}

fn polygon_area_centroid(vertices: &[Point], l: &[usize]) -> (f64, Point) {
    let mut a = 0.0;
    let mut c = Point::zeros();
    // Shift to the first vertex to limit cancellation.
    let o = vertices[l[0]];
    for i in 0..l.len() {
        let p = vertices[l[i]] - o;
        let q = vertices[l[(i + 1) % l.len()]] - o;
        let cr = p.x * q.y - q.x * p.y;
        a += cr;
        c += (p + q) * cr;
    }
    let area = 0.5 * a;
    (area, o + c / (6.0 * area))
}

/// Volume and centroid from cones over fan-triangulated faces, with the apex
/// at the vertex average. Face orientation is taken from the apex side.
fn polyhedron_volume_centroid(vertices: &[Point], faces: &[Vec<usize>]) -> (f64, Point) {
    let all: Vec<usize> = faces.iter().flatten().copied().collect();
    let apex = all.iter().map(|&v| vertices[v]).sum::<Point>() / all.len() as f64;
    let mut vol = 0.0;
    let mut c = Point::zeros();
    for l in faces {
        let a = vertices[l[0]];
        for i in 1..l.len() - 1 {
            let b = vertices[l[i]];
            let d = vertices[l[i + 1]];
            let v = ((b - a).cross(&(d - a))).dot(&(a - apex)).abs() / 6.0;
            vol += v;
            c += (apex + a + b + d) * (v / 4.0);
        }
    }
    (vol, c / vol)
}

/// Measure, centroid and unit normal of a face. In 2D the normal is the
/// right-hand normal of the directed edge, which is outward for a
/// counterclockwise loop.
pub(crate) fn face_geometry(dim: usize, vertices: &[Point], l: &[usize]) -> (f64, Point, Point) {
    if dim == 2 {
        let a = vertices[l[0]];
        let b = vertices[l[1]];
        let t = b - a;
        let len = t.norm();
        (len, (a + b) * 0.5, Point::new(t.y, -t.x, 0.0) / len)
    } else {
        let a = vertices[l[0]];
        let mut area_vec = Point::zeros();
        let mut c = Point::zeros();
        let mut area = 0.0;
        for i in 1..l.len() - 1 {
            let b = vertices[l[i]];
            let d = vertices[l[i + 1]];
            let cr = (b - a).cross(&(d - a));
            let ar = 0.5 * cr.norm();
            area_vec += cr;
            area += ar;
            c += (a + b + d) * (ar / 3.0);
        }
        (area, c / area, area_vec.normalize())
    }
}

pub(crate) fn diameter_of(vertices: &[Point], ids: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            d = d.max((vertices[a] - vertices[b]).norm());
        }
    }
    d
}

fn bbox(vertices: &[Point], ids: &[usize]) -> (Point, Point) {
    let mut lo = Point::repeat(f64::INFINITY);
    let mut hi = Point::repeat(f64::NEG_INFINITY);
    for &v in ids {
        lo = lo.inf(&vertices[v]);
        hi = hi.sup(&vertices[v]);
    }
    (lo, hi)
}

fn point_in_face_interior(dim: usize, vertices: &[Point], l: &[usize], p: &Point, tol: f64) -> bool {
    if dim == 2 {
        let a = vertices[l[0]];
        let b = vertices[l[1]];
        let t = b - a;
        let len2 = t.norm_squared();
        let s = (p - a).dot(&t) / len2;
        let dist = ((p - a) - t * s).norm();
        dist <= tol && s > 0.0 && s < 1.0
    } else {
        let (_, _, n) = face_geometry(3, vertices, l);
        if (p - vertices[l[0]]).dot(&n).abs() > tol {
            return false;
        }
        // On the plane: inside or on the boundary of the loop (convex faces).
        let m = l.len();
        (0..m).all(|i| {
            let a = vertices[l[i]];
            let b = vertices[l[(i + 1) % m]];
            (b - a).cross(&(p - a)).dot(&n) >= -tol * (b - a).norm()
        })
    }
}
