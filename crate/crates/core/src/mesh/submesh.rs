use super::{Face, Mesh, Point, SkeletonFace};
use crate::error::{Error, Result};

/// Splits every face into skeleton simplices. Edges are kept as they are;
/// polygonal 3D faces are fanned from their lowest-id vertex.
pub(super) fn build_skeleton(dim: usize, vertices: &[Point], faces: &mut [Face]) -> Result<Vec<SkeletonFace>> {
    let mut out = Vec::new();
    for (f, face) in faces.iter_mut().enumerate() {
        let l = &face.vertices;
        if dim == 2 || l.len() == 3 {
            face.skeleton = vec![out.len()];
            out.push(SkeletonFace { vertices: l.clone(), parent: f, measure: face.measure });
            continue;
        }
        let start = (0..l.len()).min_by_key(|&i| l[i]).unwrap();
        let rot: Vec<usize> = (0..l.len()).map(|i| l[(start + i) % l.len()]).collect();
        for i in 1..rot.len() - 1 {
            let tri = vec![rot[0], rot[i], rot[i + 1]];
            let a = vertices[tri[0]];
            let area = 0.5 * (vertices[tri[1]] - a).cross(&(vertices[tri[2]] - a)).norm();
            if area <= 1e-12 * face.diameter * face.diameter {
                return Err(Error::Topology(format!("face {:?} cannot be fanned from vertex {}", l, rot[0])));
            }
            face.skeleton.push(out.len());
            out.push(SkeletonFace { vertices: tri, parent: f, measure: area });
        }
    }
    Ok(out)
}

/// Chooses `M_T` for every cell and builds the simplices of `w(T)`.
pub(super) fn build_submesh(mesh: &mut Mesh) -> Result<()> {
    let dim = mesh.dim;
    for c in 0..mesh.cells.len() {
        let cell = &mesh.cells[c];
        let h = cell.diameter;
        let pts: Vec<Point> = cell.vertices.iter().map(|&v| mesh.vertices[v]).collect();
        let is_simplex = pts.len() == dim + 1 && cell.faces.len() == dim + 1;
        let center = if dim == 2 && !is_simplex && !is_convex(&pts, h) {
            chebyshev_center(&pts, h).ok_or(Error::NonStarShaped { cell: c })?
        } else {
            cell.centroid
        };
        let mut simplices = Vec::new();
        if is_simplex {
            let mut s = pts.clone();
            if dim == 3 {
                let vol = (s[1] - s[0]).cross(&(s[2] - s[0])).dot(&(s[3] - s[0]));
                if vol < 0.0 {
                    s.swap(2, 3);
                }
            }
            simplices.push(s);
        } else {
            for piece in &cell.boundary {
                let q = mesh.oriented_piece(piece);
                let ok = if dim == 2 {
                    let a = q[0] - center;
                    let b = q[1] - center;
                    a.x * b.y - a.y * b.x > 1e-12 * h * h
                } else {
                    let n = (q[1] - q[0]).cross(&(q[2] - q[0]));
                    (q[0] - center).dot(&n) > 1e-12 * h * h * h
                };
                if !ok {
                    return Err(Error::NonStarShaped { cell: c });
                }
                let mut s = vec![center];
                s.extend(q);
                simplices.push(s);
            }
        }
        let cell = &mut mesh.cells[c];
        cell.star_center = center;
        cell.subsimplices = simplices;
    }
    Ok(())
}

fn is_convex(pts: &[Point], h: f64) -> bool {
    let m = pts.len();
    (0..m).all(|i| {
        let a = pts[i];
        let b = pts[(i + 1) % m];
        let c = pts[(i + 2) % m];
        let u = b - a;
        let v = c - b;
        u.x * v.y - u.y * v.x >= -1e-12 * h * h
    })
}

/// Center of the largest disc inside the kernel of a counterclockwise
/// polygon, found by bisection on the radius. `None` if the kernel is empty.
pub(crate) fn chebyshev_center(pts: &[Point], h: f64) -> Option<Point> {
    let m = pts.len();
    let planes: Vec<(Point, f64)> = (0..m)
        .map(|i| {
            let a = pts[i];
            let t = pts[(i + 1) % m] - a;
            let n = Point::new(t.y, -t.x, 0.0).normalize();
            (n, n.dot(&a))
        })
        .collect();
    let feasible = |r: f64| -> Option<Vec<Point>> {
        let lo = pts.iter().fold(Point::repeat(f64::INFINITY), |acc, p| acc.inf(p));
        let hi = pts.iter().fold(Point::repeat(f64::NEG_INFINITY), |acc, p| acc.sup(p));
        let mut poly = vec![
            Point::new(lo.x, lo.y, 0.0),
            Point::new(hi.x, lo.y, 0.0),
            Point::new(hi.x, hi.y, 0.0),
            Point::new(lo.x, hi.y, 0.0),
        ];
        for (n, off) in &planes {
            poly = clip(&poly, n, off - r);
            if poly.len() < 3 {
                return None;
            }
        }
        Some(poly)
    };
    let (mut lo, mut hi) = (0.0, h);
    let mut best = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Some(p) => {
                lo = mid;
                best = Some(p);
            }
            None => hi = mid,
        }
    }
    if lo <= 1e-10 * h {
        return None;
    }
    best.map(|p| p.iter().sum::<Point>() / p.len() as f64)
}

/// Keeps the part of a convex polygon with `n . x <= off`.
fn clip(poly: &[Point], n: &Point, off: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let dp = n.dot(&p) - off;
        let dq = n.dot(&q) - off;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            out.push(p + (q - p) * (dp / (dp - dq)));
        }
    }
    out
}
