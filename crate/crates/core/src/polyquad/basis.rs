use crate::mesh::Point;

/// Number of monomials of total degree at most `deg` in `dim` variables.
pub fn poly_dim(dim: usize, deg: usize) -> usize {
    match dim {
        0 => 1,
        1 => deg + 1,
        2 => (deg + 1) * (deg + 2) / 2,
        _ => (deg + 1) * (deg + 2) * (deg + 3) / 6,
    }
}

/// Exponents of all monomials of degree at most `deg`, grouped by total
/// degree. Lower-degree bases are prefixes of higher-degree ones.
pub fn monomial_exponents(dim: usize, deg: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(poly_dim(dim, deg));
    for t in 0..=deg as u32 {
        match dim {
            0 => {
                if t == 0 {
                    out.push([0, 0, 0]);
                }
            }
            1 => out.push([t, 0, 0]),
            2 => (0..=t).rev().for_each(|a| out.push([a, t - a, 0])),
            _ => {
                for a in (0..=t).rev() {
                    for b in (0..=t - a).rev() {
                        out.push([a, b, t - a - b]);
                    }
                }
            }
        }
    }
    out
}

/// Scaled monomials `((x - c) / h)^alpha` on a cell.
#[derive(Clone, Debug)]
pub struct CellBasis {
    pub dim: usize,
    pub degree: usize,
    pub center: Point,
    pub h: f64,
    pub exps: Vec<[u32; 3]>,
}

impl CellBasis {
    pub fn new(dim: usize, degree: usize, center: Point, h: f64) -> Self {
        CellBasis { dim, degree, center, h, exps: monomial_exponents(dim, degree) }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    fn powers(&self, p: &Point) -> [[f64; 8]; 3] {
        let mut pw = [[1.0; 8]; 3];
        let x = (p - self.center) / self.h;
        for i in 0..self.dim {
            for e in 1..=self.degree.min(7) {
                pw[i][e] = pw[i][e - 1] * x[i];
            }
        }
        pw
    }

    pub fn eval(&self, p: &Point) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(p, &mut out);
        out
    }

    pub fn eval_into(&self, p: &Point, out: &mut [f64]) {
        assert!(self.degree <= 7, "basis degree above 7 is not supported");
        let pw = self.powers(p);
        for (o, e) in out.iter_mut().zip(&self.exps) {
            *o = pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize];
        }
    }

    /// Gradients of all basis functions; `out[m][b]` is `d phi_m / d x_b`.
    pub fn grad_into(&self, p: &Point, out: &mut [[f64; 3]]) {
        let pw = self.powers(p);
        for (o, e) in out.iter_mut().zip(&self.exps) {
            for b in 0..3 {
                if e[b] == 0 {
                    o[b] = 0.0;
                    continue;
                }
                let mut v = e[b] as f64 / self.h;
                for a in 0..3 {
                    let ea = e[a] as usize;
                    v *= if a == b { pw[a][ea - 1] } else { pw[a][ea] };
                }
                o[b] = v;
            }
        }
    }

    pub fn grad(&self, p: &Point) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; self.len()];
        self.grad_into(p, &mut out);
        out
    }
}

/// Scaled monomials in local coordinates of a face (edge or triangle).
///
/// Edges use the arclength from their lower-id vertex. Triangles use an
/// orthonormal frame built by Gram-Schmidt from the two edges leaving the
/// lowest-id vertex.
#[derive(Clone, Debug)]
pub struct FaceBasis {
    pub degree: usize,
    pub origin: Point,
    pub axes: [Point; 2],
    pub h: f64,
    pub exps: Vec<[u32; 3]>,
    face_dim: usize,
}

impl FaceBasis {
    /// `ids` and `pts` are the vertex ids and coordinates of the face simplex.
    pub fn new(degree: usize, ids: &[usize], pts: &[Point]) -> Self {
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by_key(|&i| ids[i]);
        let origin = pts[order[0]];
        let face_dim = pts.len() - 1;
        let mut h: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                h = h.max((pts[i] - pts[j]).norm());
            }
        }
        let e1 = (pts[order[1]] - origin).normalize();
        let e2 = if face_dim == 2 {
            let v = pts[order[2]] - origin;
            (v - e1 * e1.dot(&v)).normalize()
        } else {
            Point::zeros()
        };
        FaceBasis { degree, origin, axes: [e1, e2], h, exps: monomial_exponents(face_dim, degree), face_dim }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Local scaled coordinates of a point on the face.
    pub fn local(&self, p: &Point) -> [f64; 2] {
        let r = p - self.origin;
        [r.dot(&self.axes[0]) / self.h, r.dot(&self.axes[1]) / self.h]
    }

    pub fn eval_into(&self, p: &Point, out: &mut [f64]) {
        let s = self.local(p);
        let mut pw = [[1.0; 8]; 2];
        for i in 0..self.face_dim {
            for e in 1..=self.degree.min(7) {
                pw[i][e] = pw[i][e - 1] * s[i];
            }
        }
        for (o, e) in out.iter_mut().zip(&self.exps) {
            *o = pw[0][e[0] as usize] * pw[1][e[1] as usize];
        }
    }

    pub fn eval(&self, p: &Point) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(p, &mut out);
        out
    }
}
