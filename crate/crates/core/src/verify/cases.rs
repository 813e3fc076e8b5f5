use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::assembly::{ElasticityProblem, LameParameters};
use crate::mesh::Point;

/// One-dimensional factor of a separable term, with its first two
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    One,
    /// `sin(w t)`.
    Sin(f64),
    /// `cos(w t)`.
    Cos(f64),
    /// `sum_i c_i t^i`.
    Poly(Vec<f64>),
}

impl Factor {
    /// Value, first and second derivative at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        match self {
            Factor::One => [1.0, 0.0, 0.0],
            Factor::Sin(w) => {
                let (s, c) = (w * t).sin_cos();
                [s, w * c, -w * w * s]
            }
            Factor::Cos(w) => {
                let (s, c) = (w * t).sin_cos();
                [c, -w * s, -w * w * c]
            }
            Factor::Poly(c) => {
                let mut v = [0.0; 3];
                for &ci in c.iter().rev() {
                    v[2] = v[2] * t + 2.0 * v[1];
                    v[1] = v[1] * t + v[0];
                    v[0] = v[0] * t + ci;
                }
                v
            }
        }
    }
}

/// `coef * f_x(x) f_y(y) f_z(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub factors: [Factor; 3],
}

impl Term {
    pub fn new(coef: f64, fx: Factor, fy: Factor, fz: Factor) -> Self {
        Term { coef, factors: [fx, fy, fz] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// Unit square, `mu = 1`, homogeneous Dirichlet data.
    #[serde(rename = "2d")]
    Case2d,
    /// Unit cube, `mu = 0.5`, homogeneous Dirichlet data.
    #[serde(rename = "3d")]
    Case3d,
}

impl CaseId {
    pub fn dim(self) -> usize {
        match self {
            CaseId::Case2d => 2,
            CaseId::Case3d => 3,
        }
    }

    pub fn default_mu(self) -> f64 {
        match self {
            CaseId::Case2d => 1.0,
            CaseId::Case3d => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case2d => "2d",
            CaseId::Case3d => "3d",
        }
    }
}

impl std::str::FromStr for CaseId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "2d" | "case2d" => Ok(CaseId::Case2d),
            "3d" | "case3d" => Ok(CaseId::Case3d),
            other => Err(format!("unknown case `{other}` (expected 2d or 3d)")),
        }
    }
}

/// A closed-form displacement field with its stress and body force.
#[derive(Clone, Debug, PartialEq)]
pub struct ManufacturedCase {
    pub id: CaseId,
    pub dim: usize,
    pub lame: LameParameters,
    /// Separable terms of each displacement component.
    pub terms: Vec<Vec<Term>>,
}

impl ManufacturedCase {
    pub fn new(id: CaseId, lame: LameParameters) -> Self {
        let terms = match id {
            CaseId::Case2d => {
                let l = 1.0 / (1.0 + lame.lambda);
                let w = 2.0 * PI;
                let one = || Factor::One;
                vec![
                    vec![
                        Term::new(1.0, Factor::Cos(w), Factor::Sin(w), one()),
                        Term::new(-1.0, one(), Factor::Sin(w), one()),
                        Term::new(l, Factor::Sin(PI), Factor::Sin(PI), one()),
                    ],
                    vec![
                        Term::new(1.0, Factor::Sin(w), one(), one()),
                        Term::new(-1.0, Factor::Sin(w), Factor::Cos(w), one()),
                        Term::new(l, Factor::Sin(PI), Factor::Sin(PI), one()),
                    ],
                ]
            }
            CaseId::Case3d => {
                // g(t) = 2t^3 - 3t^2 + t, G(t) = (t - t^2)^2.
                let g = || Factor::Poly(vec![0.0, 1.0, -3.0, 2.0]);
                let big = || Factor::Poly(vec![0.0, 0.0, 1.0, -2.0, 1.0]);
                vec![
                    vec![Term::new(200.0, big(), g(), g())],
                    vec![Term::new(-100.0, g(), big(), g())],
                    vec![Term::new(-100.0, g(), g(), big())],
                ]
            }
        };
        ManufacturedCase { id, dim: id.dim(), lame, terms }
    }

    /// The case with its default shear modulus.
    pub fn with_lambda(id: CaseId, lambda: f64) -> Self {
        Self::new(id, LameParameters { mu: id.default_mu(), lambda })
    }

    /// Value, gradient and Hessian of component `c`.
    fn jet(&self, c: usize, p: &Point) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let mut v = 0.0;
        let mut g = [0.0; 3];
        let mut h = [[0.0; 3]; 3];
        for t in &self.terms[c] {
            let e: Vec<[f64; 3]> = (0..3).map(|i| t.factors[i].eval(p[i])).collect();
            let prod = |ord: [usize; 3]| t.coef * e[0][ord[0]] * e[1][ord[1]] * e[2][ord[2]];
            v += prod([0, 0, 0]);
            for a in 0..3 {
                let mut o = [0; 3];
                o[a] = 1;
                g[a] += prod(o);
                for b in 0..3 {
                    let mut o = [0; 3];
                    o[a] += 1;
                    o[b] += 1;
                    h[a][b] += prod(o);
                }
            }
        }
        (v, g, h)
    }

    pub fn displacement(&self, p: &Point) -> Point {
        let mut u = Point::zeros();
        for c in 0..self.dim {
            u[c] = self.jet(c, p).0;
        }
        u
    }

    /// `grad u` with entry `(i, j) = d u_i / d x_j`.
    pub fn gradient(&self, p: &Point) -> Matrix3<f64> {
        let mut g = Matrix3::zeros();
        for c in 0..self.dim {
            let (_, gc, _) = self.jet(c, p);
            for j in 0..self.dim {
                g[(c, j)] = gc[j];
            }
        }
        g
    }

    pub fn stress(&self, p: &Point) -> Matrix3<f64> {
        let g = self.gradient(p);
        self.lame.stiffness(self.dim, &((g + g.transpose()) * 0.5))
    }

    /// `f = div sigma`.
    pub fn body_force(&self, p: &Point) -> Point {
        let d = self.dim;
        let (mu, lambda) = (self.lame.mu, self.lame.lambda);
        let hs: Vec<[[f64; 3]; 3]> = (0..d).map(|c| self.jet(c, p).2).collect();
        let mut f = Point::zeros();
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..d {
                s += mu * (hs[i][j][j] + hs[j][i][j]);
            }
            let grad_div: f64 = (0..d).map(|j| hs[j][j][i]).sum();
            f[i] = s + lambda * grad_div;
        }
        f
    }

    /// Elasticity problem with `g_D = u` and `g_N = sigma n`.
    pub fn problem(&self) -> ElasticityProblem {
        let me = Arc::new(self.clone());
        let (a, b, c) = (me.clone(), me.clone(), me);
        ElasticityProblem {
            lame: self.lame,
            body_force: Box::new(move |p| a.body_force(p)),
            dirichlet: Box::new(move |p| b.displacement(p)),
            neumann: Box::new(move |p, n| c.stress(p) * n),
        }
    }
}
