use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Highest polynomial order the simplex rules are built for.
pub const MAX_ORDER: usize = 40;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * p - pm) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// A rule on the reference simplex in barycentric form; weights sum to one.
#[derive(Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub order: usize,
    pub bary: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

type Cache = Mutex<HashMap<(usize, usize), Arc<SimplexRule>>>;

/// Collapsed tensor-product Gauss rule of the given order on the reference
/// `dim`-simplex (`dim` in 1..=3). Rules are built once and shared.
pub fn simplex_rule(dim: usize, order: usize) -> Result<Arc<SimplexRule>> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!("no simplex rule in dimension {dim}")));
    }
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&(dim, order)) {
        return Ok(r.clone());
    }
    let rule = Arc::new(build_rule(dim, order));
    cache.lock().unwrap().insert((dim, order), rule.clone());
    Ok(rule)
}

fn build_rule(dim: usize, order: usize) -> SimplexRule {
    let mut bary = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            let (x, w) = gauss_legendre(order / 2 + 1);
            for (t, wt) in x.iter().zip(&w) {
                bary.push([1.0 - t, *t, 0.0, 0.0]);
                weights.push(*wt);
            }
        }
        2 => {
            // x = u, y = v (1 - u), Jacobian 1 - u.
            let (x, w) = gauss_legendre((order + 2).div_ceil(2));
            for (u, wu) in x.iter().zip(&w) {
                for (v, wv) in x.iter().zip(&w) {
                    let (a, b) = (*u, v * (1.0 - u));
                    bary.push([1.0 - a - b, a, b, 0.0]);
                    weights.push(2.0 * wu * wv * (1.0 - u));
                }
            }
        }
        _ => {
            // x = u, y = v (1 - u), z = s (1 - u)(1 - v), Jacobian (1 - u)^2 (1 - v).
            let (x, w) = gauss_legendre((order + 3).div_ceil(2));
            for (u, wu) in x.iter().zip(&w) {
                for (v, wv) in x.iter().zip(&w) {
                    for (s, ws) in x.iter().zip(&w) {
                        let a = *u;
                        let b = v * (1.0 - u);
                        let c = s * (1.0 - u) * (1.0 - v);
                        bary.push([1.0 - a - b - c, a, b, c]);
                        weights.push(6.0 * wu * wv * ws * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
        }
    }
    SimplexRule { dim, order, bary, weights }
}

/// Quadrature points and weights in physical coordinates.
#[derive(Clone, Debug, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Appends `rule` mapped onto the simplex with the given corners.
    pub fn push_simplex(&mut self, rule: &SimplexRule, corners: &[Point]) {
        let vol = simplex_measure(corners);
        for (b, w) in rule.bary.iter().zip(&rule.weights) {
            let mut p = Point::zeros();
            for (i, c) in corners.iter().enumerate() {
                p += c * b[i];
            }
            self.points.push(p);
            self.weights.push(w * vol);
        }
    }

    /// Rule of the given order on one simplex.
    pub fn on_simplex(corners: &[Point], order: usize) -> Result<Self> {
        let rule = simplex_rule(corners.len() - 1, order)?;
        let mut q = QuadratureRule::default();
        q.push_simplex(&rule, corners);
        Ok(q)
    }

    /// Concatenated rules over a list of simplices of equal dimension.
    pub fn on_simplices(simplices: &[Vec<Point>], order: usize) -> Result<Self> {
        let mut q = QuadratureRule::default();
        if let Some(first) = simplices.first() {
            let rule = simplex_rule(first.len() - 1, order)?;
            for s in simplices {
                q.push_simplex(&rule, s);
            }
        }
        Ok(q)
    }
}

/// Unsigned measure of a simplex given by its corners (segment, triangle or
/// tetrahedron embedded in 3D).
pub fn simplex_measure(c: &[Point]) -> f64 {
    match c.len() {
        2 => (c[1] - c[0]).norm(),
        3 => 0.5 * (c[1] - c[0]).cross(&(c[2] - c[0])).norm(),
        4 => (c[1] - c[0]).cross(&(c[2] - c[0])).dot(&(c[3] - c[0])).abs() / 6.0,
        _ => 0.0,
    }
}
