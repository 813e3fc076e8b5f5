/// Equispaced Lagrange basis of degree `r` on a simplex, in barycentric
/// coordinates.
///
/// Node `beta` (a multi-index with `|beta| = r` over the `n + 1` corners) sits
/// at barycentric point `beta / r`, and its shape function is
/// `prod_i prod_{j < beta_i} (r lambda_i - j) / (j + 1)`.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    pub degree: usize,
    /// Number of corners of the simplex.
    pub corners: usize,
    pub nodes: Vec<Vec<u32>>,
}

impl LagrangeBasis {
    pub fn new(corners: usize, degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange basis needs degree >= 1");
        let mut nodes = Vec::new();
        let mut beta = vec![0u32; corners];
        fill(&mut nodes, &mut beta, 0, degree as u32);
        LagrangeBasis { degree, corners, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn eval_into(&self, bary: &[f64], out: &mut [f64]) {
        let r = self.degree as f64;
        for (o, beta) in out.iter_mut().zip(&self.nodes) {
            let mut v = 1.0;
            for (i, &b) in beta.iter().enumerate() {
                for j in 0..b {
                    v *= (r * bary[i] - j as f64) / (j + 1) as f64;
                }
            }
            *o = v;
        }
    }

    pub fn eval(&self, bary: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(bary, &mut out);
        out
    }

    /// Barycentric coordinates of node `i`.
    pub fn node_bary(&self, i: usize) -> Vec<f64> {
        self.nodes[i].iter().map(|&b| b as f64 / self.degree as f64).collect()
    }

    /// Global identity of node `i` on a simplex with the given vertex ids:
    /// the sorted list of `(vertex, beta)` pairs with `beta > 0`. Nodes on a
    /// shared sub-simplex get the same key from every simplex containing it.
    pub fn node_key(&self, i: usize, vertex_ids: &[usize]) -> Vec<(usize, u32)> {
        let mut key: Vec<(usize, u32)> =
            self.nodes[i].iter().zip(vertex_ids).filter(|(b, _)| **b > 0).map(|(b, v)| (*v, *b)).collect();
        key.sort_unstable();
        key
    }
}

fn fill(out: &mut Vec<Vec<u32>>, beta: &mut Vec<u32>, i: usize, left: u32) {
    if i + 1 == beta.len() {
        beta[i] = left;
        out.push(beta.clone());
        return;
    }
    for b in (0..=left).rev() {
        beta[i] = b;
        fill(out, beta, i + 1, left - b);
    }
}
