use std::collections::HashMap;

use crate::mesh::{FaceMarker, Mesh, Point};
use crate::polyquad::{poly_dim, LagrangeBasis};

/// Numbering of the discrete unknowns.
///
/// Per cell: symmetric `P_k` stress (`d(d+1)/2` tensor components times the
/// scalar basis) and `[P_{k+1}]^d` displacement. On the skeleton: continuous
/// `P_{k+1}` displacement traces with `d` components per Lagrange node, and
/// when `k + 1 < d` a scalar continuous `P_1` trace of the stress trace on
/// the interior skeleton.
///
/// Stress-trace nodes are numbered at every skeleton vertex. Vertices that
/// touch no interior face (such as a corner cut by no diagonal) enter no form;
/// they are counted but held at zero, like Dirichlet displacement dofs.
///
/// Skeleton dof numbering: displacement dof `node * d + a`, then stress-trace
/// dof `d * n_trace_nodes + t`.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub dim: usize,
    pub k: usize,
    /// Number of symmetric tensor components, `d(d+1)/2`.
    pub n_tensor: usize,
    /// Scalar `P_k` basis size.
    pub n_stress_scalar: usize,
    /// Scalar `P_{k+1}` basis size.
    pub n_disp_scalar: usize,
    /// Coordinates of the displacement-trace Lagrange nodes.
    pub trace_nodes: Vec<Point>,
    /// Displacement-trace nodes of each skeleton simplex, in the order of
    /// [`DofMap::trace_basis`] on that simplex's vertex list.
    pub skeleton_nodes: Vec<Vec<usize>>,
    /// Whether each trace node lies on a Dirichlet face.
    pub dirichlet: Vec<bool>,
    /// Mesh vertex carrying each stress-trace node.
    pub stress_trace_vertices: Vec<usize>,
    /// Whether each stress-trace node lies on an interior skeleton face.
    pub stress_trace_active: Vec<bool>,
    /// Stress-trace nodes of each interior skeleton simplex (vertex order).
    pub skeleton_stress_nodes: Vec<Option<Vec<usize>>>,
    pub trace_basis: LagrangeBasis,
}

impl DofMap {
    pub fn new(mesh: &Mesh, k: usize) -> Self {
        let d = mesh.dim();
        let trace_basis = LagrangeBasis::new(d, k + 1);
        let mut keys: HashMap<Vec<(usize, u32)>, usize> = HashMap::new();
        let mut trace_nodes = Vec::new();
        let mut dirichlet = Vec::new();
        let mut skeleton_nodes = Vec::with_capacity(mesh.skeleton().len());
        for s in mesh.skeleton() {
            let on_dirichlet = mesh.faces()[s.parent].marker == FaceMarker::Dirichlet;
            let mut ids = Vec::with_capacity(trace_basis.len());
            for i in 0..trace_basis.len() {
                let key = trace_basis.node_key(i, &s.vertices);
                let id = *keys.entry(key).or_insert_with(|| {
                    let bary = trace_basis.node_bary(i);
                    let p = s.vertices.iter().zip(&bary).map(|(&v, b)| mesh.vertices()[v] * *b).sum::<Point>();
                    trace_nodes.push(p);
                    dirichlet.push(false);
                    trace_nodes.len() - 1
                });
                if on_dirichlet {
                    dirichlet[id] = true;
                }
                ids.push(id);
            }
            skeleton_nodes.push(ids);
        }

        let mut stress_trace_vertices = Vec::new();
        let mut stress_trace_active = Vec::new();
        let mut skeleton_stress_nodes = vec![None; mesh.skeleton().len()];
        if k + 1 < d {
            let mut index: Vec<Option<usize>> = vec![None; mesh.vertices().len()];
            for (sid, s) in mesh.skeleton().iter().enumerate() {
                if mesh.faces()[s.parent].is_boundary() {
                    continue;
                }
                let ids = s
                    .vertices
                    .iter()
                    .map(|&v| {
                        *index[v].get_or_insert_with(|| {
                            stress_trace_vertices.push(v);
                            stress_trace_vertices.len() - 1
                        })
                    })
                    .collect();
                skeleton_stress_nodes[sid] = Some(ids);
            }
            let n_active = stress_trace_vertices.len();
            for s in mesh.skeleton() {
                for &v in &s.vertices {
                    index[v].get_or_insert_with(|| {
                        stress_trace_vertices.push(v);
                        stress_trace_vertices.len() - 1
                    });
                }
            }
            stress_trace_active = (0..stress_trace_vertices.len()).map(|t| t < n_active).collect();
        }

        DofMap {
            dim: d,
            k,
            n_tensor: d * (d + 1) / 2,
            n_stress_scalar: poly_dim(d, k),
            n_disp_scalar: poly_dim(d, k + 1),
            trace_nodes,
            skeleton_nodes,
            dirichlet,
            stress_trace_vertices,
            stress_trace_active,
            skeleton_stress_nodes,
            trace_basis,
        }
    }

    pub fn has_stress_trace(&self) -> bool {
        self.k + 1 < self.dim
    }

    pub fn n_trace_nodes(&self) -> usize {
        self.trace_nodes.len()
    }

    pub fn n_stress_trace(&self) -> usize {
        self.stress_trace_vertices.len()
    }

    /// Stress unknowns per cell.
    pub fn n_stress_local(&self) -> usize {
        self.n_tensor * self.n_stress_scalar
    }

    /// Displacement unknowns per cell.
    pub fn n_disp_local(&self) -> usize {
        self.dim * self.n_disp_scalar
    }

    /// All skeleton unknowns, Dirichlet ones included.
    pub fn n_skeleton_dofs(&self) -> usize {
        self.dim * self.n_trace_nodes() + self.n_stress_trace()
    }

    pub fn displacement_dof(&self, node: usize, component: usize) -> usize {
        node * self.dim + component
    }

    pub fn stress_trace_dof(&self, t: usize) -> usize {
        self.dim * self.n_trace_nodes() + t
    }

    /// Whether a skeleton dof is fixed: a displacement dof on a Dirichlet
    /// node or a stress-trace dof off the interior skeleton.
    pub fn is_fixed(&self, dof: usize) -> bool {
        let nd = self.dim * self.n_trace_nodes();
        if dof < nd {
            self.dirichlet[dof / self.dim]
        } else {
            !self.stress_trace_active[dof - nd]
        }
    }

    pub fn n_dirichlet_nodes(&self) -> usize {
        self.dirichlet.iter().filter(|&&b| b).count()
    }

    /// Interior unknowns of the whole mesh.
    pub fn n_interior_dofs(&self, n_cells: usize) -> usize {
        n_cells * (self.n_stress_local() + self.n_disp_local())
    }
}
