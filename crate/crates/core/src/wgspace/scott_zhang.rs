use nalgebra::{DMatrix, DVector};

use super::DofMap;
use crate::error::{Error, Result};
use crate::mesh::{FaceMarker, Mesh, Point};
use crate::polyquad::{simplex_measure, simplex_rule};

/// Nodal values of a scalar skeleton function; `defined[i]` marks nodes that
/// carry a value.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonFunction {
    pub values: Vec<f64>,
    pub defined: Vec<bool>,
}

/// Per-face data of the Lagrange trace space on a Dirichlet skeleton simplex.
struct DirichletFace {
    skeleton: usize,
    nodes: Vec<usize>,
    /// `<phi_l, 1>_F`.
    integrals: Vec<f64>,
    /// Nodal values of the L2 projection of `g` onto `P_{k+1}(F)`.
    projection: DVector<f64>,
    /// `<g, 1>_F`.
    mean: f64,
}

/// The boundary restriction of the mean-preserving Scott-Zhang interpolant
/// of degree `k + 1` on the Dirichlet skeleton.
///
/// Every node takes the dual-basis value of the lowest-id Dirichlet face that
/// contains it. One node per face (when faces have interior nodes) or one
/// node per vertex patch (otherwise) is then reset so that
/// `<I g, 1>_{Gamma_D} = <g, 1>_{Gamma_D}`.
pub fn scott_zhang_boundary(mesh: &Mesh, dofs: &DofMap, g: impl Fn(&Point) -> f64) -> Result<SkeletonFunction> {
    let d = mesh.dim();
    let order = 2 * (dofs.k + 2) + 4;
    let rule = simplex_rule(d - 1, order)?;
    let basis = &dofs.trace_basis;
    let nb = basis.len();

    let mut faces = Vec::new();
    for (sid, s) in mesh.skeleton().iter().enumerate() {
        if mesh.faces()[s.parent].marker != FaceMarker::Dirichlet {
            continue;
        }
        let pts: Vec<Point> = s.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
        let vol = simplex_measure(&pts);
        let mut mass = DMatrix::zeros(nb, nb);
        let mut moments = DVector::zeros(nb);
        let mut integrals = vec![0.0; nb];
        let mut mean = 0.0;
        let mut phi = vec![0.0; nb];
        for (b, w) in rule.bary.iter().zip(&rule.weights) {
            let w = w * vol;
            let p = pts.iter().enumerate().map(|(i, c)| c * b[i]).sum::<Point>();
            basis.eval_into(&b[..d], &mut phi);
            let gv = g(&p);
            mean += w * gv;
            for i in 0..nb {
                integrals[i] += w * phi[i];
                moments[i] += w * gv * phi[i];
                for j in 0..nb {
                    mass[(i, j)] += w * phi[i] * phi[j];
                }
            }
        }
        let projection =
            mass.cholesky().ok_or_else(|| Error::SingularMass(format!("Dirichlet face {sid}")))?.solve(&moments);
        faces.push(DirichletFace {
            skeleton: sid,
            nodes: dofs.skeleton_nodes[sid].clone(),
            integrals,
            projection,
            mean,
        });
    }
    if faces.is_empty() {
        return Err(Error::EmptyDirichlet);
    }

    let n = dofs.n_trace_nodes();
    let mut values = vec![0.0; n];
    let mut defined = vec![false; n];
    // Faces are in increasing skeleton id, so the first face to reach a node
    // is the lowest-id one containing it.
    for f in &faces {
        for (l, &node) in f.nodes.iter().enumerate() {
            if !defined[node] {
                defined[node] = true;
                values[node] = f.projection[l];
            }
        }
    }

    for (center, patch) in mean_patches(dofs, &faces)? {
        let mut target = 0.0;
        let mut weight = 0.0;
        for &fi in &patch {
            let f = &faces[fi];
            target += f.mean;
            for (l, &node) in f.nodes.iter().enumerate() {
                if node == center {
                    weight += f.integrals[l];
                } else {
                    target -= values[node] * f.integrals[l];
                }
            }
        }
        values[center] = target / weight;
    }
    Ok(SkeletonFunction { values, defined })
}

/// Chooses the nodes whose values are reset for mean preservation, each with
/// the set of faces (indices into `faces`) whose mean it restores.
fn mean_patches(dofs: &DofMap, faces: &[DirichletFace]) -> Result<Vec<(usize, Vec<usize>)>> {
    let basis = &dofs.trace_basis;
    let d = dofs.dim;
    let interior_node = |l: usize| basis.nodes[l].iter().all(|&b| b > 0);

    if dofs.k + 1 >= d {
        // Every face has interior nodes: use the one with the largest mean.
        return Ok(faces
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                let mut best = None;
                for l in (0..f.nodes.len()).filter(|&l| interior_node(l)) {
                    if best.is_none_or(|b: usize| f.integrals[l].abs() > f.integrals[b].abs()) {
                        best = Some(l);
                    }
                }
                (f.nodes[best.expect("face without interior node")], vec![fi])
            })
            .collect());
    }

    // Candidate centers: vertices, or edge midpoints for quadratic traces
    // on triangles.
    let candidate = |l: usize| {
        let nonzero = basis.nodes[l].iter().filter(|&&b| b > 0).count();
        if dofs.k + 1 == 2 {
            nonzero == 2
        } else {
            nonzero == 1
        }
    };
    let n = dofs.n_trace_nodes();
    let mut star: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut is_candidate = vec![false; n];
    for (fi, f) in faces.iter().enumerate() {
        for (l, &node) in f.nodes.iter().enumerate() {
            star[node].push(fi);
            if candidate(l) {
                is_candidate[node] = true;
            }
        }
    }
    let mut owner: Vec<Option<usize>> = vec![None; faces.len()];
    let mut patches: Vec<(usize, Vec<usize>)> = Vec::new();
    for node in (0..n).filter(|&v| is_candidate[v]) {
        if star[node].iter().all(|&fi| owner[fi].is_none()) {
            for &fi in &star[node] {
                owner[fi] = Some(patches.len());
            }
            patches.push((node, star[node].clone()));
        }
    }

    // Faces left over join a neighbouring patch; they hold no center, so the
    // patch mean stays controlled by its center alone.
    let vertex_nodes: Vec<Vec<usize>> = faces
        .iter()
        .map(|f| {
            f.nodes
                .iter()
                .enumerate()
                .filter(|(l, _)| basis.nodes[*l].iter().any(|&b| b as usize == dofs.k + 1))
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    loop {
        let mut changed = false;
        let mut remaining = false;
        for fi in 0..faces.len() {
            if owner[fi].is_some() {
                continue;
            }
            let neighbour = vertex_nodes[fi].iter().flat_map(|&v| star[v].iter()).find_map(|&fj| owner[fj]);
            match neighbour {
                Some(p) => {
                    owner[fi] = Some(p);
                    patches[p].1.push(fi);
                    changed = true;
                }
                None => remaining = true,
            }
        }
        if !remaining {
            break;
        }
        if !changed {
            let f = faces.iter().zip(&owner).find(|(_, o)| o.is_none()).map(|(f, _)| f.skeleton);
            return Err(Error::InvalidInput(format!(
                "Dirichlet skeleton face {f:?} cannot be attached to a mean-preserving patch"
            )));
        }
    }
    Ok(patches)
}
