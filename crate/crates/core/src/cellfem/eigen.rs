//! First positive eigenvalue of the free-membrane problem on the matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::assembly::Forms;
use super::linalg::{dot, matvec, pcg, submatrix, CgOptions};
use super::mesh::{DofMap, Mesh};
use crate::error::{Error, Result};

/// Condition on the outer cell boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterBoundary {
    Periodic,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareResult {
    pub outer: OuterBoundary,
    pub lambda1: f64,
    /// `D² = 1/λ₁`.
    pub d2: f64,
    /// `Ω = 1 + D²`.
    pub omega: f64,
    pub iterations: usize,
}

const BLOCK: usize = 4;
const MAX_ITER: usize = 500;

/// Subspace inverse iteration on the matrix dofs, constrained to zero mean.
pub fn poincare_constant(mesh: &Mesh, outer: OuterBoundary) -> Result<PoincareResult> {
    let dofs = match outer {
        OuterBoundary::Periodic => mesh.periodic_dofs(),
        OuterBoundary::Neumann => DofMap::identity(mesh.n_nodes()),
    };
    let forms = Forms::assemble(mesh, &dofs);
    let (_, in_pbar) = mesh.node_regions();
    let mut keep: Vec<usize> = (0..mesh.n_nodes()).filter(|&i| in_pbar[i]).map(|i| dofs.node_to_dof[i]).collect();
    keep.sort_unstable();
    keep.dedup();
    let k = submatrix(&forms.pbar.stiffness, &keep);
    let m = submatrix(&forms.pbar.mass, &keep);
    let n = keep.len();
    let w = matvec(&m, &vec![1.0; n]);
    let total: f64 = w.iter().sum();
    let project = |x: &mut [f64]| {
        let c = dot(&w, x) / total;
        x.iter_mut().for_each(|v| *v -= c);
    };

    // Deterministic start: low Fourier modes sampled at the dofs.
    let mut block: Vec<Vec<f64>> = (0..BLOCK)
        .map(|b| {
            keep.iter()
                .map(|&d| {
                    let p = mesh.nodes[dofs.dof_to_node[d]];
                    let t = std::f64::consts::TAU;
                    match b {
                        0 => (t * p[0]).cos() + 0.3 * (t * p[1]).sin(),
                        1 => (t * p[1]).cos() - 0.2 * (t * p[0]).sin(),
                        2 => (t * p[0]).sin() + 0.1 * (t * (p[0] + p[1])).cos(),
                        _ => (t * p[1]).sin() * (t * p[0]).cos() + p[0] * p[1],
                    }
                })
                .collect()
        })
        .collect();
    for x in &mut block {
        project(x);
    }

    let opts = CgOptions { rel_tol: 1e-12, accept_tol: 1e-8, max_iter: 50_000 };
    let mut last = f64::INFINITY;
    for it in 1..=MAX_ITER {
        let mut next = Vec::with_capacity(BLOCK);
        for x in &block {
            let mut rhs = matvec(&m, x);
            let c: f64 = rhs.iter().sum::<f64>() / n as f64;
            rhs.iter_mut().for_each(|v| *v -= c);
            let mut y = x.clone();
            pcg(&k, &rhs, &mut y, &opts)?;
            project(&mut y);
            next.push(y);
        }
        // Rayleigh-Ritz on span(next).
        let kn: Vec<Vec<f64>> = next.iter().map(|y| matvec(&k, y)).collect();
        let mn: Vec<Vec<f64>> = next.iter().map(|y| matvec(&m, y)).collect();
        let kr = DMatrix::from_fn(BLOCK, BLOCK, |i, j| dot(&next[i], &kn[j]));
        let mr = DMatrix::from_fn(BLOCK, BLOCK, |i, j| dot(&next[i], &mn[j]));
        let mr = (&mr + mr.transpose()) * 0.5;
        let kr = (&kr + kr.transpose()) * 0.5;
        let chol = mr.cholesky().ok_or(Error::Eigen { iterations: it })?;
        let linv = chol.l().try_inverse().ok_or(Error::Eigen { iterations: it })?;
        let reduced = &linv * kr * linv.transpose();
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        let eig = SymmetricEigen::new(reduced);
        let mut order: Vec<usize> = (0..BLOCK).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let coeffs = linv.transpose() * &eig.eigenvectors;
        block = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (j, y) in next.iter().enumerate() {
                    let a = coeffs[(j, c)];
                    v.iter_mut().zip(y).for_each(|(vi, yi)| *vi += a * yi);
                }
                v
            })
            .collect();
        let lambda = eig.eigenvalues[order[0]];
        if ((lambda - last) / lambda).abs() < 1e-11 {
            if !(lambda > 0.0) {
                return Err(Error::Eigen { iterations: it });
            }
            let d2 = 1.0 / lambda;
            return Ok(PoincareResult { outer, lambda1: lambda, d2, omega: 1.0 + d2, iterations: it });
        }
        last = lambda;
    }
    Err(Error::Eigen { iterations: MAX_ITER })
}
