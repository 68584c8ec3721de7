//! Sparse helpers and a Jacobi-preconditioned conjugate gradient.

use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn matvec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.rows()];
    matvec_into(a, x, &mut y);
    y
}

pub fn matvec_into(a: &CsMat<f64>, x: &[f64], y: &mut [f64]) {
    debug_assert!(a.is_csr());
    for (i, row) in a.outer_iterator().enumerate() {
        y[i] = row.iter().map(|(j, v)| v * x[j]).sum();
    }
}

/// `xᵀ A y`.
pub fn form(a: &CsMat<f64>, x: &[f64], y: &[f64]) -> f64 {
    dot(x, &matvec(a, y))
}

pub fn transpose(a: &CsMat<f64>) -> CsMat<f64> {
    a.transpose_view().to_other_storage()
}

pub fn scaled(a: &CsMat<f64>, s: f64) -> CsMat<f64> {
    a.map(|v| v * s)
}

pub fn add(a: &CsMat<f64>, b: &CsMat<f64>) -> CsMat<f64> {
    a + b
}

/// Rows and columns of `a` listed in `keep`, renumbered consecutively.
pub fn submatrix(a: &CsMat<f64>, keep: &[usize]) -> CsMat<f64> {
    let mut local = vec![usize::MAX; a.cols()];
    for (l, &g) in keep.iter().enumerate() {
        local[g] = l;
    }
    let mut tri = TriMat::new((keep.len(), keep.len()));
    for (l, &g) in keep.iter().enumerate() {
        if let Some(row) = a.outer_view(g) {
            for (j, &v) in row.iter() {
                if local[j] != usize::MAX {
                    tri.add_triplet(l, local[j], v);
                }
            }
        }
    }
    tri.to_csr()
}

pub fn diagonal(a: &CsMat<f64>) -> Vec<f64> {
    let mut d = vec![0.0; a.rows()];
    for (i, row) in a.outer_iterator().enumerate() {
        d[i] = row.get(i).copied().unwrap_or(0.0);
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// A solve whose true residual stays above this is an error.
    pub accept_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-13, accept_tol: 1e-10, max_iter: 50_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `A x = b` for symmetric positive (semi)definite `A`, starting from
/// `x`. For a singular `A` the right-hand side must lie in its range. The
/// recursive residual is re-anchored to the true residual on restart.
pub fn pcg(a: &CsMat<f64>, b: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<CgOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, residual: 0.0 });
    }
    let inv_diag: Vec<f64> = diagonal(a).iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut ap = vec![0.0; n];
    let mut total = 0;
    let mut best = f64::INFINITY;
    for _restart in 0..6 {
        let ax = matvec(a, x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let true_res = norm(&r) / bnorm;
        best = best.min(true_res);
        if true_res <= opts.rel_tol {
            return Ok(CgOutcome { iterations: total, residual: true_res });
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut stalled = 0;
        let mut last = true_res;
        loop {
            if total >= opts.max_iter {
                break;
            }
            matvec_into(a, &p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            total += 1;
            let res = norm(&r) / bnorm;
            if res <= opts.rel_tol {
                break;
            }
            if res > 0.999 * last {
                stalled += 1;
                if stalled > 200 {
                    break;
                }
            } else {
                stalled = 0;
                last = res;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if total >= opts.max_iter {
            break;
        }
    }
    let ax = matvec(a, x);
    let res = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / bnorm;
    best = best.min(res);
    if res <= opts.accept_tol {
        Ok(CgOutcome { iterations: total, residual: res })
    } else {
        Err(Error::Solver { iterations: total, residual: best })
    }
}
