//! The hierarchy of cell problems for the correctors `ψ_m` and the
//! dispersion coefficients `ξ²_m`.
//!
//! Everything is carried in real arithmetic. The complex factors of the
//! expansion collapse to the signed coefficients `c_l = (-1)^{l/2} ξ²_l` for
//! even `l`, and `c_l = 0` for odd `l`.
//!
//! Order `m` proceeds as follows. The solvability condition of the matrix
//! problem fixes `ξ²_{m-2}`. Then the matrix (Neumann) problem gives `ψ_m`
//! on `Pbar`, and its interface trace feeds the inclusion (Helmholtz)
//! problem for `ψ_m` on `P`. Closing `ξ²_M` needs `ψ_{M+1}`, so one
//! corrector beyond `M` is always computed.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sprs::CsMat;

use crate::cellfem::linalg::{add, dot, matvec, transpose};
use crate::cellfem::{io, CellProblem, Domain, Field, Geometry, Parity, SolveReport, Support};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeOptions {
    /// Odd coefficients must stay below `tol_odd_rel * max(|ξ²_0|, 1)`.
    pub tol_odd_rel: f64,
    /// Largest admissible relative parity defect of a corrector.
    pub parity_tol: f64,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self { tol_odd_rel: 1e-6, parity_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub m: usize,
    pub neumann: SolveReport,
    pub helmholtz: SolveReport,
    pub parity_defect: f64,
    /// `⟨ψ_m⟩_Pbar` relative to `‖ψ_m‖_{H1(Q)}`.
    pub mean_pbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub geometry: Geometry,
    pub direction: [f64; 2],
    pub order: usize,
    /// `ψ_0 ..= ψ_{M+1}`.
    pub psi: Vec<Field>,
    /// `ξ²_0 ..= ξ²_M`, odd entries exactly zero.
    pub xi2: Vec<f64>,
    /// Measured `|ξ²_l|` before zeroing, for odd `l` (zero for even `l`).
    pub odd_defects: Vec<f64>,
    /// `p̄_m = ‖ψ_m‖_{H1(Pbar)}`.
    pub norms_pbar: Vec<f64>,
    /// `p_m = ‖ψ_m‖_{H1(P)}`.
    pub norms_p: Vec<f64>,
    pub norms_q: Vec<f64>,
    /// `⟨ψ_0⟩_Q`.
    pub psi0_mean: f64,
    pub reports: Vec<OrderReport>,
}

struct Operators {
    d_q: CsMat<f64>,
    d_q_t: CsMat<f64>,
    d_pbar: CsMat<f64>,
    d_pbar_t: CsMat<f64>,
    d_p: CsMat<f64>,
    kq: CsMat<f64>,
    mq: CsMat<f64>,
    mp: CsMat<f64>,
    mpbar: CsMat<f64>,
    /// `1ᵀ M_Q`, `1ᵀ M_Pbar`, `1ᵀ D_Q`, `1ᵀ D_Pbar`.
    w_q: Vec<f64>,
    w_pbar: Vec<f64>,
    wd_q: Vec<f64>,
    wd_pbar: Vec<f64>,
}

impl Operators {
    fn new(problem: &CellProblem, kappa: [f64; 2]) -> Self {
        let f = &problem.forms;
        let d_q = f.q.directional(kappa);
        let d_pbar = f.pbar.directional(kappa);
        let d_p = f.p.directional(kappa);
        let ones = vec![1.0; problem.n_dofs()];
        let d_q_t = transpose(&d_q);
        let d_pbar_t = transpose(&d_pbar);
        Self {
            w_q: matvec(&f.q.mass, &ones),
            w_pbar: matvec(&f.pbar.mass, &ones),
            wd_q: matvec(&d_q_t, &ones),
            wd_pbar: matvec(&d_pbar_t, &ones),
            d_q,
            d_q_t,
            d_pbar,
            d_pbar_t,
            d_p,
            kq: f.q.stiffness.clone(),
            mq: f.q.mass.clone(),
            mp: f.p.mass.clone(),
            mpbar: f.pbar.mass.clone(),
        }
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Signed coefficients `c_l` together with the correctors; evaluates the
/// convolutions `σ'_n = Σ c_l ψ_{n-l}` and `σ''_n = Σ c_l σ'_{n-l}`.
struct Convolution<'a> {
    c: &'a [f64],
    psi: &'a [Vec<f64>],
    n: usize,
}

impl Convolution<'_> {
    fn psi(&self, k: isize) -> Vec<f64> {
        if k < 0 { vec![0.0; self.n] } else { self.psi[k as usize].clone() }
    }

    /// `σ'_k`, optionally without the `l = k` term.
    fn first(&self, k: isize, skip_top: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        if k < 0 {
            return out;
        }
        let k = k as usize;
        for l in 0..=k {
            if (skip_top && l == k) || l >= self.c.len() || self.c[l] == 0.0 {
                continue;
            }
            axpy(&mut out, self.c[l], &self.psi[k - l]);
        }
        out
    }

    fn second(&self, k: isize) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        if k < 0 {
            return out;
        }
        for l in 0..=k as usize {
            if l < self.c.len() && self.c[l] != 0.0 {
                axpy(&mut out, self.c[l], &self.first(k - l as isize, false));
            }
        }
        out
    }
}

fn signed(l: usize, xi2: f64) -> f64 {
    if l % 2 == 1 {
        0.0
    } else if (l / 2).is_multiple_of(2) {
        xi2
    } else {
        -xi2
    }
}

/// Runs the cascade to order `M` in direction `kappa` (normalized here).
pub fn run_cascade(problem: &CellProblem, kappa: [f64; 2], order: usize) -> Result<SeriesSolution> {
    run_cascade_with(problem, kappa, order, &CascadeOptions::default())
}

pub fn run_cascade_with(
    problem: &CellProblem,
    kappa: [f64; 2],
    order: usize,
    opts: &CascadeOptions,
) -> Result<SeriesSolution> {
    let len = (kappa[0] * kappa[0] + kappa[1] * kappa[1]).sqrt();
    if !(len > 0.0) {
        return Err(Error::Domain("propagation direction must be nonzero".into()));
    }
    let kappa = [kappa[0] / len, kappa[1] / len];
    let ops = Operators::new(problem, kappa);
    let n = problem.n_dofs();

    let mut psi0 = vec![0.0; n];
    for &d in &problem.pbar_dofs {
        psi0[d] = 1.0;
    }
    let helm0 = problem.solve_helmholtz_load(&vec![0.0; n], &mut psi0)?;
    let psi0_mean = dot(&ops.w_q, &psi0);
    if !(psi0_mean > 0.0) {
        return Err(Error::Consistency(format!("non-positive <psi_0>_Q = {psi0_mean}")));
    }
    let mut psi: Vec<Vec<f64>> = vec![psi0];
    let mut c: Vec<f64> = Vec::new();
    let mut xi2: Vec<f64> = Vec::new();
    let mut odd_defects: Vec<f64> = Vec::new();
    let parity0 = problem.parity_defect(&psi[0], Parity::Even);
    let mut reports = vec![OrderReport {
        m: 0,
        neumann: SolveReport::default(),
        helmholtz: helm0,
        parity_defect: parity0,
        mean_pbar: 0.0,
    }];
    if parity0 > opts.parity_tol {
        return Err(Error::Parity { defect: parity0, order: 0 });
    }

    for m in 1..=order + 2 {
        let mi = m as isize;
        if m >= 2 {
            let l = m - 2;
            let conv = Convolution { c: &c, psi: &psi, n };
            let mut num = dot(&ops.wd_pbar, &psi[m - 1]) + dot(&ops.w_pbar, &psi[m - 2]);
            num += dot(&ops.wd_q, &conv.first(mi - 3, false));
            let mut volume = conv.first(mi - 2, true);
            axpy(&mut volume, 1.0, &conv.second(mi - 4));
            axpy(&mut volume, -1.0, &conv.first(mi - 4, false));
            num -= dot(&ops.w_q, &volume);
            let value = num / psi0_mean;
            if l % 2 == 0 {
                let x = signed(l, value);
                xi2.push(x);
                c.push(value);
                odd_defects.push(0.0);
            } else {
                let tol = opts.tol_odd_rel * xi2[0].abs().max(1.0);
                if value.abs() > tol || !value.is_finite() {
                    return Err(Error::Solvability { defect: value.abs(), tol, order: Some(m) });
                }
                xi2.push(0.0);
                c.push(0.0);
                odd_defects.push(value.abs());
            }
        }
        if m == order + 2 {
            break;
        }

        let conv = Convolution { c: &c, psi: &psi, n };
        let s2 = conv.first(mi - 2, false);
        let s3 = conv.first(mi - 3, false);
        let s4 = conv.first(mi - 4, false);
        let ss4 = conv.second(mi - 4);
        let p1 = conv.psi(mi - 1);
        let p2 = conv.psi(mi - 2);

        let mut load = matvec(&ops.kq, &s2);
        axpy(&mut load, 1.0, &matvec(&ops.d_q_t, &s3));
        axpy(&mut load, -1.0, &matvec(&ops.d_q, &s3));
        let mut mix = s2.clone();
        axpy(&mut mix, 1.0, &ss4);
        axpy(&mut mix, -1.0, &s4);
        axpy(&mut load, 1.0, &matvec(&ops.mq, &mix));
        axpy(&mut load, 1.0, &matvec(&ops.d_pbar_t, &p1));
        axpy(&mut load, -1.0, &matvec(&ops.d_pbar, &p1));
        axpy(&mut load, -1.0, &matvec(&ops.mpbar, &p2));
        load.iter_mut().for_each(|v| *v = -*v);
        let (mut values, neumann) = problem.solve_neumann_load(&load, Some(m))?;

        let mut hload = matvec(&ops.mp, &s2);
        axpy(&mut hload, -2.0, &matvec(&ops.d_p, &p1));
        axpy(&mut hload, -1.0, &matvec(&ops.mp, &p2));
        hload.iter_mut().for_each(|v| *v = -*v);
        let helmholtz = problem.solve_helmholtz_load(&hload, &mut values)?;

        let parity_defect = problem.parity_defect(&values, Parity::of_order(m));
        let norm_q = problem.h1_norm_values(&values, Domain::Q);
        let mean = dot(&ops.w_pbar, &values);
        let mean_pbar = if norm_q > 0.0 { mean / norm_q } else { mean };
        reports.push(OrderReport { m, neumann, helmholtz, parity_defect, mean_pbar });
        if parity_defect > opts.parity_tol {
            return Err(Error::Parity { defect: parity_defect, order: m });
        }
        psi.push(values);
    }

    let fields: Vec<Field> = psi
        .into_iter()
        .enumerate()
        .map(|(m, v)| Field::new(v, Support::Q).with_parity(Parity::of_order(m)))
        .collect();
    let norms_pbar = fields.iter().map(|f| problem.h1_norm_values(&f.values, Domain::Pbar)).collect();
    let norms_p = fields.iter().map(|f| problem.h1_norm_values(&f.values, Domain::P)).collect();
    let norms_q = fields.iter().map(|f| problem.h1_norm_values(&f.values, Domain::Q)).collect();
    Ok(SeriesSolution {
        geometry: problem.mesh.geometry,
        direction: kappa,
        order,
        psi: fields,
        xi2,
        odd_defects,
        norms_pbar,
        norms_p,
        norms_q,
        psi0_mean,
        reports,
    })
}

/// `ξ²_0 = ⟨κ·∇ψ_1 + ψ_0⟩_Pbar / ⟨ψ_0⟩_Q` from the first two correctors.
pub fn extract_xi0(problem: &CellProblem, solution: &SeriesSolution) -> Result<f64> {
    let k = solution.direction;
    let psi0 = &solution.psi[0];
    let den = problem.integrate(psi0, Domain::Q)?;
    if !(den > 0.0) {
        return Err(Error::Consistency(format!("non-positive <psi_0>_Q = {den}")));
    }
    let num = problem.integrate_directional(&solution.psi[1], k, Domain::Pbar)? + problem.integrate(psi0, Domain::Pbar)?;
    Ok(num / den)
}

/// `ξ²_2` from the closed expression in the first four correctors:
/// `[-ξ²_0⟨ψ_0⟩_Q + ξ⁴_0⟨ψ_0⟩_Q + ξ²_0⟨ψ_2⟩_P - ξ²_0⟨κ·∇ψ_1⟩_Q - ⟨κ·∇ψ_3⟩_Pbar] / ⟨ψ_0⟩_Q`.
pub fn extract_xi2_closed(problem: &CellProblem, solution: &SeriesSolution) -> Result<f64> {
    if solution.psi.len() < 4 {
        return Err(Error::Index("closed form for xi2_2 needs psi_0..psi_3".into()));
    }
    let k = solution.direction;
    let x0 = extract_xi0(problem, solution)?;
    let m0 = problem.integrate(&solution.psi[0], Domain::Q)?;
    let m2 = problem.integrate(&solution.psi[2], Domain::P)?;
    let d1 = problem.integrate_directional(&solution.psi[1], k, Domain::Q)?;
    let d3 = problem.integrate_directional(&solution.psi[3], k, Domain::Pbar)?;
    Ok((-x0 * m0 + x0 * x0 * m0 + x0 * m2 - x0 * d1 - d3) / m0)
}

impl SeriesSolution {
    /// `ξ²_η = Σ_{m ≤ M} ξ²_m η^m`.
    pub fn xi2_eta(&self, eta: f64) -> f64 {
        self.xi2.iter().rev().fold(0.0, |acc, x| acc * eta + x)
    }

    /// Truncated field `h = Σ_{m ≤ N} i^m ψ_m η^m` as real and imaginary parts.
    pub fn field_series(&self, eta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let len = self.psi[0].values.len();
        let mut re = vec![0.0; len];
        let mut im = vec![0.0; len];
        let mut w = 1.0;
        for m in 0..=n.min(self.psi.len() - 1) {
            let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let target = if m % 2 == 0 { &mut re } else { &mut im };
            axpy(target, sign * w, &self.psi[m].values);
            w *= eta;
        }
        (re, im)
    }

    pub fn max_parity_defect(&self) -> f64 {
        self.reports.iter().map(|r| r.parity_defect).fold(0.0, f64::max)
    }

    pub fn max_mean_pbar(&self) -> f64 {
        self.reports.iter().skip(1).map(|r| r.mean_pbar.abs()).fold(0.0, f64::max)
    }

    pub fn max_odd_defect(&self) -> f64 {
        self.odd_defects.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn manifest(&self) -> SeriesManifest {
        SeriesManifest {
            format_version: 1,
            geometry: self.geometry,
            direction: self.direction,
            order: self.order,
            xi2: self.xi2.clone(),
            odd_defects: self.odd_defects.clone(),
            norms_pbar: self.norms_pbar.clone(),
            norms_p: self.norms_p.clone(),
            norms_q: self.norms_q.clone(),
            psi0_mean: self.psi0_mean,
            reports: self.reports.clone(),
            field_files: (0..self.psi.len()).map(|m| format!("psi_{m}.field")).collect(),
        }
    }

    /// Writes the JSON manifest and one field file per corrector into `dir`.
    pub fn save(&self, problem: &CellProblem, dir: &Path) -> Result<SeriesManifest> {
        std::fs::create_dir_all(dir)?;
        let manifest = self.manifest();
        for (f, name) in self.psi.iter().zip(&manifest.field_files) {
            std::fs::write(dir.join(name), io::write_field(&f.node_values(&problem.dofs)))?;
        }
        std::fs::write(dir.join("series.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesManifest {
    pub format_version: u32,
    pub geometry: Geometry,
    pub direction: [f64; 2],
    pub order: usize,
    pub xi2: Vec<f64>,
    pub odd_defects: Vec<f64>,
    pub norms_pbar: Vec<f64>,
    pub norms_p: Vec<f64>,
    pub norms_q: Vec<f64>,
    pub psi0_mean: f64,
    pub reports: Vec<OrderReport>,
    pub field_files: Vec<String>,
}

/// The real forms `a_0 … a_4` of the weak master system at `(h, ξ²)` against a test `v`.
pub struct MasterForms<'a> {
    problem: &'a CellProblem,
    d_pbar_anti: CsMat<f64>,
    d_q_anti: CsMat<f64>,
    h1_q: CsMat<f64>,
}

impl<'a> MasterForms<'a> {
    pub fn new(problem: &'a CellProblem, kappa: [f64; 2]) -> Self {
        let f = &problem.forms;
        let anti = |d: CsMat<f64>| {
            let t = transpose(&d);
            add(&t, &d.map(|v| -v))
        };
        Self {
            problem,
            d_pbar_anti: anti(f.pbar.directional(kappa)),
            d_q_anti: anti(f.q.directional(kappa)),
            h1_q: add(&f.q.stiffness, &f.q.mass),
        }
    }

    /// `[a_0, a_1, a_2, a_3, a_4]` applied to a real `h`.
    pub fn forms(&self, h: &[f64], xi2: f64, v: &[f64]) -> [f64; 5] {
        let f = &self.problem.forms;
        let a0 = -dot(v, &matvec(&f.pbar.stiffness, h));
        let a1 = dot(v, &matvec(&self.d_pbar_anti, h));
        let a2 = dot(v, &matvec(&f.pbar.mass, h)) - xi2 * dot(v, &matvec(&self.h1_q, h));
        let a3 = xi2 * dot(v, &matvec(&self.d_q_anti, h));
        let a4 = xi2 * (1.0 - xi2) * dot(v, &matvec(&f.q.mass, h));
        [a0, a1, a2, a3, a4]
    }

    /// `a_η = a_0 - iη a_1 - η² a_2 + iη³ a_3 + η⁴ a_4` for complex `h = re + i im`.
    pub fn a_eta(&self, re: &[f64], im: &[f64], xi2: f64, eta: f64, v: &[f64]) -> Complex64 {
        let i = Complex64::i();
        let combine = |a: [f64; 5]| {
            Complex64::from(a[0]) - i * eta * a[1] - eta.powi(2) * a[2] + i * eta.powi(3) * a[3] + eta.powi(4) * a[4]
        };
        combine(self.forms(re, xi2, v)) + i * combine(self.forms(im, xi2, v))
    }

    /// The same quantity written out from the shifted gradients
    /// `(∇ + iηκ)h · (∇ - iηκ)v` and the inclusion permittivity.
    pub fn a_eta_direct(&self, re: &[f64], im: &[f64], xi2: f64, eta: f64, v: &[f64]) -> Complex64 {
        let f = &self.problem.forms;
        let i = Complex64::i();
        let shifted = |k: &CsMat<f64>, m: &CsMat<f64>, anti: &CsMat<f64>, h: &[f64]| {
            Complex64::new(dot(v, &matvec(k, h)) + eta * eta * dot(v, &matvec(m, h)), eta * dot(v, &matvec(anti, h)))
        };
        let b = |k: &CsMat<f64>, m: &CsMat<f64>, anti: &CsMat<f64>| shifted(k, m, anti, re) + i * shifted(k, m, anti, im);
        let bpbar = b(&f.pbar.stiffness, &f.pbar.mass, &self.d_pbar_anti);
        let bq = b(&f.q.stiffness, &f.q.mass, &self.d_q_anti);
        let e = eta * eta * xi2;
        let mq = Complex64::new(dot(v, &matvec(&f.q.mass, re)), dot(v, &matvec(&f.q.mass, im)));
        -bpbar + e * bq - (e - 1.0) * e * mq
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eta: f64,
    pub truncation: usize,
    pub probes: usize,
    /// Largest `|a_η(h, ξ²; v)| / (‖h‖ ‖v‖)` over the random probes.
    pub max_residual: f64,
    /// The same for the constant test function.
    pub constant_residual: f64,
}

/// Residual vectors `r_k` with `a_η(h, ξ²; v) = Σ_k η^k vᵀ r_k` for the
/// truncation `h = Σ_{m ≤ N} i^m ψ_m η^m`, `ξ² = Σ_{l ≤ N} ξ²_l η^l`.
///
/// Summing by powers of `η` avoids the cancellation that a direct
/// evaluation at small `η` suffers: the coefficients with `k ≤ N` vanish
/// up to solver error, and only the truncation terms survive.
pub fn residual_coefficients(problem: &CellProblem, solution: &SeriesSolution, n: usize) -> Vec<Vec<Complex64>> {
    let f = &problem.forms;
    let forms = MasterForms::new(problem, solution.direction);
    let n = n.min(solution.psi.len() - 1).min(solution.xi2.len() - 1);
    let i_pow = |m: usize| match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let apply = |a: &CsMat<f64>| -> Vec<Vec<f64>> { solution.psi[..=n].iter().map(|p| matvec(a, &p.values)).collect() };
    let k_pbar = apply(&f.pbar.stiffness);
    let a_pbar = apply(&forms.d_pbar_anti);
    let m_pbar = apply(&f.pbar.mass);
    let h_q = apply(&forms.h1_q);
    let a_q = apply(&forms.d_q_anti);
    let m_q = apply(&f.q.mass);
    let xi = &solution.xi2[..=n];
    let mut xi_sq = vec![0.0; 2 * n + 1];
    for (a, x) in xi.iter().enumerate() {
        for (b, y) in xi.iter().enumerate() {
            xi_sq[a + b] += x * y;
        }
    }
    let len = problem.n_dofs();
    let top = 3 * n + 4;
    let mut out = vec![vec![Complex64::default(); len]; top + 1];
    let mut add_term = |k: usize, w: Complex64, v: &[f64]| {
        out[k].iter_mut().zip(v).for_each(|(o, x)| *o += w * x);
    };
    let i = Complex64::i();
    for m in 0..=n {
        let ph = i_pow(m);
        add_term(m, -ph, &k_pbar[m]);
        add_term(m + 1, -i * ph, &a_pbar[m]);
        add_term(m + 2, -ph, &m_pbar[m]);
        for (l, x) in xi.iter().enumerate() {
            add_term(m + l + 2, *x * ph, &h_q[m]);
            add_term(m + l + 3, i * *x * ph, &a_q[m]);
        }
        for (l, x) in xi.iter().enumerate() {
            add_term(m + l + 4, *x * ph, &m_q[m]);
        }
        for (l, x) in xi_sq.iter().enumerate() {
            add_term(m + l + 4, -*x * ph, &m_q[m]);
        }
    }
    out
}

/// Residual of the truncated series in the weak master system at `η`.
pub fn validate_master_residual(
    problem: &CellProblem,
    solution: &SeriesSolution,
    eta: f64,
    radius: f64,
    probe_count: usize,
    seed: u64,
) -> Result<ResidualReport> {
    validate_master_residual_many(problem, solution, &[eta], radius, probe_count, seed).map(|mut v| v.remove(0))
}

/// As [`validate_master_residual`] for several `η` with the same probes.
pub fn validate_master_residual_many(
    problem: &CellProblem,
    solution: &SeriesSolution,
    etas: &[f64],
    radius: f64,
    probe_count: usize,
    seed: u64,
) -> Result<Vec<ResidualReport>> {
    if let Some(&eta) = etas.iter().find(|e| !(0.0..=radius).contains(*e)) {
        return Err(Error::OutsideCertificate { eta, radius });
    }
    if solution.order < 4 {
        return Err(Error::Config("master residual needs a series of order at least 4".into()));
    }
    let n_trunc = solution.order;
    let coeffs = residual_coefficients(problem, solution, n_trunc);
    let n = problem.n_dofs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<Vec<f64>> = (0..probe_count).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    probes.push(vec![1.0; n]);
    // vᵀ r_k and ‖v‖ once per probe.
    let projected: Vec<(Vec<Complex64>, f64)> = probes
        .iter()
        .map(|v| {
            let p = coeffs.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
            (p, problem.h1_norm_values(v, Domain::Q))
        })
        .collect();
    Ok(etas
        .iter()
        .map(|&eta| {
            let (re, im) = solution.field_series(eta, n_trunc);
            let h_norm = (problem.h1_norm_values(&re, Domain::Q).powi(2) + problem.h1_norm_values(&im, Domain::Q).powi(2)).sqrt();
            let value = |p: &[Complex64]| p.iter().rev().fold(Complex64::default(), |acc, c| acc * eta + c).norm();
            let mut max_residual: f64 = 0.0;
            for (p, v_norm) in &projected[..probe_count] {
                max_residual = max_residual.max(value(p) / (h_norm * v_norm));
            }
            let (p, v_norm) = &projected[probe_count];
            ResidualReport {
                eta,
                truncation: n_trunc,
                probes: probe_count,
                max_residual,
                constant_residual: value(p) / (h_norm * v_norm),
            }
        })
        .collect())
}

/// Least-squares slope of `log residual` against `log η`.
pub fn fitted_order(reports: &[ResidualReport]) -> f64 {
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.eta.ln(), r.max_residual.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
