//! Dispersion relation, effective index, permeability and permittivity,
//! error bars and physical scales.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{tail_bound_h, tail_bound_xi, ConvergenceCertificate};
use crate::cascade::SeriesSolution;
use crate::cellfem::{CellProblem, Domain};
use crate::error::{Error, Result};
use crate::reference;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference point for the line average of the magnetic field.
pub const CELL_CORNER: [f64; 2] = [-0.5, -0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub eta: f64,
    /// `α = 4Jη`.
    pub alpha: f64,
    /// Partial sum `Σ_{m ≤ M} ξ²_m η^m`.
    pub xi2_eta: f64,
    /// Truncated two-term value `ξ²_0 + ξ²_2 η²`.
    pub xi2_two_term: f64,
    /// Bound on the omitted tail of `ξ²_η`.
    pub tail_bound: f64,
    pub n2_eff: f64,
    pub mu_eff: f64,
    pub eps_eff: f64,
    /// `ε_p = 1 - 1/(η² ξ²_η)` of the inclusion at this frequency.
    pub eps_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveProperties {
    pub eta: f64,
    /// `μ_qs = ⟨ψ_0⟩_Q`.
    pub mu_qs: f64,
    /// `n²_qs = 1/ξ²_0`.
    pub n2_qs: f64,
    pub eps_qs: f64,
    pub n2_eff: f64,
    pub mu_eff: f64,
    pub eps_eff: f64,
    /// `|Im B_eff/H_eff|`; vanishes by parity.
    pub mu_imag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    /// Crystal period, m.
    pub d: f64,
    /// `ω_p = c/d`, 1/s.
    pub omega_p: f64,
    /// `λ_m = 2πd/R`, m.
    pub lambda_m: f64,
    /// `k_M = R/d`, 1/m.
    pub k_max: f64,
}

pub fn physical_scales(radius: f64, d: f64) -> Result<PhysicalScales> {
    if !(d > 0.0) || !(radius > 0.0) {
        return Err(Error::Domain(format!("period and radius must be positive, got d = {d}, R = {radius}")));
    }
    Ok(PhysicalScales { d, omega_p: SPEED_OF_LIGHT / d, lambda_m: std::f64::consts::TAU * d / radius, k_max: radius / d })
}

fn locate(problem: &CellProblem, point: [f64; 2]) -> Result<Vec<(usize, f64)>> {
    if problem.mesh.geometry.contains(point) {
        return Err(Error::Config(format!("reference point {point:?} lies inside the inclusion")));
    }
    let mesh = &problem.mesh;
    for tri in &mesh.triangles {
        let [a, b, c] = tri.map(|i| mesh.nodes[i]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let l1 = ((point[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (point[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (point[1] - a[1]) - (point[0] - a[0]) * (b[1] - a[1])) / det;
        let l0 = 1.0 - l1 - l2;
        let tol = -1e-12;
        if l0 >= tol && l1 >= tol && l2 >= tol {
            return Ok(tri.iter().zip([l0, l1, l2]).map(|(&n, w)| (problem.dofs.node_to_dof[n], w)).collect());
        }
    }
    Err(Error::Config(format!("reference point {point:?} lies outside the cell")))
}

/// `h_η = Σ i^m ψ_m η^m` averaged over the cell and evaluated at `point`.
fn averages(problem: &CellProblem, solution: &SeriesSolution, eta: f64, point: [f64; 2]) -> Result<(Complex64, Complex64)> {
    let stencil = locate(problem, point)?;
    let (re, im) = solution.field_series(eta, solution.order);
    let b = Complex64::new(problem.integrate_values(&re, Domain::Q), problem.integrate_values(&im, Domain::Q));
    let at = |v: &[f64]| stencil.iter().map(|&(d, w)| w * v[d]).sum::<f64>();
    Ok((b, Complex64::new(at(&re), at(&im))))
}

fn check_eta(eta: f64, cert: &ConvergenceCertificate) -> Result<()> {
    if !(0.0..=cert.radius).contains(&eta) {
        return Err(Error::OutsideCertificate { eta, radius: cert.radius });
    }
    Ok(())
}

/// `μ_eff = B_eff/H_eff` at `t = 0`, with `H_eff` the field value at `point`.
pub fn effective_properties_at(
    problem: &CellProblem,
    solution: &SeriesSolution,
    cert: &ConvergenceCertificate,
    eta: f64,
    point: [f64; 2],
) -> Result<EffectiveProperties> {
    check_eta(eta, cert)?;
    let mu_qs = solution.psi0_mean;
    let n2_qs = 1.0 / solution.xi2[0];
    let (b, h) = averages(problem, solution, eta, point)?;
    let mu = b / h;
    let n2_eff = 1.0 / solution.xi2_eta(eta);
    Ok(EffectiveProperties {
        eta,
        mu_qs,
        n2_qs,
        eps_qs: n2_qs / mu_qs,
        n2_eff,
        mu_eff: mu.re,
        eps_eff: n2_eff / mu.re,
        mu_imag: mu.im.abs(),
    })
}

pub fn effective_properties(
    problem: &CellProblem,
    solution: &SeriesSolution,
    cert: &ConvergenceCertificate,
    eta: f64,
) -> Result<EffectiveProperties> {
    effective_properties_at(problem, solution, cert, eta, CELL_CORNER)
}

/// Samples the first branch with error bars at each `η ≤ R`.
pub fn dispersion_branch(
    problem: &CellProblem,
    solution: &SeriesSolution,
    cert: &ConvergenceCertificate,
    etas: &[f64],
) -> Result<Vec<DispersionPoint>> {
    let m0 = solution.order / 2;
    etas.iter()
        .map(|&eta| {
            let props = effective_properties(problem, solution, cert, eta)?;
            let xi2_eta = solution.xi2_eta(eta);
            let alpha = 4.0 * cert.j * eta;
            let eps_p = if eta > 0.0 { 1.0 - 1.0 / (eta * eta * xi2_eta) } else { f64::NEG_INFINITY };
            Ok(DispersionPoint {
                eta,
                alpha,
                xi2_eta,
                xi2_two_term: solution.xi2[0] + solution.xi2[2] * eta * eta,
                tail_bound: tail_bound_xi(m0, alpha, cert.constants.beta)?,
                n2_eff: props.n2_eff,
                mu_eff: props.mu_eff,
                eps_eff: props.eps_eff,
                eps_p,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrorRow {
    pub alpha: f64,
    /// `R_{1,h}` bound with the published `r = 0.45` constants.
    pub r1h_published: f64,
    pub r1xi_published: f64,
    /// The same formulas with this run's constants.
    pub r1h_measured: f64,
    pub r1xi_measured: f64,
}

/// `2β|h_0| α²/(1-α) / (‖ψ_0‖ - ‖ψ_1‖ η)` with `η = α/(4J)`.
pub fn relative_error_h(alpha: f64, beta: f64, j: f64, psi0: f64, psi1: f64) -> Result<f64> {
    Ok(tail_bound_h(1, alpha, 1.0, beta)? / (psi0 - psi1 * alpha / (4.0 * j)))
}

/// `β α⁴/(1-α²) / |ξ²_0 + ξ²_2 η²|` with `η = α/(4J)`.
pub fn relative_error_xi(alpha: f64, beta: f64, j: f64, xi0: f64, xi2: f64) -> Result<f64> {
    let eta = alpha / (4.0 * j);
    Ok(tail_bound_xi(1, alpha, beta)? / (xi0 + xi2 * eta * eta).abs())
}

pub fn relative_error_report(
    solution: &SeriesSolution,
    cert: &ConvergenceCertificate,
    alphas: &[f64],
) -> Result<Vec<RelativeErrorRow>> {
    let p = reference::RELATIVE_ERROR_LITERALS;
    let beta = cert.constants.beta;
    alphas
        .iter()
        .map(|&alpha| {
            Ok(RelativeErrorRow {
                alpha,
                r1h_published: relative_error_h(alpha, p.beta, p.j, p.psi0_norm, p.psi1_norm)?,
                r1xi_published: relative_error_xi(alpha, p.beta, p.j, p.xi2_0, p.xi2_2)?,
                r1h_measured: relative_error_h(alpha, beta, cert.j, solution.norms_q[0], solution.norms_q[1])?,
                r1xi_measured: relative_error_xi(alpha, beta, cert.j, solution.xi2[0], solution.xi2[2])?,
            })
        })
        .collect()
}

pub const CSV_HEADER: [&str; 8] = ["eta", "alpha", "xi2_eta", "tail_bound", "n2_eff", "mu_eff", "eps_eff", "eps_p"];

/// One row per sample, columns as in [`CSV_HEADER`].
pub fn write_csv<W: Write>(out: W, points: &[DispersionPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(|e| Error::Format(e.to_string()))?;
    for p in points {
        let row = [p.eta, p.alpha, p.xi2_eta, p.tail_bound, p.n2_eff, p.mu_eff, p.eps_eff, p.eps_p];
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
