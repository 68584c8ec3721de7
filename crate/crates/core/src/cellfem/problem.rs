use serde::{Deserialize, Serialize};
use sprs::CsMat;

use super::assembly::Forms;
use super::field::{EdgeData, Field, Parity, Support, GAUSS_2};
use super::linalg::{self, add, dot, matvec, pcg, submatrix, CgOptions};
use super::mesh::{DofMap, Mesh};
use crate::error::{Error, Result};

/// Integration domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    P,
    Pbar,
    Q,
}

impl Domain {
    fn support(self) -> Support {
        match self {
            Domain::P => Support::P,
            Domain::Pbar => Support::Pbar,
            Domain::Q => Support::Q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub cg: CgOptions,
    /// Largest admissible `|Σ b| / Σ |b|` of a Neumann load.
    pub tol_solv: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { cg: CgOptions::default(), tol_solv: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    /// Normalized solvability defect of a Neumann load.
    pub defect: f64,
}

/// A mesh with its periodic dofs, assembled forms and the two restricted
/// systems of the cell problems.
#[derive(Debug, Clone)]
pub struct CellProblem {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub forms: Forms,
    pub options: SolverOptions,
    pub pbar_dofs: Vec<usize>,
    pub p_dofs: Vec<usize>,
    pub p_interior_dofs: Vec<usize>,
    pub interface_dofs: Vec<usize>,
    antipode: Vec<usize>,
    k_pbar: CsMat<f64>,
    m_pbar_ones: Vec<f64>,
    helmholtz: CsMat<f64>,
    helmholtz_interior: CsMat<f64>,
}

impl CellProblem {
    pub fn new(mesh: Mesh) -> Result<Self> {
        Self::with_options(mesh, SolverOptions::default())
    }

    pub fn with_options(mesh: Mesh, options: SolverOptions) -> Result<Self> {
        let dofs = mesh.periodic_dofs();
        let forms = Forms::assemble(&mesh, &dofs);
        let (in_p, in_pbar) = mesh.node_regions();
        let n = dofs.n_dofs();
        let mut dof_p = vec![false; n];
        let mut dof_pbar = vec![false; n];
        for i in 0..mesh.n_nodes() {
            dof_p[dofs.node_to_dof[i]] |= in_p[i];
            dof_pbar[dofs.node_to_dof[i]] |= in_pbar[i];
        }
        let pick = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&d| f(d)).collect::<Vec<_>>();
        let pbar_dofs = pick(&|d| dof_pbar[d]);
        let p_dofs = pick(&|d| dof_p[d]);
        let p_interior_dofs = pick(&|d| dof_p[d] && !dof_pbar[d]);
        let interface_dofs = pick(&|d| dof_p[d] && dof_pbar[d]);
        if p_interior_dofs.is_empty() || interface_dofs.is_empty() {
            return Err(Error::Geometry("mesh does not resolve the inclusion".into()));
        }
        let antipode = dofs
            .dof_to_node
            .iter()
            .map(|&node| dofs.node_to_dof[mesh.antipode[node]])
            .collect();

        let k_pbar = submatrix(&forms.pbar.stiffness, &pbar_dofs);
        let ones = vec![1.0; n];
        let m_ones = matvec(&forms.pbar.mass, &ones);
        let m_pbar_ones = pbar_dofs.iter().map(|&d| m_ones[d]).collect();
        let helmholtz = add(&forms.p.stiffness, &forms.p.mass);
        let helmholtz_interior = submatrix(&helmholtz, &p_interior_dofs);
        Ok(Self {
            mesh,
            dofs,
            forms,
            options,
            pbar_dofs,
            p_dofs,
            p_interior_dofs,
            interface_dofs,
            antipode,
            k_pbar,
            m_pbar_ones,
            helmholtz,
            helmholtz_interior,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    pub fn volume_fractions(&self) -> (f64, f64) {
        self.mesh.volume_fractions()
    }

    fn check_support(field: &Field, domain: Domain) -> Result<()> {
        if !field.support.covers(domain.support()) {
            return Err(Error::RegionMismatch(format!(
                "field supported on {:?} integrated over {:?}",
                field.support, domain
            )));
        }
        Ok(())
    }

    /// `∫_D f`, exact for P1 fields.
    pub fn integrate(&self, field: &Field, domain: Domain) -> Result<f64> {
        Self::check_support(field, domain)?;
        Ok(self.integrate_values(&field.values, domain))
    }

    pub fn integrate_values(&self, values: &[f64], domain: Domain) -> f64 {
        let ones = vec![1.0; values.len()];
        linalg::form(&self.forms.region(domain).mass, &ones, values)
    }

    /// `∫_D κ·∇f`.
    pub fn integrate_directional(&self, field: &Field, kappa: [f64; 2], domain: Domain) -> Result<f64> {
        Self::check_support(field, domain)?;
        let ones = vec![1.0; field.values.len()];
        Ok(linalg::form(&self.forms.region(domain).directional(kappa), &ones, &field.values))
    }

    /// `∫_∂P f ds` over the interface polygon.
    pub fn integrate_interface(&self, field: &Field) -> f64 {
        let ones = vec![1.0; field.values.len()];
        linalg::form(&self.forms.interface_mass, &ones, &field.values)
    }

    pub fn h1_norm(&self, field: &Field, domain: Domain) -> Result<f64> {
        Self::check_support(field, domain)?;
        Ok(self.h1_norm_values(&field.values, domain))
    }

    pub fn h1_norm_values(&self, values: &[f64], domain: Domain) -> f64 {
        let f = self.forms.region(domain);
        (linalg::form(&f.stiffness, values, values) + linalg::form(&f.mass, values, values)).max(0.0).sqrt()
    }

    /// `max |f(y) - s f(-y)| / max |f|` for the parity sign `s`.
    pub fn parity_defect(&self, values: &[f64], parity: Parity) -> f64 {
        let Some(s) = parity.sign() else { return 0.0 };
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        values
            .iter()
            .zip(&self.antipode)
            .map(|(v, &j)| (v - s * values[j]).abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Solves `∫_Pbar ∇ψ·∇φ_i = load_i` for every matrix dof, with the
    /// zero-mean constraint on the matrix imposed through a multiplier.
    pub fn solve_neumann_load(&self, load: &[f64], order: Option<usize>) -> Result<(Vec<f64>, SolveReport)> {
        let b: Vec<f64> = self.pbar_dofs.iter().map(|&d| load[d]).collect();
        let defect: f64 = b.iter().sum();
        let scale: f64 = b.iter().map(|v| v.abs()).sum();
        let mut out = vec![0.0; self.n_dofs()];
        if scale == 0.0 {
            return Ok((out, SolveReport::default()));
        }
        let normalized = defect.abs() / scale;
        if normalized > self.options.tol_solv {
            return Err(Error::Solvability { defect: normalized, tol: self.options.tol_solv, order });
        }
        let weight: f64 = self.m_pbar_ones.iter().sum();
        let lambda = defect / weight;
        let rhs: Vec<f64> = b.iter().zip(&self.m_pbar_ones).map(|(bi, mi)| bi - lambda * mi).collect();
        let mut x = vec![0.0; rhs.len()];
        let outcome = pcg(&self.k_pbar, &rhs, &mut x, &self.options.cg)?;
        let mean = dot(&self.m_pbar_ones, &x) / weight;
        for (l, &d) in self.pbar_dofs.iter().enumerate() {
            out[d] = x[l] - mean;
        }
        Ok((out, SolveReport { iterations: outcome.iterations, residual: outcome.residual, defect: normalized }))
    }

    /// `Δψ = G` in the matrix, `∂_n ψ = F` on the interface (normal into the
    /// matrix), periodic on the cell boundary, zero mean on the matrix.
    pub fn solve_neumann_pbar(&self, source: &Field, flux: &EdgeData) -> Result<(Field, SolveReport)> {
        Self::check_support(source, Domain::Pbar)?;
        let mg = matvec(&self.forms.pbar.mass, &source.values);
        let mut load: Vec<f64> = mg.iter().map(|v| -v).collect();
        for (e, vals) in self.mesh.boundary_edges.iter().zip(&flux.values) {
            let (a, b) = (self.mesh.nodes[e.nodes[0]], self.mesh.nodes[e.nodes[1]]);
            let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            let (da, db) = (self.dofs.node_to_dof[e.nodes[0]], self.dofs.node_to_dof[e.nodes[1]]);
            for (s, f) in GAUSS_2.iter().zip(vals) {
                load[da] -= 0.5 * len * f * (1.0 - s);
                load[db] -= 0.5 * len * f * s;
            }
        }
        let (values, report) = self.solve_neumann_load(&load, None)?;
        Ok((Field::new(values, Support::Pbar), report))
    }

    /// Solves `∫_P ∇ψ·∇φ_j + ψ φ_j = load_j` for interior inclusion dofs,
    /// with `values` on the interface taken as Dirichlet data. Interior
    /// entries of `values` are overwritten.
    pub fn solve_helmholtz_load(&self, load: &[f64], values: &mut [f64]) -> Result<SolveReport> {
        let mut trace = vec![0.0; self.n_dofs()];
        for &d in &self.interface_dofs {
            trace[d] = values[d];
        }
        let coupling = matvec(&self.helmholtz, &trace);
        let rhs: Vec<f64> = self.p_interior_dofs.iter().map(|&d| load[d] - coupling[d]).collect();
        let mut x: Vec<f64> = self.p_interior_dofs.iter().map(|&d| values[d]).collect();
        let outcome = pcg(&self.helmholtz_interior, &rhs, &mut x, &self.options.cg)?;
        for (l, &d) in self.p_interior_dofs.iter().enumerate() {
            values[d] = x[l];
        }
        Ok(SolveReport { iterations: outcome.iterations, residual: outcome.residual, defect: 0.0 })
    }

    /// `Δψ - ψ = G` in the inclusion with `ψ = trace` on the interface.
    /// The result is supported on the whole cell: the trace field's matrix
    /// values are kept and the inclusion values replaced.
    pub fn solve_dirichlet_helmholtz_p(&self, source: &Field, trace: &Field) -> Result<(Field, SolveReport)> {
        Self::check_support(source, Domain::P)?;
        let mg = matvec(&self.forms.p.mass, &source.values);
        let load: Vec<f64> = mg.iter().map(|v| -v).collect();
        let mut values = trace.values.clone();
        let report = self.solve_helmholtz_load(&load, &mut values)?;
        Ok((Field::new(values, Support::Q), report))
    }
}
