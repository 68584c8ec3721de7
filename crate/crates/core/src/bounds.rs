//! Constants of the convergence certificate: the extension constant `A`,
//! `β`, the base-case growth rate `J_1`, the induction rate `J_2` from the
//! polynomials `Q*`, `R*`, `S*`, and the certified radius `R = 1/(4J)`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cascade::SeriesSolution;
use crate::catalan::{to_f64, CatalanTable};
use crate::cellfem::{poincare_constant, CellProblem, Geometry, OuterBoundary, PoincareResult};
use crate::error::{Error, Result};
use crate::specfun::{scaled_pairs, MAX_ORDER};

/// Outer radius of the annulus used for the extension estimate.
pub const OUTER_RADIUS: f64 = 0.5;
pub const DEFAULT_N_MAX: u32 = 64;
/// Literal bound on the `ξ²_3` contribution in `S*`.
pub const XI_THREE_CONSTANT: f64 = 0.7976;
pub const J_BRACKET: (f64, f64) = (1.0, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConstant {
    pub radius: f64,
    pub a: f64,
    /// Order attaining the maximum.
    pub argmax: u32,
    pub n_max: u32,
    pub max_alpha_beta: f64,
    pub max_delta_epsilon: f64,
    /// `max_n |m¹² - m²¹|` with the coefficients as printed. The Wronskian
    /// identity makes this exactly `A`, not zero.
    pub hermitian_defect_printed: f64,
    /// The same with the outer-circle terms weighted by the radius `s`.
    pub hermitian_defect_weighted: f64,
    /// Same value and argmax with twice as many orders.
    pub stable_under_doubling: bool,
}

struct ExtensionScan {
    a: f64,
    argmax: u32,
    max_ab: f64,
    max_de: f64,
}

/// Per-order quantities `α_n/β_n` and `δ_n/ε_n`, with the scale factor
/// `t² = (r/s)^{2n}` multiplied through so every term stays representable.
fn extension_orders(r: f64, n_max: u32) -> Result<Vec<(f64, f64)>> {
    let s = OUTER_RADIUS;
    let pr = scaled_pairs(n_max, r)?;
    let ps = scaled_pairs(n_max, s)?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max as usize {
        let (a, b) = (&pr[n], &ps[n]);
        let t2 = (r / s).powi(2 * n as i32);
        // II = σ² ĨĨ', KK = K̃K̃'/σ², IK = ĨK̃', KI = K̃Ĩ', JJ = K̃²Ĩ'/(Ĩσ²);
        // everything is written in units where σ_s = 1, so σ_r² = t².
        let ii_r = a.i * a.ip;
        let ii_s = b.i * b.ip;
        let kk_r = a.k * a.kp;
        let kk_s = b.k * b.kp;
        let ik_r = a.i * a.kp;
        let ik_s = b.i * b.kp;
        let ki_r = a.k * a.ip;
        let ki_s = b.k * b.ip;
        let jj_r = a.k * a.k * a.ip / a.i;

        let alpha = r * t2 * ii_r;
        let beta = ii_s - r * t2 * ii_r;
        let delta = r * s * (t2 * t2 * ii_r * kk_s + ii_s * jj_r - t2 * ki_r * ik_s - t2 * ki_s * ki_r)
            + r * r * t2 * (-ii_r * kk_r - ii_r * jj_r + ki_r * ik_r + ki_r * ki_r);
        let eps = r * s * (-t2 * t2 * ii_r * kk_s - ii_s * kk_r + t2 * ki_r * ik_s + t2 * ki_s * ik_r);
        for (name, v) in [("beta", beta), ("delta", delta), ("epsilon", eps)] {
            if !(v > 0.0) {
                return Err(Error::Consistency(format!("{name}_{n}({r}, {s}) = {v} is not positive")));
            }
        }
        out.push((alpha / beta, delta / eps));
    }
    Ok(out)
}

fn scan(r: f64, n_max: u32) -> Result<ExtensionScan> {
    let orders = extension_orders(r, n_max)?;
    let mut best = ExtensionScan { a: f64::NEG_INFINITY, argmax: 0, max_ab: 0.0, max_de: 0.0 };
    for (n, &(ab, de)) in orders.iter().enumerate() {
        best.max_ab = best.max_ab.max(ab);
        best.max_de = best.max_de.max(de);
        let v = ab.max(de);
        if v > best.a {
            best.a = v;
            best.argmax = n as u32;
        }
    }
    Ok(best)
}

fn hermitian_defects(r: f64, a_const: f64, n_max: u32) -> Result<(f64, f64)> {
    let s = OUTER_RADIUS;
    let pr = scaled_pairs(n_max, r)?;
    let ps = scaled_pairs(n_max, s)?;
    let (mut printed, mut weighted) = (0.0f64, 0.0f64);
    for n in 0..=n_max as usize {
        let ki_r = pr[n].k * pr[n].ip;
        let ik_r = pr[n].i * pr[n].kp;
        let ki_s = ps[n].k * ps[n].ip;
        let ik_s = ps[n].i * ps[n].kp;
        let m12 = -r * ki_r - a_const * r * ki_r + a_const * ki_s;
        let m21 = -r * ki_r - a_const * r * ik_r + a_const * ik_s;
        printed = printed.max((m12 - m21).abs());
        let w12 = -r * ki_r - a_const * r * ki_r + a_const * s * ki_s;
        let w21 = -r * ki_r - a_const * r * ik_r + a_const * s * ik_s;
        weighted = weighted.max((w12 - w21).abs() / a_const.max(1.0));
    }
    Ok((printed, weighted))
}

/// `A = max_n max{α_n/β_n, δ_n/ε_n}` for a circular inclusion of radius `r`.
pub fn extension_constant(geometry: &Geometry) -> Result<ExtensionConstant> {
    extension_constant_with(geometry, DEFAULT_N_MAX)
}

pub fn extension_constant_with(geometry: &Geometry, n_max: u32) -> Result<ExtensionConstant> {
    let r = match *geometry {
        Geometry::Circle { radius } => radius,
        Geometry::Rectangle { .. } => {
            return Err(Error::UnsupportedShape("the extension constant is computed for circular inclusions only".into()))
        }
    };
    if 2 * n_max > MAX_ORDER {
        return Err(Error::Config(format!("n_max {n_max}: doubling check would exceed the order cap {MAX_ORDER}")));
    }
    let base = scan(r, n_max)?;
    let doubled = scan(r, 2 * n_max)?;
    let stable = doubled.argmax == base.argmax && ((doubled.a - base.a) / base.a).abs() < 1e-12;
    let (printed, weighted) = hermitian_defects(r, base.a, n_max)?;
    if weighted > 1e-8 {
        return Err(Error::Consistency(format!("extension form not Hermitian: defect {weighted:e}")));
    }
    Ok(ExtensionConstant {
        radius: r,
        a: base.a,
        argmax: base.argmax,
        n_max,
        max_alpha_beta: base.max_ab,
        max_delta_epsilon: base.max_de,
        hermitian_defect_printed: printed,
        hermitian_defect_weighted: weighted,
        stable_under_doubling: stable,
    })
}

/// Where `p_0` in `β` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BetaSource {
    /// `p_0 = ‖ψ_0‖_{H1(P)}` from the cascade.
    #[default]
    Measured,
    /// `p_0 = √θ_P`.
    AreaBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    pub a: f64,
    pub omega: f64,
    pub theta_p: f64,
    pub theta_pbar: f64,
    pub pbar0: f64,
    pub p0: f64,
    pub beta: f64,
    pub xi2_0_abs: f64,
    pub xi2_2_abs: f64,
    pub p2: f64,
}

/// Catalan ratios entering `Q*`, `R*`, `S*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalanCoefficients {
    /// `E(4) = 16/21`.
    pub e4: f64,
    /// `ρ_5^k` for `k = 0..=4`.
    pub rho5: [f64; 5],
    /// `ρ_4^2 = 1/7`.
    pub rho4_2: f64,
}

impl CatalanCoefficients {
    pub fn from_table(table: &CatalanTable) -> Result<Self> {
        let mut rho5 = [0.0; 5];
        for (k, v) in rho5.iter_mut().enumerate() {
            *v = to_f64(&table.ratio_rho(5, k)?);
        }
        Ok(Self { e4: to_f64(&table.even_part(4)?), rho5, rho4_2: to_f64(&table.ratio_rho(4, 2)?) })
    }
}

impl GeometryConstants {
    pub fn new(
        a: f64,
        omega: f64,
        (theta_p, theta_pbar): (f64, f64),
        solution: &SeriesSolution,
        source: BetaSource,
    ) -> Result<Self> {
        if solution.xi2.len() < 3 {
            return Err(Error::Config("geometry constants need the series through xi2_2".into()));
        }
        let pbar0 = solution.norms_pbar[0];
        let p0 = match source {
            BetaSource::Measured => solution.norms_p[0],
            BetaSource::AreaBound => theta_p.sqrt(),
        };
        let xi2_0_abs = solution.xi2[0].abs();
        let beta = pbar0.max(p0).max(xi2_0_abs);
        Ok(Self {
            a,
            omega,
            theta_p,
            theta_pbar,
            pbar0,
            p0,
            beta,
            xi2_0_abs,
            xi2_2_abs: solution.xi2[2].abs(),
            p2: solution.norms_p[2],
        })
    }

    pub fn qstar(&self, j: f64, c: &CatalanCoefficients) -> f64 {
        let (a, om, b, e) = (self.a, self.omega, self.beta, c.e4);
        let [_, r1, r2, r3, r4] = c.rho5;
        let x = 1.0 / j;
        let (x2, x3, x4, x5) = (x * x, x.powi(3), x.powi(4), x.powi(5));
        let eb = e * b;
        let eb2 = e * e * b * b;
        let first = a * (2.0 * eb * x2 * r1 + eb * x3 * r2 + eb * x4 * r3 + eb2 * x4 * r2)
            + 2.0 * eb * x2 * r1
            + 2.0 * eb * x3 * r2
            + eb * x4 * r3
            + eb2 * x4 * r2
            + x2 * r2;
        let second = a * (2.0 * eb * x3 * r2 + 2.0 * eb * x4 * r3 + eb * x5 * r4 + eb2 * x5 * r3)
            + 2.0 * eb * x3 * r2
            + 2.0 * eb * x4 * r3
            + eb * x5 * r4
            + eb2 * x5 * r3
            + x3 * r3
            + 2.0 * x2 * r2;
        om * (first + 2.0 * om * second)
    }

    pub fn rstar(&self, j: f64, c: &CatalanCoefficients) -> f64 {
        let x = 1.0 / j;
        let [_, r1, r2, _, _] = c.rho5;
        self.a * self.qstar(j, c) + c.e4 * self.beta * x * x * r1 + 2.0 * x * r1 + x * x * r2
    }

    pub fn sstar(&self, j: f64, c: &CatalanCoefficients) -> f64 {
        let x = 1.0 / j;
        let [_, r1, r2, r3, _] = c.rho5;
        let (b, e) = (self.beta, c.e4);
        let (sp, sq) = (self.theta_p.sqrt(), self.theta_pbar.sqrt());
        let braces = sq * self.qstar(j, c)
            + sp * (e * b * x * x * r1 + e * e * b * b * x.powi(3) * r1 + e * b * x.powi(3) * r2)
            + sq * (e * b * x * x * r1 + e * sq * b * x.powi(3) * r2 + sp * x.powi(3) * r3);
        4.0 * j * braces
            + sp * ((self.xi2_0_abs * self.rstar(j, c) + self.xi2_2_abs * x * x * c.rho4_2 + self.p2 * x * x * c.rho4_2)
                + XI_THREE_CONSTANT * b)
    }

    pub fn polynomials(&self, j: f64, c: &CatalanCoefficients) -> [f64; 3] {
        [self.qstar(j, c), self.rstar(j, c), self.sstar(j, c)]
    }
}

const POLY_NAMES: [&str; 3] = ["Q*", "R*", "S*"];

fn feasible(k: &GeometryConstants, j: f64, c: &CatalanCoefficients) -> bool {
    k.polynomials(j, c).iter().all(|&v| v <= 1.0)
}

/// Smallest `J` in the bracket with `Q*, R*, S* ≤ 1`, to relative precision `1e-4`.
///
/// The grid scan does not assume monotonicity; bisection then refines the
/// first feasible grid cell, checking each midpoint directly.
pub fn induction_j2(k: &GeometryConstants, c: &CatalanCoefficients) -> Result<f64> {
    let (lo, hi) = J_BRACKET;
    if feasible(k, lo, c) {
        return Ok(lo);
    }
    let steps = 4000;
    let ratio = (hi / lo).powf(1.0 / steps as f64);
    let mut prev = lo;
    for i in 1..=steps {
        let j = lo * ratio.powi(i);
        if feasible(k, j, c) {
            let (mut a, mut b) = (prev, j);
            while (b - a) / b > 1e-5 {
                let mid = 0.5 * (a + b);
                if feasible(k, mid, c) {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(b);
        }
        prev = j;
    }
    let vals = k.polynomials(hi, c);
    let worst = (0..3).max_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap()).unwrap_or(2);
    Err(Error::Certification { binding: POLY_NAMES[worst].into(), value: vals[worst], j: hi })
}

/// `J_1 = max_{1 ≤ m ≤ 4} (q_m / (β C_m))^{1/m}` over `q ∈ {p̄_m, p_m, |ξ²_m|}`, at least `j_min`.
pub fn base_case_j1(pbar: &[f64], p: &[f64], xi_abs: &[f64], beta: f64, j_min: f64) -> Result<f64> {
    if pbar.len() < 5 || p.len() < 5 || xi_abs.len() < 5 {
        return Err(Error::Config("the base case needs orders 0..=4".into()));
    }
    let cat = CatalanTable::shared();
    let mut j: f64 = j_min;
    for m in 1..=4 {
        let cm = cat.get_f64(m)?;
        for q in [pbar[m], p[m], xi_abs[m]] {
            j = j.max((q / (beta * cm)).powf(1.0 / m as f64));
        }
    }
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub m: usize,
    pub pbar: f64,
    pub p: f64,
    pub xi2_abs: f64,
    /// `β C_m J^m`.
    pub bound: f64,
    pub holds: bool,
}

/// Checks `p̄_m, p_m, |ξ²_m| ≤ β C_m J^m` for every computed order up to `M`.
pub fn catalan_audit(solution: &SeriesSolution, beta: f64, j: f64) -> Result<Vec<AuditEntry>> {
    let cat = CatalanTable::shared();
    (0..=solution.order)
        .map(|m| {
            let bound = beta * cat.get_f64(m)? * j.powi(m as i32);
            let (pbar, p, xi2_abs) = (solution.norms_pbar[m], solution.norms_p[m], solution.xi2[m].abs());
            // Order zero holds by the definition of β; allow rounding there.
            let slack = bound * 1e-12;
            let holds = pbar <= bound + slack && p <= bound + slack && xi2_abs <= bound + slack;
            Ok(AuditEntry { m, pbar, p, xi2_abs, bound, holds })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub beta_source: BetaSource,
    pub outer: OuterBoundary,
    pub n_max: u32,
    /// Floor for `J_1` when the measured norms are degenerate.
    pub j_min: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { beta_source: BetaSource::Measured, outer: OuterBoundary::Periodic, n_max: DEFAULT_N_MAX, j_min: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub extension: ExtensionConstant,
    pub poincare: PoincareResult,
    pub constants: GeometryConstants,
    pub catalan: CatalanCoefficients,
    pub j1: f64,
    pub j2: f64,
    pub j: f64,
    /// `R = 1/(4J)`.
    pub radius: f64,
    pub qstar: f64,
    pub rstar: f64,
    pub sstar: f64,
    /// The polynomial closest to one at `J_2`.
    pub binding: String,
    /// `p̄_m, p_m, |ξ²_m| ≤ β C_m J_1^m` for `m ≤ 4`.
    pub base_case_checks: Vec<AuditEntry>,
    /// The same with `J` for every computed order.
    pub audit: Vec<AuditEntry>,
    pub mesh_hash: String,
    pub series_hash: String,
}

impl ConvergenceCertificate {
    pub fn audit_holds(&self) -> bool {
        self.audit.iter().all(|e| e.holds)
    }
}

pub fn series_hash(solution: &SeriesSolution) -> String {
    let json = serde_json::to_string(&solution.manifest()).unwrap_or_default();
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Assembles the certificate for one geometry from its cascade run.
pub fn certificate(problem: &CellProblem, solution: &SeriesSolution, opts: &CertifyOptions) -> Result<ConvergenceCertificate> {
    if solution.order < 4 {
        return Err(Error::Config(format!("certification needs a series of order at least 4, got {}", solution.order)));
    }
    if solution.geometry != problem.mesh.geometry {
        return Err(Error::Config("series and mesh describe different geometries".into()));
    }
    let extension = extension_constant_with(&problem.mesh.geometry, opts.n_max)?;
    let poincare = poincare_constant(&problem.mesh, opts.outer)?;
    let constants = GeometryConstants::new(extension.a, poincare.omega, problem.volume_fractions(), solution, opts.beta_source)?;
    let catalan = CatalanCoefficients::from_table(CatalanTable::shared())?;
    let xi_abs: Vec<f64> = solution.xi2.iter().map(|x| x.abs()).collect();
    let j1 = base_case_j1(&solution.norms_pbar, &solution.norms_p, &xi_abs, constants.beta, opts.j_min)?;
    let j2 = induction_j2(&constants, &catalan)?;
    let j = j1.max(j2);
    let [qstar, rstar, sstar] = constants.polynomials(j, &catalan);
    let at_j2 = constants.polynomials(j2, &catalan);
    let b = (0..3).max_by(|&x, &y| at_j2[x].partial_cmp(&at_j2[y]).unwrap()).unwrap_or(2);
    let cat = CatalanTable::shared();
    let base_case_checks = (0..=4)
        .map(|m| {
            let bound = constants.beta * cat.get_f64(m)? * j1.powi(m as i32);
            let slack = bound * 1e-12;
            let (pbar, p, x) = (solution.norms_pbar[m], solution.norms_p[m], xi_abs[m]);
            Ok(AuditEntry { m, pbar, p, xi2_abs: x, bound, holds: pbar <= bound + slack && p <= bound + slack && x <= bound + slack })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = base_case_checks.iter().find(|e| !e.holds) {
        return Err(Error::Consistency(format!("base case fails at m = {}", bad.m)));
    }
    let audit = catalan_audit(solution, constants.beta, j)?;
    Ok(ConvergenceCertificate {
        extension,
        poincare,
        constants,
        catalan,
        j1,
        j2,
        j,
        radius: 1.0 / (4.0 * j),
        qstar,
        rstar,
        sstar,
        binding: POLY_NAMES[b].into(),
        base_case_checks,
        audit,
        mesh_hash: problem.mesh.content_hash(),
        series_hash: series_hash(solution),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = 4J eta must lie in [0, 1), got {alpha}")));
    }
    Ok(())
}

/// Bound on `|Σ_{m > m0} ξ²_{2m} η^{2m}|`: `β α^{2m0+2} / (1 - α²)`.
pub fn tail_bound_xi(m0: usize, alpha: f64, beta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(beta * alpha.powi(2 * m0 as i32 + 2) / (1.0 - alpha * alpha))
}

/// Bound on `‖Σ_{m > m0} h_m η^m‖_{H1(Q)}`: `2β|h_0| α^{m0+1} / (1 - α)`.
pub fn tail_bound_h(m0: usize, alpha: f64, h0: f64, beta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * beta * h0.abs() * alpha.powi(m0 as i32 + 1) / (1.0 - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_bounds_evaluate() {
        assert!((tail_bound_xi(1, 0.3, 0.79).unwrap() - 0.79 * 0.0081 / 0.91).abs() < 1e-15);
        assert!((tail_bound_h(1, 0.2, 1.0, 0.79).unwrap() - 0.079).abs() < 1e-15);
        assert_eq!(tail_bound_xi(3, 0.0, 0.79).unwrap(), 0.0);
        assert!(tail_bound_h(1, 1.0, 1.0, 0.79).is_err());
        assert!(tail_bound_xi(1, -0.1, 0.79).is_err());
    }

    #[test]
    fn j1_from_constructed_norms() {
        let beta = 0.5;
        let cat = CatalanTable::shared();
        let norms: Vec<f64> = (0..5).map(|m| beta * cat.get_f64(m).unwrap() * 2f64.powi(m as i32)).collect();
        let j = base_case_j1(&norms, &norms, &norms, beta, 1.0).unwrap();
        assert!((j - 2.0).abs() < 1e-12);
        let zeros = vec![0.0; 5];
        assert_eq!(base_case_j1(&zeros, &zeros, &zeros, beta, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn catalan_coefficients_are_exact_ratios() {
        let c = CatalanCoefficients::from_table(CatalanTable::shared()).unwrap();
        assert_eq!(c.e4, 16.0 / 21.0);
        assert_eq!(c.rho5, [1.0, 1.0 / 3.0, 5.0 / 42.0, 1.0 / 21.0, 1.0 / 42.0]);
        assert_eq!(c.rho4_2, 1.0 / 7.0);
    }

    #[test]
    fn rectangles_have_no_extension_constant() {
        let g = Geometry::rectangle(0.2, 0.3).unwrap();
        assert!(matches!(extension_constant(&g), Err(Error::UnsupportedShape(_))));
    }
}
