//! Quasistatic and frequency-dependent effective properties.

use plasmonic::bounds::{certificate, CertifyOptions};
use plasmonic::cascade::run_cascade;
use plasmonic::cellfem::{generate_mesh, CellProblem, Geometry};
use plasmonic::effective::effective_properties;

fn main() -> plasmonic::Result<()> {
    for r in [0.2, 0.45] {
        let problem = CellProblem::new(generate_mesh(Geometry::circle(r)?, 0.025)?)?;
        let series = run_cascade(&problem, [1.0, 0.0], 6)?;
        let cert = certificate(&problem, &series, &CertifyOptions::default())?;
        for frac in [0.0, 0.5, 0.9] {
            let p = effective_properties(&problem, &series, &cert, frac * cert.radius)?;
            println!(
                "r = {r:<4} eta = {:.5}  mu_qs {:.5}  n2_eff {:.6}  mu_eff {:.6}  eps_eff {:.6}  |Im mu| {:.1e}",
                p.eta, p.mu_qs, p.n2_eff, p.mu_eff, p.eps_eff, p.mu_imag
            );
        }
    }
    Ok(())
}
