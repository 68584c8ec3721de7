//! Samples the first dispersion branch inside the certified disc and writes CSV to stdout.

use plasmonic::bounds::{certificate, CertifyOptions};
use plasmonic::cascade::run_cascade;
use plasmonic::cellfem::{generate_mesh, CellProblem, Geometry};
use plasmonic::effective::{dispersion_branch, physical_scales, write_csv};

fn main() -> plasmonic::Result<()> {
    let r = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.45);
    let problem = CellProblem::new(generate_mesh(Geometry::circle(r)?, 0.02)?)?;
    let series = run_cascade(&problem, [1.0, 0.0], 8)?;
    let cert = certificate(&problem, &series, &CertifyOptions::default())?;
    let etas: Vec<f64> = (0..=8).map(|k| cert.radius * k as f64 / 8.0 * 0.95).collect();
    let points = dispersion_branch(&problem, &series, &cert, &etas)?;
    let s = physical_scales(cert.radius, 1e-7)?;
    eprintln!("R = 1/{:.1}; lambda_m = {:.1} um; k_M = {:.2e}/m", 1.0 / cert.radius, s.lambda_m * 1e6, s.k_max);
    write_csv(std::io::stdout(), &points)
}
