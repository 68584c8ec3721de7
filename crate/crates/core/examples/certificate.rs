//! Full convergence certificate for one radius.
//!
//! cargo run --release --example certificate -- 0.3

use plasmonic::bounds::{certificate, CertifyOptions};
use plasmonic::cascade::run_cascade;
use plasmonic::cellfem::{generate_mesh, CellProblem, Geometry};

fn main() -> plasmonic::Result<()> {
    let r = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.3);
    let problem = CellProblem::new(generate_mesh(Geometry::circle(r)?, 0.02)?)?;
    let series = run_cascade(&problem, [1.0, 0.0], 8)?;
    let c = certificate(&problem, &series, &CertifyOptions::default())?;
    let k = &c.constants;
    println!("A = {:.4}  Omega = {:.4}  beta = {:.4}", k.a, k.omega, k.beta);
    println!("J1 = {:.4}  J2 = {:.4}  J = {:.4}  R = 1/{:.2}", c.j1, c.j2, c.j, 4.0 * c.j);
    println!("Q* = {:.4}  R* = {:.4}  S* = {:.4}  binding {}", c.qstar, c.rstar, c.sstar, c.binding);
    for e in &c.audit {
        println!("m = {}  pbar {:.3e}  p {:.3e}  |xi2| {:.3e}  <= {:.3e}  {}", e.m, e.pbar, e.p, e.xi2_abs, e.bound, e.holds);
    }
    Ok(())
}
