//! Runs the corrector hierarchy for a circular inclusion and prints the
//! dispersion coefficients and corrector norms.
//!
//! cargo run --release --example cascade_series -- 0.3 0.025 6

use plasmonic::cascade::run_cascade;
use plasmonic::cellfem::{generate_mesh, CellProblem, Geometry};

fn main() -> plasmonic::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let r = args.first().copied().unwrap_or(0.3);
    let h = args.get(1).copied().unwrap_or(0.025);
    let order = args.get(2).map(|&m| m as usize).unwrap_or(6);

    let problem = CellProblem::new(generate_mesh(Geometry::circle(r)?, h)?)?;
    let series = run_cascade(&problem, [1.0, 0.0], order)?;
    println!("r = {r}, h = {h}, dofs = {}", problem.n_dofs());
    println!("<psi_0>_Q = {:.6}", series.psi0_mean);
    for (m, x) in series.xi2.iter().enumerate() {
        println!("xi2_{m:<2} = {x:+.8e}   odd defect {:.1e}", series.odd_defects[m]);
    }
    for m in 0..series.psi.len() {
        println!(
            "m = {m:<2} |psi|_Q = {:.6e}  |psi|_P = {:.6e}  |psi|_Pbar = {:.6e}",
            series.norms_q[m], series.norms_p[m], series.norms_pbar[m]
        );
    }
    println!("max parity defect {:.2e}", series.max_parity_defect());
    Ok(())
}
