//! Residual of the truncated series in the full frequency-dependent problem.

use plasmonic::cascade::{fitted_order, run_cascade, validate_master_residual_many};
use plasmonic::cellfem::{generate_mesh, CellProblem, Geometry};

fn main() -> plasmonic::Result<()> {
    let problem = CellProblem::new(generate_mesh(Geometry::circle(0.3)?, 0.03)?)?;
    let series = run_cascade(&problem, [1.0, 0.0], 4)?;
    // An uncertified stand-in radius, large enough for the slope to show.
    let radius = 0.5;
    let etas = [0.4, 0.2, 0.1, 0.05];
    let reports = validate_master_residual_many(&problem, &series, &etas, radius, 6, 7)?;
    for r in &reports {
        println!("eta = {:<5} residual {:.3e}  constant probe {:.1e}", r.eta, r.max_residual, r.constant_residual);
    }
    println!("fitted order {:.2} (truncation {})", fitted_order(&reports), series.order);
    Ok(())
}
