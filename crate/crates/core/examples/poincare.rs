//! Poincaré constant of the perforated matrix for both outer conditions.

use plasmonic::cellfem::{generate_mesh, poincare_constant, Geometry, OuterBoundary};

fn main() -> plasmonic::Result<()> {
    let h = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.03);
    for r in [0.1, 0.2, 0.3, 0.4, 0.45] {
        let mesh = generate_mesh(Geometry::circle(r)?, h)?;
        for outer in [OuterBoundary::Periodic, OuterBoundary::Neumann] {
            let p = poincare_constant(&mesh, outer)?;
            println!("r = {r:<4} {outer:?}: lambda_1 = {:.5}  D^2 = {:.5}  Omega = {:.5}", p.lambda1, p.d2, p.omega);
        }
    }
    Ok(())
}
