//! Generates a conforming cell mesh and writes it to disk.
//!
//! cargo run --release --example mesh -- 0.3 0.02 /tmp/cell.mesh

use std::path::PathBuf;

use plasmonic::cellfem::{generate_mesh, io, Geometry};

fn main() -> plasmonic::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let r = args.first().and_then(|a| a.parse().ok()).unwrap_or(0.3);
    let h = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(0.02);
    let mesh = generate_mesh(Geometry::circle(r)?, h)?;
    let (tp, tpb) = mesh.volume_fractions();
    println!("{} nodes, {} triangles", mesh.n_nodes(), mesh.triangles.len());
    println!("theta_P = {tp:.6} (exact {:.6}), theta_Pbar = {tpb:.6}", std::f64::consts::PI * r * r);
    println!("interface length {:.6} (exact {:.6})", mesh.interface_length(), std::f64::consts::TAU * r);
    println!("half-turn symmetry defect {:.1e}", mesh.symmetry_defect());
    if let Some(path) = args.get(2).map(PathBuf::from) {
        let meta = io::save_mesh(&mesh, &path)?;
        println!("wrote {} ({})", path.display(), meta.hash);
    }
    Ok(())
}
