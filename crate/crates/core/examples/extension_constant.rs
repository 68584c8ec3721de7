//! Extension constant of a circular inclusion from the Bessel series.

use plasmonic::bounds::extension_constant;
use plasmonic::cellfem::Geometry;

fn main() -> plasmonic::Result<()> {
    for r in [0.1, 0.2, 0.3, 0.4, 0.45] {
        let e = extension_constant(&Geometry::circle(r)?)?;
        println!(
            "r = {r:<4} A = {:.4}  argmax n = {}  stable = {}  weighted Hermitian defect {:.1e}",
            e.a, e.argmax, e.stable_under_doubling, e.hermitian_defect_weighted
        );
    }
    Ok(())
}
