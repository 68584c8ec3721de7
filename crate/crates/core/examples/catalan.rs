//! Exact Catalan numbers and the ratios used by the induction bound.

use plasmonic::bounds::CatalanCoefficients;
use plasmonic::catalan::{to_f64, CatalanTable};

fn main() -> plasmonic::Result<()> {
    let t = CatalanTable::shared();
    for m in [0, 1, 2, 5, 10, 30, 60] {
        println!("C_{m:<2} = {}", t.get(m)?);
    }
    for n in 1..=9 {
        let e = t.even_part(n)?;
        println!("E({n}) = {e} = {:.6}", to_f64(&e));
    }
    let c = CatalanCoefficients::from_table(t)?;
    println!("rho_5^k = {:?}", c.rho5);
    println!("rho_4^2 = {}  E(4) = {}", c.rho4_2, c.e4);
    Ok(())
}
