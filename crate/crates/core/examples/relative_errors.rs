//! Relative error bounds for the two-term approximations.

use plasmonic::effective::{relative_error_h, relative_error_xi};
use plasmonic::reference::RELATIVE_ERROR_LITERALS as P;

fn main() -> plasmonic::Result<()> {
    println!("{:>5} {:>10} {:>10}", "alpha", "R_1h", "R_1xi");
    for k in 1..=6 {
        let a = 0.05 * k as f64;
        let h = relative_error_h(a, P.beta, P.j, P.psi0_norm, P.psi1_norm)?;
        let x = relative_error_xi(a, P.beta, P.j, P.xi2_0, P.xi2_2)?;
        println!("{a:>5.2} {:>9.3}% {:>9.3}%", 100.0 * h, 100.0 * x);
    }
    Ok(())
}
