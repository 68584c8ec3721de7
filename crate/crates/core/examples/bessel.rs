//! Modified Bessel functions and the Wronskian identity at a few points.
//!
//! cargo run --example bessel -- 0.45

use plasmonic::specfun::BesselValue;

fn main() -> plasmonic::Result<()> {
    let x: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.45);
    println!("{:>3} {:>14} {:>14} {:>14} {:>14} {:>10}", "n", "I_n", "K_n", "I_n'", "K_n'", "W + 1");
    for n in [0, 1, 2, 5, 10, 20, 40] {
        let b = BesselValue::new(n, x)?;
        println!(
            "{n:>3} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.1e}",
            b.i_val, b.k_val, b.i_deriv, b.k_deriv, b.wronskian() + 1.0
        );
    }
    Ok(())
}
