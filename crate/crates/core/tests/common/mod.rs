//! Independent Bessel oracles shared by the test targets.

fn ln_fact(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Ascending series with every term built from logarithms.
pub fn oracle_i(n: u32, x: f64) -> f64 {
    (0..400u32)
        .map(|k| ((2 * k + n) as f64 * (0.5 * x).ln() - ln_fact(k) - ln_fact(n + k)).exp())
        .sum()
}

/// `∫_0^∞ exp(-x cosh t) cosh(nt) dt` by the trapezoid rule, which converges
/// geometrically for this even, analytic, doubly decaying integrand.
pub fn oracle_k(n: u32, x: f64) -> f64 {
    let ln_f = |t: f64| {
        let nt = n as f64 * t;
        -x * t.cosh() + nt + (-2.0 * nt).exp().ln_1p() - std::f64::consts::LN_2
    };
    let step = 0.002;
    let peak = (1..200_000).map(|k| ln_f(k as f64 * step)).fold(ln_f(0.0), f64::max);
    let mut sum = 0.5 * (ln_f(0.0) - peak).exp();
    let mut k = 1;
    loop {
        let t = k as f64 * step;
        let v = (ln_f(t) - peak).exp();
        sum += v;
        if v < 1e-22 * sum && x * t.sinh() > n as f64 {
            break;
        }
        k += 1;
    }
    sum * step * peak.exp()
}

pub const ORDERS: [u32; 10] = [0, 1, 2, 3, 4, 5, 7, 10, 15, 20];
pub const ARGS: [f64; 5] = [0.05, 0.45, 1.9, 2.5, 12.0];
