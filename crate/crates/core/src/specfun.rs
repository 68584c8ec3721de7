//! Modified Bessel functions of integer order and real positive argument.
//!
//! `I_n` uses the ascending series for small arguments and a ratio
//! continued fraction (backward recurrence) normalized by `I_0` otherwise.
//! `K_0`, `K_1` come from their logarithmic series or Steed's continued
//! fraction, and higher orders from upward recurrence.
//!
//! The `scaled_*` variants divide out `σ_n(x) = (x/2)^n / n!`, which keeps
//! products of `I_n` and `K_n` at two different radii representable for
//! orders where the plain values over- or underflow.

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 200;
pub const MAX_ARGUMENT: f64 = 50.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub order: u32,
    pub argument: f64,
    pub i_val: f64,
    pub k_val: f64,
    pub i_deriv: f64,
    pub k_deriv: f64,
}

impl BesselValue {
    pub fn new(n: u32, x: f64) -> Result<Self> {
        let i_val = bessel_i(n, x)?;
        let k_val = bessel_k(n, x)?;
        let (i_deriv, k_deriv) = bessel_derivs(n, x)?;
        Ok(Self { order: n, argument: x, i_val, k_val, i_deriv, k_deriv })
    }

    /// `x (I_n K_n' - I_n' K_n)`, which is identically -1.
    pub fn wronskian(&self) -> f64 {
        self.argument * (self.i_val * self.k_deriv - self.i_deriv * self.k_val)
    }
}

fn check_args(n: u32, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be positive, got {x}")));
    }
    if x > MAX_ARGUMENT {
        return Err(Error::Domain(format!("Bessel argument {x} above {MAX_ARGUMENT}")));
    }
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("Bessel order {n} above cap {MAX_ORDER}")));
    }
    Ok(())
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn from_log(ln_val: f64, what: &str, n: u32, x: f64) -> Result<f64> {
    if ln_val > f64::MAX.ln() {
        return Err(Error::Range(format!("{what}_{n}({x}) overflows")));
    }
    if ln_val < f64::MIN_POSITIVE.ln() {
        return Err(Error::Range(format!("{what}_{n}({x}) underflows")));
    }
    Ok(ln_val.exp())
}

/// `I_n(x) / σ_n(x)` by the ascending series; every term is positive.
pub fn scaled_i(n: u32, x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= y / (k as f64 * (n + k) as f64);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
    }
}

fn i0_series(x: f64) -> f64 {
    scaled_i(0, x)
}

/// `I_n(x)`.
pub fn bessel_i(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if n == 0 {
        return Ok(i0_series(x));
    }
    if x <= SERIES_LIMIT {
        let ln_sigma = n as f64 * (0.5 * x).ln() - ln_factorial(n);
        return from_log(ln_sigma + scaled_i(n, x).ln(), "I", n, x);
    }
    // Ratios I_k / I_{k-1} from the backward continued fraction.
    let start = n + 2 * (x.ceil() as u32) + 60;
    let mut ratio = 0.0;
    let mut ln_prod = 0.0;
    for k in (1..=start).rev() {
        ratio = 1.0 / (2.0 * k as f64 / x + ratio);
        if k <= n {
            ln_prod += ratio.ln();
        }
    }
    from_log(i0_series(x).ln() + ln_prod, "I", n, x)
}

fn k0_k1(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let y = 0.25 * x * x;
        let lx = (0.5 * x).ln();
        let mut t = 1.0;
        let mut harmonic = 0.0;
        let mut i0 = 0.0;
        let mut s0 = 0.0;
        let mut k = 0u32;
        while k == 0 || t > 1e-18 * i0 {
            if k > 0 {
                harmonic += 1.0 / k as f64;
                t *= y / (k as f64 * k as f64);
            }
            i0 += t;
            s0 += t * harmonic;
            k += 1;
        }
        let k0 = -(lx + EULER_GAMMA) * i0 + s0;

        let mut t = 1.0;
        let mut psi1 = -EULER_GAMMA;
        let mut psi2 = 1.0 - EULER_GAMMA;
        let mut i1 = 0.0;
        let mut s1 = 0.0;
        let mut k = 0u32;
        loop {
            i1 += t;
            s1 += (psi1 + psi2) * t;
            k += 1;
            t *= y / (k as f64 * (k + 1) as f64);
            psi1 += 1.0 / k as f64;
            psi2 += 1.0 / (k + 1) as f64;
            if t < 1e-18 * i1 {
                break;
            }
        }
        let k1 = 1.0 / x + lx * 0.5 * x * i1 - 0.25 * x * s1;
        (k0, k1)
    } else {
        // Steed's CF2 for order zero.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 1..10_000 {
            a -= 2.0 * i as f64;
            c = -a * c / (i as f64 + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        h *= a1;
        let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        let k1 = k0 * (x + 0.5 - h) / x;
        (k0, k1)
    }
}

/// `K_n(x)`.
pub fn bessel_k(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    let (mut km, mut k) = k0_k1(x);
    if n == 0 {
        return Ok(km);
    }
    for j in 1..n {
        let next = km + 2.0 * j as f64 / x * k;
        km = k;
        k = next;
        if !k.is_finite() {
            return Err(Error::Range(format!("K_{n}({x}) overflows")));
        }
    }
    Ok(k)
}

/// `(I_n'(x), K_n'(x))`.
pub fn bessel_derivs(n: u32, x: f64) -> Result<(f64, f64)> {
    check_args(n, x)?;
    if n == 0 {
        return Ok((bessel_i(1, x)?, -bessel_k(1, x)?));
    }
    let ip = 0.5 * (bessel_i(n - 1, x)? + bessel_i(n + 1, x)?);
    let kp = -0.5 * (bessel_k(n - 1, x)? + bessel_k(n + 1, x)?);
    Ok((ip, kp))
}

/// `K_n(x) σ_n(x)` for `n = 0..=n_max`, by the scaled upward recurrence.
pub fn scaled_k_sequence(n_max: u32, x: f64) -> Vec<f64> {
    let (k0, k1) = k0_k1(x);
    let mut out = vec![k0];
    if n_max >= 1 {
        out.push(k1 * 0.5 * x);
    }
    for n in 1..n_max as usize {
        let nf = n as f64;
        let next = out[n - 1] * x * x / (4.0 * nf * (nf + 1.0)) + nf / (nf + 1.0) * out[n];
        out.push(next);
    }
    out
}

/// `I_n(x)/σ_n`, `I_n'(x)/σ_n`, `K_n(x)σ_n`, `K_n'(x)σ_n` at one order.
#[derive(Debug, Clone, Copy)]
pub struct ScaledPair {
    pub i: f64,
    pub ip: f64,
    pub k: f64,
    pub kp: f64,
}

pub fn scaled_pairs(n_max: u32, x: f64) -> Result<Vec<ScaledPair>> {
    check_args(0, x)?;
    let ks = scaled_k_sequence(n_max + 1, x);
    let is: Vec<f64> = (0..=n_max + 1).map(|n| scaled_i(n, x)).collect();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max as usize {
        let nf = n as f64;
        let ip = is[n + 1] * 0.5 * x / (nf + 1.0) + nf / x * is[n];
        let kp = if n == 0 {
            -ks[1] * 2.0 / x
        } else {
            -ks[n - 1] * 0.5 * x / nf - nf / x * ks[n]
        };
        out.push(ScaledPair { i: is[n], ip, k: ks[n], kp });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_limits() {
        assert!((bessel_i(0, 1e-12).unwrap() - 1.0).abs() < 1e-15);
        assert!(bessel_i(1, 1e-12).unwrap() < 1e-11);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(bessel_i(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(2, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i(201, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn range_errors_are_signalled() {
        assert!(matches!(bessel_k(200, 0.01), Err(Error::Range(_))));
        assert!(matches!(bessel_i(200, 0.01), Err(Error::Range(_))));
    }

    #[test]
    fn scaled_values_match_plain() {
        for &x in &[0.3, 1.7, 4.0] {
            let pairs = scaled_pairs(12, x).unwrap();
            for (n, p) in pairs.iter().enumerate() {
                let n = n as u32;
                let sigma = (n as f64 * (0.5 * x).ln() - ln_factorial(n)).exp();
                let (ip, kp) = bessel_derivs(n, x).unwrap();
                assert!((p.i * sigma / bessel_i(n, x).unwrap() - 1.0).abs() < 1e-12);
                assert!((p.k / sigma / bessel_k(n, x).unwrap() - 1.0).abs() < 1e-12);
                assert!((p.ip * sigma / ip - 1.0).abs() < 1e-12);
                assert!((p.kp / sigma / kp - 1.0).abs() < 1e-12);
            }
        }
    }
}
