use plasmonic::specfun::{bessel_derivs, bessel_i, bessel_k, BesselValue};
use plasmonic::Error;

mod common;
use common::{oracle_i, oracle_k, ARGS, ORDERS};

#[test]
fn production_matches_oracles_on_grid() {
    let mut count = 0;
    for n in ORDERS {
        for x in ARGS {
            let i = bessel_i(n, x).unwrap();
            let k = bessel_k(n, x).unwrap();
            let (oi, ok) = (oracle_i(n, x), oracle_k(n, x));
            assert!(((i - oi) / oi).abs() < 1e-10, "I_{n}({x}) = {i}, oracle {oi}");
            assert!(((k - ok) / ok).abs() < 1e-10, "K_{n}({x}) = {k}, oracle {ok}");
            count += 1;
        }
    }
    assert_eq!(count, 50);
}

#[test]
fn reference_values() {
    assert!((bessel_k(0, 1.0).unwrap() - 0.421_024_438_240_708_3).abs() < 1e-13);
    let (ip, kp) = bessel_derivs(1, 1.0).unwrap();
    // Central differences on the series oracle.
    let d = 1e-6;
    let fd_i = (oracle_i(1, 1.0 + d) - oracle_i(1, 1.0 - d)) / (2.0 * d);
    let fd_k = (oracle_k(1, 1.0 + d) - oracle_k(1, 1.0 - d)) / (2.0 * d);
    assert!((ip - fd_i).abs() < 1e-8 && (ip - 0.700_906_773).abs() < 1e-8);
    assert!((kp - fd_k).abs() < 1e-8 && (kp + 1.022_931_668).abs() < 1e-8);
    let (i0p, k0p) = bessel_derivs(0, 0.7).unwrap();
    assert_eq!(i0p, bessel_i(1, 0.7).unwrap());
    assert_eq!(k0p, -bessel_k(1, 0.7).unwrap());
}

#[test]
fn wronskian_identity() {
    for n in 0..=40 {
        for x in [0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5, 1.0, 3.0, 10.0, 30.0] {
            let w = BesselValue::new(n, x).unwrap().wronskian();
            assert!((w + 1.0).abs() < 1e-10, "n = {n}, x = {x}: {w}");
        }
    }
    let b = BesselValue::new(5, 0.3).unwrap();
    assert!((b.i_val * b.k_deriv - b.i_deriv * b.k_val + 1.0 / 0.3).abs() < 1e-9);
}

#[test]
fn recurrence_consistency() {
    for n in 1..=30 {
        for x in [0.1, 0.45, 2.0, 7.5] {
            let (a, b, c) = (bessel_i(n - 1, x).unwrap(), bessel_i(n, x).unwrap(), bessel_i(n + 1, x).unwrap());
            let rhs = 2.0 * n as f64 / x * b;
            assert!(((a - c - rhs) / rhs).abs() < 1e-10, "n = {n}, x = {x}");
            let (a, b, c) = (bessel_k(n - 1, x).unwrap(), bessel_k(n, x).unwrap(), bessel_k(n + 1, x).unwrap());
            let rhs = 2.0 * n as f64 / x * b;
            assert!(((c - a - rhs) / rhs).abs() < 1e-10, "n = {n}, x = {x}");
        }
    }
}

#[test]
fn r_i_iprime_is_increasing() {
    for n in 0..=20 {
        for k in 1..=9 {
            let r = 0.05 * (k + 1) as f64;
            let i = bessel_i(n, r).unwrap();
            let (ip, _) = bessel_derivs(n, r).unwrap();
            let closed = ((r * r + (n * n) as f64) * i * i / r) + r * ip * ip;
            assert!(closed > 0.0);
            let f = |s: f64| s * bessel_i(n, s).unwrap() * bessel_derivs(n, s).unwrap().0;
            let d = 1e-5 * r;
            let fd = (f(r + d) - f(r - d)) / (2.0 * d);
            assert!((fd - closed).abs() <= 1e-5 * closed.abs().max(1e-300), "n = {n}, r = {r}");
        }
    }
}

#[test]
fn k_increases_with_order() {
    for x in [0.3, 2.0, 15.0] {
        let ks: Vec<f64> = (0..30).map(|n| bessel_k(n, x).unwrap()).collect();
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn invalid_arguments() {
    assert!(matches!(bessel_i(0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(bessel_k(1, -1.0), Err(Error::Domain(_))));
    assert!(matches!(bessel_k(1, f64::NAN), Err(Error::Domain(_))));
    assert!(bessel_i(201, 1.0).is_err());
}
