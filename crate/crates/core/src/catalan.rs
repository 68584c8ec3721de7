//! Exact Catalan numbers and the ratios built from them.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_INDEX: usize = 64;

/// `C_0 ..= C_M`, built from the convolution recursion and checked against
/// the closed form at construction.
#[derive(Debug, Clone)]
pub struct CatalanTable {
    values: Vec<BigUint>,
}

/// `C_m` through the convolution `C_{m+1} = Σ C_{m-l} C_l`.
pub fn by_recursion(max_index: usize) -> Vec<BigUint> {
    let mut c: Vec<BigUint> = vec![BigUint::one()];
    for m in 0..max_index {
        let next = (0..=m).fold(BigUint::zero(), |acc, l| acc + &c[m - l] * &c[l]);
        c.push(next);
    }
    c
}

/// `binomial(2m, m) / (m + 1)`.
pub fn by_closed_form(m: usize) -> BigUint {
    let mut binom = BigUint::one();
    for k in 0..m {
        binom = binom * BigUint::from(2 * m - k) / BigUint::from(k + 1);
    }
    binom / BigUint::from(m + 1)
}

/// `C_m`, computed both ways.
pub fn catalan(m: usize) -> Result<BigUint> {
    let rec = by_recursion(m).pop().expect("non-empty");
    let closed = by_closed_form(m);
    if rec != closed {
        return Err(Error::Consistency(format!("Catalan C_{m}: recursion and closed form differ")));
    }
    Ok(rec)
}

fn rational(n: &BigUint, d: &BigUint) -> BigRational {
    BigRational::new(n.clone().into(), d.clone().into())
}

impl CatalanTable {
    pub fn new(max_index: usize) -> Result<Self> {
        let values = by_recursion(max_index);
        for (m, v) in values.iter().enumerate() {
            if *v != by_closed_form(m) {
                return Err(Error::Consistency(format!("Catalan C_{m}: recursion and closed form differ")));
            }
        }
        Ok(Self { values })
    }

    /// Process-wide table up to [`DEFAULT_MAX_INDEX`].
    pub fn shared() -> &'static CatalanTable {
        static TABLE: OnceLock<CatalanTable> = OnceLock::new();
        TABLE.get_or_init(|| CatalanTable::new(DEFAULT_MAX_INDEX).expect("Catalan table"))
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    fn check(&self, m: usize) -> Result<()> {
        if m > self.max_index() {
            return Err(Error::Index(format!("index {m} beyond table size {}", self.max_index())));
        }
        Ok(())
    }

    pub fn get(&self, m: usize) -> Result<&BigUint> {
        self.check(m)?;
        Ok(&self.values[m])
    }

    pub fn get_f64(&self, m: usize) -> Result<f64> {
        Ok(self.get(m)?.to_f64().unwrap_or(f64::INFINITY))
    }

    /// `ρ_m^k = C_{m-k} / C_m`.
    pub fn ratio_rho(&self, m: usize, k: usize) -> Result<BigRational> {
        if k > m {
            return Err(Error::Index(format!("rho requires k <= m, got k={k}, m={m}")));
        }
        self.check(m)?;
        Ok(rational(&self.values[m - k], &self.values[m]))
    }

    fn convolution(&self, n: usize, even_only: bool) -> BigUint {
        (0..=n)
            .filter(|l| !even_only || l % 2 == 0)
            .fold(BigUint::zero(), |acc, l| acc + &self.values[n - l] * &self.values[l])
    }

    /// Even-index share `E(n)` of the convolution `Σ C_{n-l} C_l`.
    pub fn even_part(&self, n: usize) -> Result<BigRational> {
        self.check(n)?;
        Ok(rational(&self.convolution(n, true), &self.convolution(n, false)))
    }

    /// `C_{m+1} / C_m`.
    pub fn successor_ratio(&self, m: usize) -> Result<BigRational> {
        self.check(m + 1)?;
        Ok(rational(&self.values[m + 1], &self.values[m]))
    }

    /// `Σ_l C_{2m-2l} C_{2l}`, which equals `4^m C_m`.
    pub fn even_convolution(&self, m: usize) -> Result<BigUint> {
        self.check(2 * m)?;
        Ok((0..=m).fold(BigUint::zero(), |acc, l| acc + &self.values[2 * m - 2 * l] * &self.values[2 * l]))
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_values() {
        assert_eq!(catalan(0).unwrap(), BigUint::from(1u32));
        assert_eq!(catalan(5).unwrap(), BigUint::from(42u32));
        assert_eq!(catalan(10).unwrap(), BigUint::from(16796u32));
    }

    #[test]
    fn rho_table_row_five() {
        let t = CatalanTable::shared();
        let expected = [q(1, 1), q(14, 42), q(5, 42), q(2, 42), q(1, 42), q(1, 42)];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(&t.ratio_rho(5, k).unwrap(), e, "k = {k}");
        }
        assert!(matches!(t.ratio_rho(3, 4), Err(Error::Index(_))));
    }

    #[test]
    fn even_part_values() {
        let t = CatalanTable::shared();
        assert_eq!(t.even_part(3).unwrap(), q(1, 2));
        assert_eq!(t.even_part(4).unwrap(), q(16, 21));
        assert!(t.even_part(6).unwrap() < t.even_part(4).unwrap());
    }

    #[test]
    fn successor_ratio_formula() {
        let t = CatalanTable::shared();
        assert_eq!(t.successor_ratio(0).unwrap(), q(1, 1));
        assert_eq!(t.successor_ratio(4).unwrap(), q(3, 1));
        for m in 0..60 {
            let m = m as i64;
            assert_eq!(t.successor_ratio(m as usize).unwrap(), q(4, 1) - q(6, m + 2));
        }
    }

    #[test]
    fn out_of_table() {
        let t = CatalanTable::new(8).unwrap();
        assert!(t.get(9).is_err());
        assert!(t.even_part(9).is_err());
    }
}
