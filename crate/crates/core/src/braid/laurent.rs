use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

/// Integer Laurent polynomial in `t`. `coeffs[k]` multiplies `t^(low + k)`.
/// Kept trimmed: no zero coefficients at either end; zero has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    low: i64,
    coeffs: Vec<BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { low: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        LaurentPoly::monomial(1, 0)
    }

    /// `c · t^k`
    pub fn monomial(c: i64, k: i64) -> Self {
        LaurentPoly::new(k, vec![BigInt::from(c)])
    }

    pub fn new(low: i64, coeffs: Vec<BigInt>) -> Self {
        let mut p = LaurentPoly { low, coeffs };
        p.trim();
        p
    }

    pub fn from_i64(low: i64, coeffs: &[i64]) -> Self {
        LaurentPoly::new(low, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.low = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn low_degree(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.low)
    }

    pub fn high_degree(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.low + self.coeffs.len() as i64 - 1)
    }

    /// `high - low`; zero for the zero polynomial.
    pub fn breadth(&self) -> u64 {
        self.coeffs.len().saturating_sub(1) as u64
    }

    pub fn coeff(&self, k: i64) -> BigInt {
        let idx = k - self.low;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            BigInt::zero()
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    /// Coefficients from the lowest degree upward.
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        LaurentPoly { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    /// Multiplies by `±t^k` so that the lowest degree is 0 and the leading
    /// coefficient is positive.
    pub fn normalize_unit(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut p = self.shift(-self.low);
        if p.coeffs.last().unwrap().is_negative() {
            p = -p;
        }
        p
    }

    /// Exact division by `d`. Returns `None` when the remainder is nonzero.
    pub fn div_exact(&self, d: &LaurentPoly) -> Option<LaurentPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        let lead = d.coeffs.last().unwrap();
        let dl = d.coeffs.len();
        let mut rem = self.coeffs.clone();
        if rem.len() < dl {
            return None;
        }
        let qlen = rem.len() - dl + 1;
        let mut q = vec![BigInt::zero(); qlen];
        for k in (0..qlen).rev() {
            let top = &rem[k + dl - 1];
            if top.is_zero() {
                continue;
            }
            if !(top % lead).is_zero() {
                return None;
            }
            let f = top / lead;
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[k + j] -= &f * dc;
            }
            q[k] = f;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(LaurentPoly::new(self.low - d.low, q))
    }

    /// Value at `t = 1`.
    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let low = self.low.min(rhs.low);
        let high = self.high_degree().unwrap().max(rhs.high_degree().unwrap());
        let coeffs = (low..=high).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        LaurentPoly::new(low, coeffs)
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { low: self.low, coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs.clone())
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.low + rhs.low, coeffs)
    }
}

impl fmt::Display for LaurentPoly {
    /// Highest degree first, e.g. `t^2 - t + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let k = self.low + idx as i64;
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_mag = !mag.is_one() || k == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(low: i64, c: &[i64]) -> LaurentPoly {
        LaurentPoly::from_i64(low, c)
    }

    #[test]
    fn arithmetic() {
        let a = p(0, &[1, 1]);
        let b = p(0, &[1, -1]);
        assert_eq!(&a * &b, p(0, &[1, 0, -1]));
        assert!((&a - &a).is_zero());
        assert_eq!(&p(-1, &[1]) * &p(1, &[1]), LaurentPoly::one());
    }

    #[test]
    fn division() {
        let num = p(0, &[1, 0, 0, 1]);
        let den = p(0, &[1, 1]);
        assert_eq!(num.div_exact(&den).unwrap(), p(0, &[1, -1, 1]));
        assert!(p(0, &[1, 0, 1]).div_exact(&den).is_none());
    }

    #[test]
    fn normalization_and_display() {
        let q = p(-2, &[-1, 3, -1]);
        let n = q.normalize_unit();
        assert_eq!(n, p(0, &[1, -3, 1]));
        assert_eq!(n.to_string(), "t^2 - 3t + 1");
        assert_eq!(n.breadth(), 2);
        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(p(-1, &[-1]).to_string(), "-t^-1");
    }
}
