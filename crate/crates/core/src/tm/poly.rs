//! Homogeneous binary forms with integer coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};

/// `sum_i coeffs[i] * U^(d-i) * V^i` with `d = coeffs.len() - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BivariateIntPoly {
    coeffs: Vec<BigInt>,
}

impl BivariateIntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("a form needs at least one coefficient");
        }
        Ok(BivariateIntPoly { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(degree: u32) -> Self {
        BivariateIntPoly { coeffs: vec![BigInt::zero(); degree as usize + 1] }
    }

    /// The form `U`.
    pub fn u() -> Self {
        BivariateIntPoly { coeffs: vec![BigInt::one(), BigInt::zero()] }
    }

    /// The form `V`.
    pub fn v() -> Self {
        BivariateIntPoly { coeffs: vec![BigInt::zero(), BigInt::one()] }
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    /// Coefficient of `U^(d-i) V^i`.
    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, u: &BigInt, v: &BigInt) -> BigInt {
        // Horner in U/V, homogenised
        let mut acc = BigInt::zero();
        let mut vpow = BigInt::one();
        let d = self.coeffs.len();
        let mut upows = vec![BigInt::one(); d];
        for i in 1..d {
            upows[i] = &upows[i - 1] * u;
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc += c * &upows[d - 1 - i] * &vpow;
            }
            vpow *= v;
        }
        acc
    }

    pub fn eval_i64(&self, u: i64, v: i64) -> BigInt {
        self.eval(&BigInt::from(u), &BigInt::from(v))
    }

    /// Non-negative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        BivariateIntPoly { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Exact division of every coefficient; `None` if `k` does not divide.
    pub fn div_exact(&self, k: &BigInt) -> Option<Self> {
        if k.is_zero() {
            return None;
        }
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(BivariateIntPoly { coeffs: out })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree() != other.degree() {
            return invalid("forms of different degree");
        }
        Ok(BivariateIntPoly {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-BigInt::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        BivariateIntPoly { coeffs }
    }

    /// Divides by `V^e`; `None` if the form is not divisible.
    pub fn div_v_power(&self, e: usize) -> Option<Self> {
        if e >= self.coeffs.len() || self.coeffs[..e].iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(BivariateIntPoly { coeffs: self.coeffs[e..].to_vec() })
    }

    /// `F(U, s)` as a univariate polynomial, coefficients from degree 0 up.
    pub fn specialise_v(&self, s: &BigInt) -> Vec<BigInt> {
        let d = self.coeffs.len() - 1;
        let mut out = vec![BigInt::zero(); d + 1];
        let mut spow = BigInt::one();
        for (i, c) in self.coeffs.iter().enumerate() {
            out[d - i] = c * &spow;
            spow *= s;
        }
        out
    }
}

impl fmt::Display for BivariateIntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.coeffs.len() - 1;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let mono = monomial(d - i, i);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn monomial(eu: usize, ev: usize) -> String {
    let part = |name: &str, e: usize| match e {
        0 => String::new(),
        1 => name.to_string(),
        _ => format!("{name}^{e}"),
    };
    match (part("U", eu), part("V", ev)) {
        (a, b) if a.is_empty() => b,
        (a, b) if b.is_empty() => a,
        (a, b) => format!("{a}*{b}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_display() {
        // 3U^2 - 7V^2
        let f = BivariateIntPoly::from_i64(&[3, 0, -7]).unwrap();
        assert_eq!(f.eval_i64(2, 1), BigInt::from(5));
        assert_eq!(f.to_string(), "3*U^2 - 7*V^2");
        assert_eq!(f.degree(), 2);
        let g = f.mul(&BivariateIntPoly::v());
        assert_eq!(g.degree(), 3);
        assert_eq!(g.div_v_power(1).unwrap(), f);
        assert!(f.div_v_power(1).is_none());
        assert_eq!(f.specialise_v(&BigInt::from(2)), vec![BigInt::from(-28), BigInt::zero(), BigInt::from(3)]);
    }

    #[test]
    fn content_and_division() {
        let f = BivariateIntPoly::from_i64(&[6, -4, 10]).unwrap();
        assert_eq!(f.content(), BigInt::from(2));
        assert_eq!(f.div_exact(&BigInt::from(2)).unwrap().coeffs()[2], BigInt::from(5));
        assert!(f.div_exact(&BigInt::from(4)).is_none());
        assert!(BivariateIntPoly::new(vec![]).is_err());
    }
}
