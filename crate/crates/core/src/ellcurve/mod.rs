//! Weierstrass curves over ℚ and over prime fields.
//!
//! [`CurveQ`] keeps exact rational coefficients. Local data at bad primes
//! comes from Tate's algorithm in [`tate`], and reductions modulo a prime
//! live in [`fp`].

pub mod fp;
pub mod tate;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use fp::{CubicModel, CurveFp, Point, SquareTable};
pub use tate::{tate_conductor, ConductorData, Kodaira, LocalReduction};

/// Weierstrass curve y² + a1xy + a3y = x³ + a2x² + a4x + a6 over ℚ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveQ {
    a: [BigRational; 5],
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl CurveQ {
    /// Builds a curve and rejects singular models.
    pub fn new(a: [BigRational; 5]) -> Result<Self> {
        let e = CurveQ { a };
        if e.discriminant().is_zero() {
            return Err(Error::Singular);
        }
        Ok(e)
    }

    pub fn from_ints<T: Into<BigInt> + Clone>(a: [T; 5]) -> Result<Self> {
        Self::new(a.map(rat))
    }

    pub fn from_bigints(a: &[BigInt; 5]) -> Result<Self> {
        Self::new(a.clone().map(BigRational::from_integer))
    }

    /// Short model y² = x³ + a4·x + a6.
    pub fn short(a4: impl Into<BigInt>, a6: impl Into<BigInt>) -> Result<Self> {
        Self::new([rat(0), rat(0), rat(0), rat(a4), rat(a6)])
    }

    pub fn a1(&self) -> &BigRational {
        &self.a[0]
    }
    pub fn a2(&self) -> &BigRational {
        &self.a[1]
    }
    pub fn a3(&self) -> &BigRational {
        &self.a[2]
    }
    pub fn a4(&self) -> &BigRational {
        &self.a[3]
    }
    pub fn a6(&self) -> &BigRational {
        &self.a[4]
    }
    pub fn a_invariants(&self) -> &[BigRational; 5] {
        &self.a
    }

    /// Integer coefficients if the model is integral.
    pub fn integral_invariants(&self) -> Option<[BigInt; 5]> {
        if self.a.iter().all(|c| c.is_integer()) {
            Some(self.a.clone().map(|c| c.to_integer()))
        } else {
            None
        }
    }

    pub fn b_invariants(&self) -> [BigRational; 4] {
        let [a1, a2, a3, a4, a6] = &self.a;
        let b2 = a1 * a1 + rat(4) * a2;
        let b4 = a1 * a3 + rat(2) * a4;
        let b6 = a3 * a3 + rat(4) * a6;
        let b8 = a1 * a1 * a6 + rat(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        [b2, b4, b6, b8]
    }

    pub fn c4(&self) -> BigRational {
        let [b2, b4, _, _] = self.b_invariants();
        &b2 * &b2 - rat(24) * b4
    }

    pub fn c6(&self) -> BigRational {
        let [b2, b4, b6, _] = self.b_invariants();
        -(&b2 * &b2 * &b2) + rat(36) * &b2 * b4 - rat(216) * b6
    }

    pub fn discriminant(&self) -> BigRational {
        let [b2, b4, b6, b8] = self.b_invariants();
        -(&b2 * &b2 * &b8) - rat(8) * &b4 * &b4 * &b4 - rat(27) * &b6 * &b6
            + rat(9) * &b2 * &b4 * &b6
    }

    pub fn j_invariant(&self) -> Result<BigRational> {
        let d = self.discriminant();
        if d.is_zero() {
            return Err(Error::Singular);
        }
        let c4 = self.c4();
        Ok(&c4 * &c4 * &c4 / d)
    }

    /// Applies x = u²x' + r, y = u³y' + su²x' + t and returns the new model.
    pub fn transform(&self, u: &BigRational, r: &BigRational, s: &BigRational, t: &BigRational) -> Result<Self> {
        if u.is_zero() {
            return invalid("scaling factor u must be nonzero");
        }
        let [a1, a2, a3, a4, a6] = &self.a;
        let two = rat(2);
        let three = rat(3);
        let n1 = a1 + &two * s;
        let n2 = a2 - s * a1 + &three * r - s * s;
        let n3 = a3 + r * a1 + &two * t;
        let n4 = a4 - s * a3 + &two * r * a2 - (t + r * s) * a1 + &three * r * r - &two * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        Ok(CurveQ { a: [n1 / u, n2 / u2, n3 / u3, n4 / u4, n6 / u6] })
    }

    /// An integral model obtained by scaling out denominators.
    pub fn integral_model(&self) -> [BigInt; 5] {
        if let Some(a) = self.integral_invariants() {
            return a;
        }
        let d = self
            .a
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut out: [BigInt; 5] = Default::default();
        let weights = [1u32, 2, 3, 4, 6];
        for i in 0..5 {
            let scaled = &self.a[i] * rat(d.pow(weights[i]));
            debug_assert!(scaled.is_integer());
            out[i] = scaled.to_integer();
        }
        out
    }

    /// The quadratic twist by the squarefree kernel of `d`, as the short model
    /// y² = x³ − 27c4·d²·x − 54c6·d³.
    pub fn quadratic_twist(&self, d: &BigInt) -> Result<Self> {
        if d.is_zero() {
            return invalid("twist parameter must be nonzero");
        }
        let d = squarefree_kernel(d);
        let dr = BigRational::from_integer(d.clone());
        let a4 = rat(-27) * self.c4() * &dr * &dr;
        let a6 = rat(-54) * self.c6() * &dr * &dr * &dr;
        Self::new([rat(0), rat(0), rat(0), a4, a6])
    }

    /// Whether two curves are isomorphic over ℚ (equal minimal models).
    pub fn is_isomorphic(&self, other: &CurveQ) -> Result<bool> {
        if self.j_invariant()? != other.j_invariant()? {
            return Ok(false);
        }
        Ok(tate_conductor(self)?.minimal_model == tate_conductor(other)?.minimal_model)
    }
}

impl fmt::Display for CurveQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Signed squarefree kernel by trial division. Intended for small twist
/// parameters such as divisors of C₁.
pub fn squarefree_kernel(d: &BigInt) -> BigInt {
    let mut n = d.abs();
    let mut k = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= n {
        let mut e = 0u32;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e % 2 == 1 {
            k *= &p;
        }
        p += 1u32;
    }
    k *= n;
    if d.is_negative() {
        -k
    } else {
        k
    }
}
