//! Closed real intervals with 128-bit endpoints.
//!
//! astro-float rounds every operation to nearest, so each computed endpoint
//! is pushed outward by `2^-120` of its magnitude. That slack is over a
//! hundred ulps, far more than the half ulp lost in the operation itself.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use crate::error::{invalid, Result};

const PREC: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn slack(x: &BigFloat) -> BigFloat {
    let eps = BigFloat::from_f64(2f64.powi(-120), PREC);
    let mag = if x.is_negative() { x.neg() } else { x.clone() };
    mag.mul(&eps, PREC, RM)
}

fn down(x: BigFloat) -> BigFloat {
    if x.is_zero() {
        return x;
    }
    let s = slack(&x);
    x.sub(&s, PREC, RM)
}

fn up(x: BigFloat) -> BigFloat {
    if x.is_zero() {
        return x;
    }
    let s = slack(&x);
    x.add(&s, PREC, RM)
}

fn lt(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b).is_some_and(|c| c < 0)
}

fn min_of(v: Vec<BigFloat>) -> BigFloat {
    v.into_iter().reduce(|a, b| if lt(&b, &a) { b } else { a }).unwrap()
}

fn max_of(v: Vec<BigFloat>) -> BigFloat {
    v.into_iter().reduce(|a, b| if lt(&a, &b) { b } else { a }).unwrap()
}

/// Nearest `f64` to an endpoint, for display only.
fn to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _, sign, exp, _)) => {
            let top = words.last().copied().unwrap_or(0) as f64;
            let v = top * 2f64.powi(exp - 64);
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

/// `[lo, hi]` containing the exact value of whatever was computed.
#[derive(Clone, Debug)]
pub struct Interval {
    lo: BigFloat,
    hi: BigFloat,
}

impl Interval {
    fn exact(x: BigFloat) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    fn rounded(x: BigFloat) -> Self {
        Interval { lo: down(x.clone()), hi: up(x) }
    }

    pub fn from_u64(n: u64) -> Self {
        Self::exact(BigFloat::from_u64(n, PREC))
    }

    pub fn from_i64(n: i64) -> Self {
        Self::exact(BigFloat::from_i64(n, PREC))
    }

    /// A decimal literal such as `-0.49` or `385.38`, enclosed exactly.
    pub fn decimal(s: &str) -> Result<Self> {
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, t),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return invalid(format!("not a decimal number: {s:?}"));
        }
        let digits: i128 = format!("{int}{frac}").parse().map_err(|_| crate::Error::InvalidArgument(format!("decimal {s:?} too long")))?;
        let num = Self::exact(BigFloat::from_i128(if neg { -digits } else { digits }, PREC));
        let den = Self::exact(BigFloat::from_i128(10i128.pow(frac.len() as u32), PREC));
        num.div(&den)
    }

    pub fn lo(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn hi(&self) -> f64 {
        to_f64(&self.hi)
    }

    pub fn mid(&self) -> f64 {
        (self.lo() + self.hi()) / 2.0
    }

    pub fn add(&self, o: &Self) -> Self {
        Interval { lo: down(self.lo.add(&o.lo, PREC, RM)), hi: up(self.hi.add(&o.hi, PREC, RM)) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Interval { lo: down(self.lo.sub(&o.hi, PREC, RM)), hi: up(self.hi.sub(&o.lo, PREC, RM)) }
    }

    pub fn neg(&self) -> Self {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prods =
            [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)].map(|(a, b)| a.mul(b, PREC, RM));
        Interval { lo: down(min_of(prods.to_vec())), hi: up(max_of(prods.to_vec())) }
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if !o.lo.is_positive() && !o.hi.is_negative() || o.lo.is_zero() || o.hi.is_zero() {
            return invalid("division by an interval containing zero");
        }
        let qs =
            [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)].map(|(a, b)| a.div(b, PREC, RM));
        Ok(Interval { lo: down(min_of(qs.to_vec())), hi: up(max_of(qs.to_vec())) })
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::from_u64(1), |acc, _| acc.mul(self))
    }

    pub fn ln(&self) -> Result<Self> {
        if !self.lo.is_positive() || self.lo.is_zero() {
            return invalid("logarithm of a non-positive interval");
        }
        CONSTS.with(|cc| {
            let mut cc = cc.borrow_mut();
            let lo = self.lo.ln(PREC, RM, &mut cc);
            let hi = self.hi.ln(PREC, RM, &mut cc);
            Ok(Interval { lo: down(lo), hi: up(hi) })
        })
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo.is_negative() {
            return invalid("square root of a negative interval");
        }
        Ok(Interval { lo: down(self.lo.sqrt(PREC, RM)), hi: up(self.hi.sqrt(PREC, RM)) })
    }

    pub fn max(&self, o: &Self) -> Self {
        Interval { lo: max_of(vec![self.lo.clone(), o.lo.clone()]), hi: max_of(vec![self.hi.clone(), o.hi.clone()]) }
    }

    /// Certainly `self <= o`: every point of self is at most every point of o.
    pub fn certainly_le(&self, o: &Self) -> bool {
        !lt(&o.lo, &self.hi)
    }

    /// Certainly `self < o`.
    pub fn certainly_lt(&self, o: &Self) -> bool {
        lt(&self.hi, &o.lo)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let v = BigFloat::from_f64(x, PREC);
        !lt(&v, &self.lo) && !lt(&self.hi, &v)
    }

    /// Ordering of the two intervals when they do not overlap.
    pub fn compare(&self, o: &Self) -> Option<Ordering> {
        if self.certainly_lt(o) {
            Some(Ordering::Less)
        } else if o.certainly_lt(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// The rounded value `x` itself, widened to an enclosure.
    pub fn from_f64_nearby(x: f64) -> Self {
        Self::rounded(BigFloat::from_f64(x, PREC))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.9e}, {:.9e}]", self.lo(), self.hi())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encloses_known_values() {
        let two = Interval::from_u64(2);
        let ln2 = two.ln().unwrap();
        assert!((ln2.mid() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(ln2.certainly_lt(&Interval::from_f64_nearby(0.6931471805599454)));
        assert!(Interval::from_f64_nearby(0.6931471805599452).certainly_lt(&ln2));
        let r = two.sqrt().unwrap();
        assert!(r.mul(&r).contains_f64(2.0));
        assert_eq!(Interval::from_u64(3).mid(), 3.0);
        assert_eq!(Interval::from_i64(-5).mid(), -5.0);
    }

    #[test]
    fn decimals() {
        let d = Interval::decimal("-0.49").unwrap();
        assert!((d.mid() + 0.49).abs() < 1e-16);
        assert!(Interval::decimal("-0.5").unwrap().certainly_lt(&d));
        assert!(d.hi() < 0.0);
        let d = Interval::decimal("385.38").unwrap();
        assert!((d.mid() - 385.38).abs() < 1e-12);
        assert!(Interval::decimal("1e5").is_err());
        assert!(Interval::decimal(".").is_err());
        assert_eq!(Interval::decimal("486").unwrap().mid(), 486.0);
    }

    #[test]
    fn arithmetic_is_outward() {
        let third = Interval::from_u64(1).div(&Interval::from_u64(3)).unwrap();
        let back = third.mul(&Interval::from_u64(3));
        assert!(back.contains_f64(1.0));
        let z = third.sub(&third);
        assert!(z.contains_f64(0.0));
        assert!(Interval::from_u64(1).div(&z).is_err());
        assert!(z.ln().is_err());
        let neg = Interval::from_i64(-2).mul(&third);
        assert!(neg.hi() < 0.0 && (neg.mid() + 2.0 / 3.0).abs() < 1e-16);
    }
}
