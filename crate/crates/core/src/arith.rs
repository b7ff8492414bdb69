//! Integer and prime-field primitives.
//!
//! Field elements are plain `u64` values below the modulus; products go
//! through `u128`. Every prime used by the sieves is below `2^64`, so the
//! deterministic Miller-Rabin witness set in [`is_prime`] is a proof of
//! primality, not a probabilistic statement.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a.wrapping_sub(b).wrapping_add(m)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Reduce an arbitrary integer into `[0, m)`.
pub fn reduce_big(a: &BigInt, m: u64) -> u64 {
    let r = a.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue fits")
}

#[inline]
pub fn reduce_i64(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

/// Primes in `[lo, hi]`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

/// Prime factorisation by trial division, as (prime, exponent) pairs.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Jacobi symbol for machine-sized arguments; `n` must be odd.
pub fn jacobi_u64(a: u64, n: u64) -> i8 {
    debug_assert!(n & 1 == 1);
    let mut a = a % n;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz & 1 == 1 && (n % 8 == 3 || n % 8 == 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Jacobi symbol `(a/n)` for any integer `a` and odd positive `n`.
pub fn jacobi_symbol(a: &BigInt, n: &BigInt) -> Result<i8> {
    if !n.is_positive() || n.is_even() {
        return invalid(format!("jacobi symbol needs odd positive modulus, got {n}"));
    }
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut sign = 1i8;
    let eight = BigInt::from(8);
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let n8 = (&n % &eight).to_u8().unwrap();
        if tz & 1 == 1 && (n8 == 3 || n8 == 5) {
            sign = -sign;
        }
        if (&a % 4u8).to_u8() == Some(3) && n8 % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.mod_floor(&n);
    }
    Ok(if n.is_one() { sign } else { 0 })
}

/// Floor of the `n`-th root together with an exactness flag.
pub fn exact_root(v: &BigInt, n: u32) -> (BigInt, bool) {
    debug_assert!(!v.is_negative());
    let r = v.nth_root(n);
    let exact = num_traits::pow(r.clone(), n as usize) == *v;
    (r, exact)
}

pub fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factor_u64(n).iter().all(|&(_, e)| e == 1)
}

/// Exponent of the prime `p` in `n` (`n != 0`).
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// A prime field `F_l` with `l < 2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u64,
}

impl PrimeField {
    pub fn new(modulus: u64) -> Result<Self> {
        if !is_prime(modulus) {
            return invalid(format!("{modulus} is not prime"));
        }
        Ok(PrimeField { modulus })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elem(&self, v: i64) -> Residue {
        Residue { value: reduce_i64(v, self.modulus), field: *self }
    }

    pub fn elem_big(&self, v: &BigInt) -> Residue {
        Residue { value: reduce_big(v, self.modulus), field: *self }
    }

    #[inline]
    pub fn reduce(&self, v: i64) -> u64 {
        reduce_i64(v, self.modulus)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        add_mod(a, b, self.modulus)
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        sub_mod(a, b, self.modulus)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.modulus)
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.modulus)
    }

    /// `a^e` for a possibly negative exponent; `a` must be a unit when `e < 0`.
    pub fn pow_signed(&self, a: u64, e: i64) -> Option<u64> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            self.inv(a).map(|ai| self.pow(ai, e.unsigned_abs()))
        }
    }

    #[inline]
    pub fn inv(&self, a: u64) -> Option<u64> {
        inv_mod(a, self.modulus)
    }

    pub fn legendre(&self, a: u64) -> i8 {
        if self.modulus == 2 {
            return (a & 1) as i8;
        }
        jacobi_u64(a, self.modulus)
    }

    /// Tonelli-Shanks; returns the smaller of the two roots.
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        let l = self.modulus;
        let a = a % l;
        if a == 0 || l == 2 {
            return Some(a);
        }
        if self.legendre(a) != 1 {
            return None;
        }
        let r = if l % 4 == 3 {
            self.pow(a, (l + 1) / 4)
        } else {
            let mut q = l - 1;
            let s = q.trailing_zeros();
            q >>= s;
            let mut z = 2;
            while self.legendre(z) != -1 {
                z += 1;
            }
            let mut m = s;
            let mut c = self.pow(z, q);
            let mut t = self.pow(a, q);
            let mut r = self.pow(a, q.div_ceil(2));
            while t != 1 {
                let mut i = 0;
                let mut t2 = t;
                while t2 != 1 {
                    t2 = self.mul(t2, t2);
                    i += 1;
                }
                let mut b = c;
                for _ in 0..(m - i - 1) {
                    b = self.mul(b, b);
                }
                m = i;
                c = self.mul(b, b);
                t = self.mul(t, c);
                r = self.mul(r, b);
            }
            r
        };
        Some(r.min(l - r))
    }

    /// Least positive primitive root, using a known factorisation of `l - 1`.
    pub fn primitive_root_with(&self, order_primes: &[u64]) -> u64 {
        let l = self.modulus;
        if l == 2 {
            return 1;
        }
        let n = l - 1;
        (2..l)
            .find(|&g| order_primes.iter().all(|&r| self.pow(g, n / r) != 1))
            .expect("a primitive root exists")
    }

    /// Least positive primitive root (factors `l - 1` by trial division).
    pub fn primitive_root(&self) -> Residue {
        let primes: Vec<u64> = factor_u64(self.modulus - 1).into_iter().map(|(r, _)| r).collect();
        Residue { value: self.primitive_root_with(&primes), field: *self }
    }

    /// Multiplicative order of a unit, given the primes dividing `l - 1`.
    pub fn order(&self, a: u64, order_primes: &[u64]) -> u64 {
        let mut n = self.modulus - 1;
        for &r in order_primes {
            while n.is_multiple_of(r) && self.pow(a, n / r) == 1 {
                n /= r;
            }
        }
        n
    }
}

/// An element of a [`PrimeField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    pub value: u64,
    pub field: PrimeField,
}

impl Residue {
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(self, e: u64) -> Residue {
        Residue { value: self.field.pow(self.value, e), field: self.field }
    }

    pub fn inv(self) -> Option<Residue> {
        self.field.inv(self.value).map(|value| Residue { value, field: self.field })
    }

    pub fn legendre(self) -> i8 {
        self.field.legendre(self.value)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.modulus)
    }
}

macro_rules! residue_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Residue {
            type Output = Residue;
            fn $m(self, rhs: Residue) -> Residue {
                debug_assert_eq!(self.field, rhs.field);
                Residue { value: self.field.$m(self.value, rhs.value), field: self.field }
            }
        }
    };
}
residue_binop!(Add, add);
residue_binop!(Sub, sub);
residue_binop!(Mul, mul);

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue { value: self.field.neg(self.value), field: self.field }
    }
}

/// Square root of `a`, `None` for a non-residue. The modulus must be odd.
pub fn sqrt_mod(a: Residue) -> Option<Residue> {
    a.field.sqrt(a.value).map(|value| Residue { value, field: a.field })
}

pub fn primitive_root(field: PrimeField) -> Residue {
    field.primitive_root()
}

/// Primes `l = 2mp + 1`, `1 <= m <= m_max`, not dividing any element of `avoid`.
pub fn primes_in_progression(p: u64, m_max: u64, avoid: &[u64]) -> Vec<(u64, u64)> {
    (1..=m_max)
        .filter_map(|m| {
            let l = 2 * m * p + 1;
            (is_prime(l) && avoid.iter().all(|&a| a % l != 0)).then_some((l, m))
        })
        .collect()
}

/// Sign of a `BigInt` as -1, 0, 1.
pub fn signum(a: &BigInt) -> i32 {
    match a.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_is_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), brute_is_prime(n), "{n}");
        }
        assert!(is_prime(1_000_003));
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_symbol(&2.into(), &7.into()), Ok(1));
        assert_eq!(jacobi_symbol(&0.into(), &5.into()), Ok(0));
        assert_eq!(jacobi_symbol(&3.into(), &7.into()), Ok(-1));
        assert_eq!(jacobi_symbol(&(-1).into(), &7.into()), Ok(-1));
        assert!(jacobi_symbol(&3.into(), &8.into()).is_err());
        assert!(jacobi_symbol(&3.into(), &(-7).into()).is_err());
    }

    #[test]
    fn sqrt_examples() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(sqrt_mod(f7.elem(2)).map(|r| r.value), Some(3));
        assert_eq!(sqrt_mod(f7.elem(3)), None);
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(sqrt_mod(f5.elem(0)).map(|r| r.value), Some(0));
    }

    #[test]
    fn primitive_root_examples() {
        for (l, g) in [(7, 3), (3, 2), (23, 5)] {
            assert_eq!(PrimeField::new(l).unwrap().primitive_root().value, g);
        }
    }

    #[test]
    fn progression_examples() {
        assert_eq!(primes_in_progression(11, 3, &[2, 23]), vec![(67, 3)]);
        assert_eq!(primes_in_progression(5, 1, &[]), vec![(11, 1)]);
        assert_eq!(primes_in_progression(7, 2, &[]), vec![(29, 2)]);
    }

    #[test]
    fn roots_exact() {
        let v = BigInt::from(3u64).pow(40);
        assert_eq!(exact_root(&v, 8), (BigInt::from(243), true));
        let (r, e) = exact_root(&(v - 1), 8);
        assert_eq!(r, BigInt::from(242));
        assert!(!e);
    }
}
