//! Tate's algorithm: local minimal models, Kodaira symbols and conductor
//! exponents at every bad prime, with the conductor exponent read off from
//! Ogg's formula.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::CurveQ;
use crate::arith::{is_prime, valuation};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kodaira {
    I0,
    In(u32),
    II,
    III,
    IV,
    I0Star,
    InStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalReduction {
    pub prime: u64,
    pub conductor_exponent: u32,
    pub disc_valuation: u32,
    pub kodaira: Kodaira,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConductorData {
    pub minimal_model: CurveQ,
    pub conductor: BigInt,
    pub local: Vec<LocalReduction>,
}

impl ConductorData {
    pub fn local_at(&self, p: u64) -> Option<&LocalReduction> {
        self.local.iter().find(|l| l.prime == p)
    }

    pub fn conductor_exponent(&self, p: u64) -> u32 {
        self.local_at(p).map_or(0, |l| l.conductor_exponent)
    }
}

type Model = [BigInt; 5];

fn b_invariants(a: &Model) -> [BigInt; 4] {
    let [a1, a2, a3, a4, a6] = a;
    [
        a1 * a1 + 4 * a2,
        a1 * a3 + 2 * a4,
        a3 * a3 + 4 * a6,
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4,
    ]
}

fn c4(a: &Model) -> BigInt {
    let [b2, b4, _, _] = b_invariants(a);
    &b2 * &b2 - 24 * b4
}

fn c6(a: &Model) -> BigInt {
    let [b2, b4, b6, _] = b_invariants(a);
    -(&b2 * &b2 * &b2) + 36 * &b2 * b4 - 216 * b6
}

fn discriminant(a: &Model) -> BigInt {
    let [b2, b4, b6, b8] = b_invariants(a);
    -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
}

/// Integral change of variables with u = 1.
fn translate(a: &Model, r: &BigInt, s: &BigInt, t: &BigInt) -> Model {
    let [a1, a2, a3, a4, a6] = a;
    [
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1,
    ]
}

/// Divides out u = p, assuming the quotients are integral.
fn scale_down(a: &Model, p: &BigInt) -> Model {
    let weights = [1u32, 2, 3, 4, 6];
    let mut out = a.clone();
    for (c, w) in out.iter_mut().zip(weights) {
        let d = p.pow(w);
        debug_assert!((&*c % &d).is_zero());
        *c = &*c / d;
    }
    out
}

fn v(x: &BigInt, p: u64) -> u32 {
    if x.is_zero() {
        u32::MAX
    } else {
        valuation(x, p)
    }
}

fn modp(x: &BigInt, p: &BigInt) -> BigInt {
    x.mod_floor(p)
}

fn inv_mod(x: &BigInt, p: &BigInt) -> BigInt {
    let e = x.extended_gcd(p);
    debug_assert!(e.gcd.is_one() || e.gcd == -BigInt::one());
    modp(&(e.x * &e.gcd), p)
}

/// Roots mod p of a monic cubic with a repeated root, returning (root, multiplicity ≥ 2).
fn repeated_root(b: &BigInt, c: &BigInt, d: &BigInt, p: u64) -> (BigInt, u32) {
    let pb = BigInt::from(p);
    if p < 1000 {
        // Brute force: multiplicity via the derivatives of T³ + bT² + cT + d.
        for r in 0..p {
            let r = BigInt::from(r);
            let f = &r * &r * &r + b * &r * &r + c * &r + d;
            let f1 = 3 * &r * &r + 2 * b * &r + c;
            if modp(&f, &pb).is_zero() && modp(&f1, &pb).is_zero() {
                let f2 = 3 * &r + b;
                // f2 is half the second derivative; in characteristic 2 use the
                // coefficient test directly.
                let triple = if p == 2 {
                    // (T−r)³ = T³ + rT² + r²T + r³ mod 2.
                    modp(&(b - &r), &pb).is_zero() && modp(&(c - &r * &r), &pb).is_zero()
                } else {
                    modp(&f2, &pb).is_zero()
                };
                return (r, if triple { 3 } else { 2 });
            }
        }
        unreachable!("cubic has no repeated root mod {p}");
    }
    // p ≥ 5: closed forms.
    let e = modp(&(b * b - 3 * c), &pb);
    if e.is_zero() {
        let r = modp(&(-b * inv_mod(&BigInt::from(3), &pb)), &pb);
        (r, 3)
    } else {
        let r = modp(&((9 * d - b * c) * inv_mod(&(2 * e), &pb)), &pb);
        (r, 2)
    }
}

/// Whether the quadratic aT² + bT + c has distinct roots over F̄_p, with a ≢ 0.
fn quadratic_distinct(a: &BigInt, b: &BigInt, c: &BigInt, p: u64) -> bool {
    let pb = BigInt::from(p);
    if p == 2 {
        !modp(b, &pb).is_zero()
    } else {
        !modp(&(b * b - 4 * a * c), &pb).is_zero()
    }
}

/// Double root of aT² + bT + c mod p (distinctness already ruled out).
fn quadratic_double_root(a: &BigInt, b: &BigInt, c: &BigInt, p: u64) -> BigInt {
    let pb = BigInt::from(p);
    if p == 2 {
        // b even, so the root is sqrt(c/a) = c/a = c mod 2.
        modp(&(c * a), &pb)
    } else {
        modp(&(-b * inv_mod(&(2 * a), &pb)), &pb)
    }
}

/// Runs Tate's algorithm at p. Returns a model minimal at p and the local data.
fn tate_local(mut a: Model, p: u64) -> (Model, LocalReduction) {
    let pb = BigInt::from(p);
    let p2 = &pb * &pb;
    loop {
        let disc = discriminant(&a);
        let vd = v(&disc, p);
        let done = |a: Model, f: u32, k: Kodaira| {
            (a, LocalReduction { prime: p, conductor_exponent: f, disc_valuation: vd, kodaira: k })
        };
        if vd == 0 {
            return done(a, 0, Kodaira::I0);
        }

        // Move the singular point of the reduction to (0, 0).
        let (r, t) = if p <= 3 {
            let mut found = None;
            'search: for x in 0..p {
                for y in 0..p {
                    let (x, y) = (BigInt::from(x), BigInt::from(y));
                    let [a1, a2, a3, a4, a6] = &a;
                    let f = &y * &y + a1 * &x * &y + a3 * &y - &x * &x * &x - a2 * &x * &x - a4 * &x - a6;
                    let fx = a1 * &y - 3 * &x * &x - 2 * a2 * &x - a4;
                    let fy = 2 * &y + a1 * &x + a3;
                    if [f, fx, fy].iter().all(|z| modp(z, &pb).is_zero()) {
                        found = Some((x, y));
                        break 'search;
                    }
                }
            }
            found.expect("singular point must exist when p | Δ")
        } else {
            let [b2, _, _, _] = b_invariants(&a);
            let c4v = c4(&a);
            let x0 = if modp(&c4v, &pb).is_zero() {
                modp(&(-&b2 * inv_mod(&BigInt::from(12), &pb)), &pb)
            } else {
                let num = -(c6(&a) + &b2 * &c4v);
                modp(&(num * inv_mod(&(12 * &c4v), &pb)), &pb)
            };
            let y0 = modp(&(-(&a[0] * &x0 + &a[2]) * inv_mod(&BigInt::from(2), &pb)), &pb);
            (x0, y0)
        };
        a = translate(&a, &r, &BigInt::zero(), &t);
        debug_assert!(modp(&a[2], &pb).is_zero() && modp(&a[3], &pb).is_zero() && modp(&a[4], &pb).is_zero());

        let [b2, _, b6, b8] = b_invariants(&a);
        if !modp(&b2, &pb).is_zero() {
            return done(a, 1, Kodaira::In(vd));
        }
        if v(&a[4], p) < 2 {
            return done(a, vd, Kodaira::II);
        }
        if v(&b8, p) < 3 {
            return done(a, vd - 1, Kodaira::III);
        }
        if v(&b6, p) < 3 {
            return done(a, vd - 2, Kodaira::IV);
        }

        // Arrange p | a1, a2 and p² | a3, a4 and p³ | a6.
        let (s, t) = if p == 2 {
            (modp(&a[1], &pb), 2 * modp(&(&a[4] / 4), &pb))
        } else {
            let half = BigInt::from(p.div_ceil(2));
            (-&a[0] * &half, -&a[2] * &half)
        };
        a = translate(&a, &BigInt::zero(), &s, &t);

        let cb = &a[1] / &pb;
        let cc = &a[3] / &p2;
        let cd = &a[4] / (&p2 * &pb);
        let w = &cb * &cb * &cc * &cc - 4 * &cc * &cc * &cc - 4 * &cb * &cb * &cb * &cd - 27 * &cd * &cd
            + 18 * &cb * &cc * &cd;
        if !modp(&w, &pb).is_zero() {
            return done(a, vd - 4, Kodaira::I0Star);
        }
        let (root, mult) = repeated_root(&cb, &cc, &cd, p);
        if mult == 2 {
            // I_n*: move the double root to 0 and run the subprocedure.
            a = translate(&a, &(&root * &pb), &BigInt::zero(), &BigInt::zero());
            let mut n = 1u32;
            let mut mx = p2.clone();
            let mut my = p2.clone();
            loop {
                if n % 2 == 1 {
                    // Y² + a3/my·Y − a6/(mx·my)
                    let qb = &a[2] / &my;
                    let qc = -(&a[4] / (&mx * &my));
                    if quadratic_distinct(&BigInt::one(), &qb, &qc, p) {
                        break;
                    }
                    let y0 = quadratic_double_root(&BigInt::one(), &qb, &qc, p);
                    a = translate(&a, &BigInt::zero(), &BigInt::zero(), &(&y0 * &my));
                    my = &my * &pb;
                } else {
                    // a2/p·X² + a4/(p·mx)·X + a6/(mx·my)
                    let qa = &a[1] / &pb;
                    let qb = &a[3] / (&pb * &mx);
                    let qc = &a[4] / (&mx * &my);
                    if quadratic_distinct(&qa, &qb, &qc, p) {
                        break;
                    }
                    let x0 = quadratic_double_root(&qa, &qb, &qc, p);
                    a = translate(&a, &(&x0 * &mx), &BigInt::zero(), &BigInt::zero());
                    mx = &mx * &pb;
                }
                n += 1;
            }
            return done(a, vd - 4 - n, Kodaira::InStar(n));
        }

        // Triple root.
        a = translate(&a, &(&root * &pb), &BigInt::zero(), &BigInt::zero());
        let qb = &a[2] / &p2;
        let qc = -(&a[4] / (&p2 * &p2));
        if quadratic_distinct(&BigInt::one(), &qb, &qc, p) {
            return done(a, vd - 6, Kodaira::IVStar);
        }
        let y0 = quadratic_double_root(&BigInt::one(), &qb, &qc, p);
        a = translate(&a, &BigInt::zero(), &BigInt::zero(), &(&y0 * &p2));
        if v(&a[3], p) < 4 {
            return done(a, vd - 7, Kodaira::IIIStar);
        }
        if v(&a[4], p) < 6 {
            return done(a, vd - 8, Kodaira::IIStar);
        }
        // Not minimal: rescale and start over.
        a = scale_down(&a, &pb);
    }
}

/// Prime divisors of a nonzero integer by trial division, accepting a
/// cofactor only when its primality is certain.
pub(crate) fn prime_divisors(n: &BigInt) -> Result<Vec<u64>> {
    const BOUND: u64 = 1 << 20;
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= BOUND && BigInt::from(p * p) <= n {
        let pb = BigInt::from(p);
        if (&n % &pb).is_zero() {
            out.push(p);
            while (&n % &pb).is_zero() {
                n /= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        match n.to_u64() {
            Some(m) if BigInt::from(p) * BigInt::from(p) > n || is_prime(m) => out.push(m),
            _ => {
                return Err(Error::Computation(format!(
                    "cannot certify factorisation of discriminant cofactor {n}"
                )))
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Reduces a1, a3 to {0, 1} and a2 to {−1, 0, 1} by an integral translation.
fn normalise(a: &Model) -> Model {
    let two = BigInt::from(2);
    let s = -a[0].div_floor(&two);
    let a = translate(a, &BigInt::zero(), &s, &BigInt::zero());
    let r = -(&a[1] + BigInt::one()).div_floor(&BigInt::from(3));
    let a = translate(&a, &r, &BigInt::zero(), &BigInt::zero());
    let t = -a[2].div_floor(&two);
    translate(&a, &BigInt::zero(), &BigInt::zero(), &t)
}

/// Global minimal model, conductor and per-prime reduction data.
pub fn tate_conductor(e: &CurveQ) -> Result<ConductorData> {
    let mut a = e.integral_model();
    let disc = discriminant(&a);
    if disc.is_zero() {
        return Err(Error::Singular);
    }
    let mut local = Vec::new();
    let mut conductor = BigInt::one();
    for p in prime_divisors(&disc)? {
        let (m, lr) = tate_local(a, p);
        a = m;
        if lr.disc_valuation > 0 {
            conductor *= BigInt::from(p).pow(lr.conductor_exponent);
            local.push(lr);
        }
    }
    let a = normalise(&a);
    Ok(ConductorData { minimal_model: CurveQ::from_bigints(&a)?, conductor, local })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(a: [i64; 5]) -> CurveQ {
        CurveQ::from_ints(a).unwrap()
    }

    #[test]
    fn known_conductors() {
        // 11a1, 14a1, 46a1, 37a1, 27a1, 32a1, 36a1, 64a1
        let cases: [([i64; 5], u64); 8] = [
            ([0, -1, 1, -10, -20], 11),
            ([1, 0, 1, 4, -6], 14),
            ([1, -1, 0, -10, -12], 46),
            ([0, 0, 1, -1, 0], 37),
            ([0, 0, 1, 0, -7], 27),
            ([0, 0, 0, 4, 0], 32),
            ([0, 0, 0, 0, 1], 36),
            ([0, 0, 0, -4, 0], 64),
        ];
        for (a, n) in cases {
            let cd = tate_conductor(&curve(a)).unwrap();
            assert_eq!(cd.conductor, BigInt::from(n), "{a:?}");
        }
    }

    #[test]
    fn non_minimal_model_is_reduced() {
        // 11a1 scaled by u = 2 and u = 3, then translated.
        let e = curve([0, -1, 1, -10, -20]);
        for u in [2i64, 3, 6] {
            let scaled = e
                .transform(
                    &num_rational::BigRational::new(BigInt::one(), BigInt::from(u)),
                    &BigInt::from(5).into(),
                    &BigInt::from(-3).into(),
                    &BigInt::from(7).into(),
                )
                .unwrap();
            let cd = tate_conductor(&scaled).unwrap();
            assert_eq!(cd.conductor, BigInt::from(11));
            assert_eq!(cd.minimal_model, e);
        }
    }

    #[test]
    fn frey_example() {
        let cd = tate_conductor(&curve([1, 11, 0, 32, 0])).unwrap();
        assert_eq!(cd.conductor, BigInt::from(46));
        let l2 = cd.local_at(2).unwrap();
        assert_eq!((l2.conductor_exponent, l2.disc_valuation), (1, 10));
    }

    #[test]
    fn additive_types() {
        // y² = x³ + 2 has type II at 2 and IV... check exponents against
        // conductor 1728 = 2⁶·3³.
        let cd = tate_conductor(&curve([0, 0, 0, 0, 2])).unwrap();
        assert_eq!(cd.conductor, BigInt::from(1728));
        // y² = x³ − p²x type I0* at odd p.
        let cd = tate_conductor(&curve([0, 0, 0, -25, 0])).unwrap();
        assert_eq!(cd.local_at(5).unwrap().kodaira, Kodaira::I0Star);
        assert_eq!(cd.conductor_exponent(5), 2);
    }

    #[test]
    fn factoring() {
        assert_eq!(prime_divisors(&BigInt::from(-2i64 * 2 * 23 * 1_000_003)).unwrap(), vec![2, 23, 1_000_003]);
    }
}
