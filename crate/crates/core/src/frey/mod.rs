//! Frey curves attached to solutions with y even, their levels, local
//! surrogates over 𝔽_ℓ, and the checks used to bound the exponent.

pub mod boundp;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primes_between, PrimeField, Residue};
use crate::curvedb::CurveRecord;
use crate::ellcurve::{tate_conductor, CurveFp, CurveQ};
use crate::error::{invalid, precondition, Error, Result};

pub use boundp::{bound_p, BoundPConfig, BoundPRow, Regime};

/// The Frey curve Y² + XY = X³ + (C₁x−1)/4·X² + C₁yᵖ/64·X.
///
/// The sign of x is flipped if needed so that C₁x ≡ 1 (mod 4); the
/// coefficients are not integral otherwise.
pub fn frey_curve(c1: u64, q: u64, x: &BigInt, y: &BigInt, alpha: u32, p: u32) -> Result<CurveQ> {
    let c1b = BigInt::from(c1);
    let lhs = &c1b * x * x + BigInt::from(q).pow(alpha);
    let yp = y.pow(p);
    if lhs != yp {
        return invalid(format!("{c1}·x² + {q}^{alpha} ≠ y^{p} for x = {x}, y = {y}"));
    }
    let c1yp = &c1b * &yp;
    if !(&c1yp % 64u32).is_zero() {
        return invalid("64 must divide C₁·yᵖ");
    }
    let mut c1x = &c1b * x;
    if c1x.mod_floor(&BigInt::from(4)) != BigInt::one() {
        c1x = -c1x;
    }
    if c1x.mod_floor(&BigInt::from(4)) != BigInt::one() {
        return invalid("C₁x must be odd");
    }
    let a2 = (c1x - 1) / 4;
    let a4 = c1yp / 64;
    CurveQ::from_ints([BigInt::one(), a2, BigInt::zero(), a4, BigInt::zero()])
}

/// −2⁻¹²·C₁³·qᵅ·y²ᵖ, the discriminant of [`frey_curve`] as a rational.
pub fn frey_discriminant(c1: u64, q: u64, y: &BigInt, alpha: u32, p: u32) -> num_rational::BigRational {
    let num = -(BigInt::from(c1).pow(3) * BigInt::from(q).pow(alpha) * y.pow(2 * p));
    num_rational::BigRational::new(num, BigInt::from(4096))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelData {
    pub n: u64,
}

/// Level of the newform the Frey curve lowers to: 2qC₁² if p ∤ α, 2C₁² if p | α.
pub fn level(c1: u64, q: u64, p_divides_alpha: bool) -> LevelData {
    let n = if p_divides_alpha { 2 * c1 * c1 } else { 2 * q * c1 * c1 };
    LevelData { n }
}

/// Coefficients of the local Frey model for x ≡ ω and α ≡ β, with no
/// singularity check.
pub fn local_frey_model(omega: Residue, beta: u64, c1: u64, q: u64) -> Result<CurveFp> {
    let f = omega.field;
    let l = f.modulus();
    if l == 2 || c1.is_multiple_of(l) || q.is_multiple_of(l) {
        return precondition(format!("ℓ = {l} must not divide 2qC₁"));
    }
    let c1r = f.elem(c1 as i64);
    let qb = f.elem(q as i64).pow(beta);
    let inv4 = f.elem(4).inv().unwrap();
    let inv64 = f.elem(64).inv().unwrap();
    let a2 = (c1r * omega - f.elem(1)) * inv4;
    let a4 = (c1r * c1r * omega * omega + c1r * qb) * inv64;
    Ok(CurveFp::reduction(f, [1, a2.value, 0, a4.value, 0]))
}

/// The local Frey curve F_{ω,β} over 𝔽_ℓ; singular exactly when
/// C₁ω² + q^β ≡ 0, reported as [`Error::Singular`].
pub fn local_frey(omega: Residue, beta: u64, c1: u64, q: u64) -> Result<CurveFp> {
    let e = local_frey_model(omega, beta, c1, q)?;
    if e.is_singular() {
        return Err(Error::Singular);
    }
    Ok(e)
}

/// Prime ℓ ∤ N, the trace of the target at ℓ and B_ℓ with the trace set
/// restricted by `allow`.
pub fn bound_b_ell_filtered(c: i64, ell: u64, allow: impl Fn(i64) -> bool) -> BigInt {
    let ellb = BigInt::from(ell);
    let cb = BigInt::from(c);
    let mut b = (&ellb + 1u32).pow(2) - &cb * &cb;
    let mut a: i64 = -((4.0 * ell as f64).sqrt() as i64) - 1;
    while (a * a) as u64 >= 4 * ell {
        a += 1;
    }
    while ((a * a) as u64) < 4 * ell {
        if allow(a) {
            b *= BigInt::from(a - c);
        }
        a += 1;
    }
    b
}

/// Trace of a rational curve at a prime of good reduction of `e`.
pub fn trace_at(e: &CurveQ, ell: u64) -> Result<i64> {
    CurveFp::reduce(e, PrimeField::new(ell)?)?.trace_of_frobenius()
}

/// B_ℓ = ((ℓ+1)² − c²)·∏_{|a|<2√ℓ, 2|a} (a − c) with c = a_ℓ(E).
pub fn bound_b_ell(target: &CurveQ, level: LevelData, ell: u64) -> Result<BigInt> {
    if !is_prime(ell) {
        return invalid(format!("{ell} is not prime"));
    }
    if level.n.is_multiple_of(ell) {
        return invalid(format!("ℓ = {ell} divides the level {}", level.n));
    }
    let c = trace_at(target, ell)?;
    Ok(bound_b_ell_filtered(c, ell, |a| a % 2 == 0))
}

/// B_ℓ with the trace set cut down to a ≡ ℓ + 1 (mod 4), valid at primes
/// where the Frey curve is known to have full 2-torsion.
pub fn bound_b_ell_full_two_torsion(c: i64, ell: u64) -> BigInt {
    let r = ((ell + 1) % 4) as i64;
    bound_b_ell_filtered(c, ell, |a| a.rem_euclid(4) == r)
}

/// Image of inertia: the target is ruled out when an odd prime r | C₁, r ≠ p,
/// divides the denominator of j(E). Returns true when E survives.
pub fn inertia_check(target: &CurveQ, c1: u64, p: Option<u64>) -> Result<bool> {
    let j = target.j_invariant()?;
    let den = j.denom();
    for (r, _) in crate::arith::factor_u64(c1) {
        if r == 2 || Some(r) == p {
            continue;
        }
        if (den % BigInt::from(r)).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Divisors d of C₁ (both signs) with d ≡ 1 (mod 4), excluding d = 1.
pub fn twist_parameters(c1: u64) -> Vec<i64> {
    let mut out = Vec::new();
    for d in 1..=c1 {
        if c1.is_multiple_of(d) {
            for s in [d as i64, -(d as i64)] {
                if s != 1 && s.rem_euclid(4) == 1 {
                    out.push(s);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistVerdict {
    pub d: i64,
    pub twisted_conductor: BigInt,
    pub eliminated: bool,
    /// For each level-N curve, the first ℓ at which its trace differs from
    /// that of the twist.
    pub mismatches: Vec<(String, Option<u64>)>,
}

/// Compares the conductor of E^(d) with the level and locates, for every
/// bundled curve of that level, a prime with a trace mismatch.
pub fn twist_check(target: &CurveQ, d: i64, level: LevelData, level_curves: &[CurveRecord]) -> Result<TwistVerdict> {
    let twisted = target.quadratic_twist(&BigInt::from(d))?;
    let cd = tate_conductor(&twisted)?;
    let eliminated = cd.conductor != BigInt::from(level.n);
    let minimal = cd.minimal_model;
    let nn = &cd.conductor * BigInt::from(level.n);
    let mut mismatches = Vec::new();
    for rec in level_curves {
        let f = rec.curve()?;
        let mut found = None;
        for ell in primes_between(3, 1000) {
            if (&nn % BigInt::from(ell)).is_zero() {
                continue;
            }
            if trace_at(&minimal, ell)? != trace_at(&f, ell)? {
                found = Some(ell);
                break;
            }
        }
        mismatches.push((rec.label.clone(), found));
    }
    Ok(TwistVerdict { d, twisted_conductor: cd.conductor, eliminated, mismatches })
}

/// Normalised global Frey curve for a solution, or an error if y is odd.
pub fn frey_for_solution(c1: u64, q: u64, x: i64, y: i64, alpha: u32, p: u32) -> Result<CurveQ> {
    if y.is_odd() {
        return precondition("the Frey curve needs y even");
    }
    frey_curve(c1, q, &BigInt::from(x), &BigInt::from(y), alpha, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvedb::CurveDb;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    const P11_SOLUTIONS: [(u64, u64, i64, i64, u32, u32); 3] =
        [(1, 23, 45, 2, 1, 11), (5, 3, 19, 2, 5, 11), (7, 5, 17, 2, 2, 11)];

    #[test]
    fn frey_examples() {
        let e = frey_curve(1, 23, &b(45), &b(2), 1, 11).unwrap();
        assert_eq!(e, CurveQ::from_ints([1, 11, 0, 32, 0]).unwrap());
        assert_eq!(e.discriminant(), BigRational::from_integer(b(-(1 << 10) * 23)));
        let e = frey_curve(5, 3, &b(19), &b(2), 5, 11).unwrap();
        assert_eq!(e, CurveQ::from_ints([1, -24, 0, 160, 0]).unwrap());
        assert!(frey_curve(1, 23, &b(44), &b(2), 1, 11).is_err());
        // 64 ∤ C₁yᵖ for y = 2, p = 5.
        assert!(frey_curve(1, 7, &b(5), &b(2), 1, 5).is_err());
    }

    #[test]
    fn discriminant_formula_on_known_solutions() {
        for (c1, q, x, y, alpha, p) in P11_SOLUTIONS {
            let e = frey_for_solution(c1, q, x, y, alpha, p).unwrap();
            assert_eq!(e.discriminant(), frey_discriminant(c1, q, &b(y), alpha, p));
            // Rational 2-torsion point at (0, 0).
            assert!(e.a6().is_zero());
        }
    }

    #[test]
    fn levels() {
        assert_eq!(level(1, 23, false).n, 46);
        assert_eq!(level(13, 3, false).n, 1014);
        assert_eq!(level(5, 7, true).n, 50);
        let cd = tate_conductor(&frey_curve(1, 23, &b(45), &b(2), 1, 11).unwrap()).unwrap();
        assert_eq!(cd.conductor, b(46));
    }

    #[test]
    fn local_model_matches_global_reduction() {
        let f = PrimeField::new(67).unwrap();
        let local = local_frey(f.elem(45), 1, 1, 23).unwrap();
        let global = frey_curve(1, 23, &b(45), &b(2), 1, 11).unwrap();
        let red = CurveFp::reduce(&global, f).unwrap();
        assert_eq!(local, red);
        assert_eq!(local.trace_of_frobenius().unwrap(), red.trace_of_frobenius().unwrap());
        // C₁ω² + q^β ≡ 0 gives a singular model.
        let f = PrimeField::new(23 * 2 + 1).unwrap();
        let w = (0..47).find(|&w| (w * w + 23) % 47 == 0);
        if let Some(w) = w {
            assert_eq!(local_frey(f.elem(w), 1, 1, 23), Err(Error::Singular));
        }
        let f = PrimeField::new(3).unwrap();
        assert!(local_frey(f.elem(1), 1, 1, 3).is_err());
    }

    #[test]
    fn local_model_has_two_torsion() {
        let f = PrimeField::new(89).unwrap();
        for w in 0..89 {
            if let Ok(e) = local_frey(f.elem(w), 3, 5, 3) {
                assert!(e.cubic_model().unwrap().two_torsion_count() >= 1);
            }
        }
    }

    #[test]
    fn trace_bound_examples() {
        let db = CurveDb::bundled();
        let e14 = db.lookup("14a1").unwrap().curve().unwrap();
        assert_eq!(bound_b_ell(&e14, level(1, 7, false), 3).unwrap(), b(0));
        assert!(bound_b_ell(&e14, level(1, 7, false), 7).is_err());
        // c odd makes every factor nonzero.
        assert_ne!(bound_b_ell_filtered(1, 5, |a| a % 2 == 0), b(0));
        assert_eq!(bound_b_ell_filtered(-2, 3, |a| a % 2 == 0), b(0));
    }

    /// The known p = 11 solutions have Frey curves congruent mod 11 to one of
    /// the target curves, so 11 divides every B_ℓ for that curve.
    #[test]
    fn trace_bounds_are_sound_on_known_solutions() {
        let db = CurveDb::bundled();
        for (c1, q, x, y, alpha, p) in P11_SOLUTIONS {
            let parity = crate::curvedb::Parity::of(alpha as u64);
            let lev = level(c1, q, false);
            let frey = frey_for_solution(c1, q, x, y, alpha, p).unwrap();
            let disc_sq = if alpha % 2 == 1 { c1 * q } else { c1 };
            let cands = db.candidates_for(c1, q, parity).unwrap().records;
            let ells: Vec<u64> = primes_between(3, 200).into_iter().filter(|l| !lev.n.is_multiple_of(*l)).collect();
            let sound = cands.iter().any(|rec| {
                let e = rec.curve().unwrap();
                ells.iter().all(|&l| {
                    let c = trace_at(&e, l).unwrap();
                    let p_divides = |v: BigInt| (v % BigInt::from(p)).is_zero();
                    let plain = p_divides(bound_b_ell(&e, lev, l).unwrap());
                    let refined = crate::arith::jacobi_u64((l - disc_sq % l) % l, l) != 1
                        || p_divides(bound_b_ell_full_two_torsion(c, l));
                    // The Frey trace itself is congruent to c.
                    let fa = trace_at(&frey, l).unwrap();
                    let congruent = ((fa - c) % p as i64 == 0) || y % l as i64 == 0;
                    plain && refined && congruent
                })
            });
            assert!(sound, "({c1},{q},{x},{y},{alpha},{p})");
        }
    }

    #[test]
    fn inertia_examples() {
        let db = CurveDb::bundled();
        let e14 = db.lookup("14a1").unwrap().curve().unwrap();
        assert!(inertia_check(&e14, 1, None).unwrap());
        // y² = x³ − x has j = 1728.
        assert!(inertia_check(&CurveQ::short(-1, 0).unwrap(), 15, None).unwrap());
        let e90 = db.lookup("90a1").unwrap().curve().unwrap();
        let j = e90.j_invariant().unwrap();
        let three_divides = (j.denom() % BigInt::from(3)).is_zero();
        assert_eq!(inertia_check(&e90, 3, None).unwrap(), !three_divides);
        // r = p is exempt.
        assert!(inertia_check(&e90, 3, Some(3)).unwrap());
    }

    #[test]
    fn twists() {
        assert_eq!(twist_parameters(1), Vec::<i64>::new());
        assert_eq!(twist_parameters(15), vec![-15, -3, 5]);
        let db = CurveDb::bundled();
        let e = db.lookup("550g1").unwrap().curve().unwrap();
        let lev = level(5, 11, false);
        let peers: Vec<_> = db.classes_at_level(550).into_iter().cloned().collect();
        let v = twist_check(&e, 5, lev, &peers).unwrap();
        assert_eq!(v.eliminated, v.twisted_conductor != b(550));
        if v.eliminated {
            assert!(v.mismatches.iter().all(|(_, l)| l.is_some()));
        }
        // d = 1 leaves the conductor unchanged.
        let v = twist_check(&e, 1, lev, &peers).unwrap();
        assert!(!v.eliminated);
    }

    proptest! {
        /// For α = β + 2pu and ω = x/q^{pu} mod ℓ, the local model is the
        /// reduction of the Frey model, twisted by q when u is odd.
        #[test]
        fn local_model_is_twisted_reduction(
            c1 in prop::sample::select(vec![1u64, 3, 5, 7, 11, 13, 15]),
            q in prop::sample::select(vec![3u64, 5, 7, 11, 13]),
            x0 in 1i64..2000,
            beta in 0u64..22,
            u in 0u32..3,
            ell in prop::sample::select(vec![23u64, 67, 89, 199, 331, 353, 397, 419, 463, 617, 661]),
        ) {
            let p = 11u64;
            prop_assume!(c1 % ell != 0 && q % ell != 0 && c1 % q != 0);
            let x = if (c1 as i64 * x0).rem_euclid(4) == 1 { x0 } else { -x0 };
            prop_assume!((c1 as i64 * x).rem_euclid(4) == 1);
            let alpha = beta as u32 + 2 * p as u32 * u;
            let c1b = BigInt::from(c1);
            let yp = &c1b * BigInt::from(x) * BigInt::from(x) + BigInt::from(q).pow(alpha);
            let c1x = &c1b * BigInt::from(x);
            let global = CurveQ::new([
                BigRational::from_integer(BigInt::one()),
                BigRational::new(c1x - 1, BigInt::from(4)),
                BigRational::from_integer(BigInt::zero()),
                BigRational::new(&c1b * yp, BigInt::from(64)),
                BigRational::from_integer(BigInt::zero()),
            ]);
            prop_assume!(global.is_ok());
            let f = PrimeField::new(ell).unwrap();
            let red = CurveFp::reduce(&global.unwrap(), f).unwrap();
            prop_assume!(!red.is_singular());
            let qpu = f.elem(q as i64).pow(p * u as u64);
            let omega = f.elem(x) * qpu.inv().unwrap();
            let local = local_frey(omega, beta, c1, q).unwrap();
            let sign = if u % 2 == 1 { f.legendre(q % ell) as i64 } else { 1 };
            prop_assert_eq!(local.trace_of_frobenius().unwrap(), sign * red.trace_of_frobenius().unwrap());
        }
    }
}
