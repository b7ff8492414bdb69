//! The four exponent-bounding techniques applied in sequence to every
//! rational newform (isogeny class) at the Frey level: trace bound, image of
//! inertia, quadratic twists, and the full 2-torsion refinement.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{bound_b_ell_filtered, bound_b_ell_full_two_torsion, inertia_check, level, trace_at, twist_parameters};
use crate::arith::{jacobi_u64, primes_between};
use crate::curvedb::{CurveDb, CurveRecord};
use crate::ellcurve::tate_conductor;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// p ∤ α, α odd.
    OddAlpha,
    /// p ∤ α, α even.
    EvenAlpha,
    /// p | α; the level no longer involves q.
    PDividesAlpha,
}

impl Regime {
    /// Largest exponent that counts as a sharp bound.
    pub fn threshold(self) -> u64 {
        match self {
            Regime::EvenAlpha => 47,
            _ => 19,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundPConfig {
    /// Auxiliary primes ℓ are taken below this bound.
    pub ell_max: u64,
}

impl Default for BoundPConfig {
    fn default() -> Self {
        BoundPConfig { ell_max: 100 }
    }
}

/// Which technique first bounded a curve, with the exponents it leaves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    TraceBound { primes: Vec<u64> },
    Inertia,
    Twist { d: i64, primes: Vec<u64> },
    FullTwoTorsion { primes: Vec<u64> },
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveOutcome {
    pub label: String,
    pub outcome: Outcome,
}

/// One row of the technique table: counts of curves not yet bounded after
/// each stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundPRow {
    pub c1: u64,
    pub q: u64,
    pub regime: Regime,
    pub level: u64,
    pub rational: usize,
    pub after_trace_bound: usize,
    pub after_inertia: usize,
    pub after_twist: usize,
    pub after_full_two_torsion: usize,
    pub remaining: Vec<String>,
    pub curves: Vec<CurveOutcome>,
}

/// Primes ≥ `from` dividing a nonzero integer, or `None` if a large factor
/// cannot be split off (which never counts as a sharp bound).
fn prime_factors_from(b: &BigInt, from: u64) -> Option<Vec<u64>> {
    if b.is_zero() {
        return None;
    }
    let mut n = b.magnitude().clone();
    let mut out = Vec::new();
    let mut r = 2u64;
    while r < 1_000_000 {
        let rb = num_bigint::BigUint::from(r);
        if (&n % &rb).is_zero() {
            if r >= from {
                out.push(r);
            }
            while (&n % &rb).is_zero() {
                n /= &rb;
            }
        }
        if n == num_bigint::BigUint::from(1u32) {
            return Some(out);
        }
        r += 1;
    }
    // Remaining cofactor has only prime factors ≥ 10⁶.
    match n.to_u64() {
        Some(m) if m < 1_000_000_000_000 => {
            out.push(m);
            Some(out)
        }
        _ => None,
    }
}

fn sharp(b: &BigInt, from: u64, threshold: u64) -> Option<Vec<u64>> {
    let primes = prime_factors_from(b, from)?;
    primes.iter().all(|&r| r <= threshold).then_some(primes)
}

fn gcd_over<I: IntoIterator<Item = Result<BigInt>>>(terms: I) -> Result<BigInt> {
    let mut g = BigInt::zero();
    for t in terms {
        g = g.gcd(&t?);
        if g == BigInt::from(1) {
            break;
        }
    }
    Ok(g)
}

/// Runs the four techniques on every isogeny class at the level of
/// (C₁, q) in the given regime.
pub fn bound_p(db: &CurveDb, c1: u64, q: u64, regime: Regime, cfg: &BoundPConfig) -> Result<BoundPRow> {
    let lev = level(c1, q, regime == Regime::PDividesAlpha);
    let n = lev.n;
    let threshold = regime.threshold();
    let classes: Vec<CurveRecord> = db.classes_at_level(n).into_iter().cloned().collect();
    let ells: Vec<u64> = primes_between(3, cfg.ell_max).into_iter().filter(|l| !n.is_multiple_of(*l)).collect();

    let mut outcomes = Vec::new();
    let mut counts = [0usize; 4];
    for rec in &classes {
        let e = rec.curve()?;
        let traces: Vec<i64> = ells.iter().map(|&l| trace_at(&e, l)).collect::<Result<_>>()?;
        let outcome = (|| -> Result<Outcome> {
            let b = gcd_over(ells.iter().zip(&traces).map(|(&l, &c)| Ok(bound_b_ell_filtered(c, l, |a| a % 2 == 0))))?;
            if let Some(primes) = sharp(&b, 11, threshold) {
                return Ok(Outcome::TraceBound { primes });
            }
            if !inertia_check(&e, c1, None)? {
                return Ok(Outcome::Inertia);
            }
            // The twisted Frey curve lowers to level N only for p ≥ 17.
            for d in twist_parameters(c1) {
                let tw = tate_conductor(&e.quadratic_twist(&BigInt::from(d))?)?;
                if tw.conductor == BigInt::from(n) {
                    continue;
                }
                let nn = &tw.conductor * BigInt::from(n);
                let tw_ells: Vec<u64> = ells.iter().copied().filter(|&l| !(&nn % BigInt::from(l)).is_zero()).collect();
                let tw_traces: Vec<i64> =
                    tw_ells.iter().map(|&l| trace_at(&tw.minimal_model, l)).collect::<Result<_>>()?;
                let mut all = Vec::new();
                let mut ok = true;
                for f in &classes {
                    let fc = f.curve()?;
                    let g = gcd_over(tw_ells.iter().zip(&tw_traces).map(|(&l, &a)| {
                        let c = trace_at(&fc, l)?;
                        let lb = BigInt::from(l);
                        Ok(((&lb + 1u32).pow(2) - BigInt::from(c * c)) * BigInt::from(a - c))
                    }))?;
                    match sharp(&g, 17, threshold) {
                        Some(ps) => all.extend(ps),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    all.sort_unstable();
                    all.dedup();
                    return Ok(Outcome::Twist { d, primes: all });
                }
            }
            let disc_sign = match regime {
                Regime::OddAlpha => Some(c1 * q),
                Regime::EvenAlpha => Some(c1),
                Regime::PDividesAlpha => None,
            };
            if let Some(m) = disc_sign {
                let qualifying: Vec<(u64, i64)> = ells
                    .iter()
                    .zip(&traces)
                    .filter(|(&l, _)| jacobi_u64((l - m % l) % l, l) == 1)
                    .map(|(&l, &c)| (l, c))
                    .collect();
                if !qualifying.is_empty() {
                    let b = gcd_over(qualifying.iter().map(|&(l, c)| Ok(bound_b_ell_full_two_torsion(c, l))))?;
                    if let Some(primes) = sharp(&b, 11, threshold) {
                        return Ok(Outcome::FullTwoTorsion { primes });
                    }
                }
            }
            Ok(Outcome::Unbounded)
        })()?;
        let stage = match outcome {
            Outcome::TraceBound { .. } => 0,
            Outcome::Inertia => 1,
            Outcome::Twist { .. } => 2,
            Outcome::FullTwoTorsion { .. } => 3,
            Outcome::Unbounded => 4,
        };
        for c in counts.iter_mut().take(stage) {
            *c += 1;
        }
        outcomes.push(CurveOutcome { label: rec.label.clone(), outcome });
    }
    let remaining = outcomes
        .iter()
        .filter(|o| o.outcome == Outcome::Unbounded)
        .map(|o| o.label.clone())
        .collect();
    Ok(BoundPRow {
        c1,
        q,
        regime,
        level: n,
        rational: classes.len(),
        after_trace_bound: counts[0],
        after_inertia: counts[1],
        after_twist: counts[2],
        after_full_two_torsion: counts[3],
        remaining,
        curves: outcomes,
    })
}
