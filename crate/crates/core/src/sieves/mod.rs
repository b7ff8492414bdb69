//! Sieves that rule out a fixed exponent p for solutions with y even.
//!
//! All three work with auxiliary primes `l = 2mp + 1`. The Kraus sieve
//! tracks which classes of alpha mod 2p are compatible with the target curve
//! at each such l. The combined sieve adds the Thue–Mahler system reduced
//! mod l. The large-exponent sieve works over the imaginary quadratic field
//! instead and needs no residue classes at all.

mod combined;
mod highp;
mod kraus;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_u64, is_prime, jacobi_u64, PrimeField};
use crate::curvedb::{CurveRecord, Parity};
use crate::ellcurve::fp::BSGS_THRESHOLD;
use crate::ellcurve::{tate_conductor, CubicModel, CurveFp, CurveQ, Point, SquareTable};
use crate::error::{invalid, precondition, Result};
use crate::search::is_admissible;

pub use combined::{combined_tm_sieve, SystemTable};
pub use highp::{highp_sieve, HighpConfig, HighpEntry, HighpReport, HighpVerdict};
pub use kraus::kraus_sieve;

pub const DEFAULT_M_MAX: u64 = 200;
pub const DEFAULT_HIGHP_M_MAX: u64 = 1000;
pub const DEFAULT_SEED: u64 = 0x0005_eed0_fc1a_55e5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub c1: u64,
    pub q: u64,
    pub parity: Parity,
    pub p: u64,
    pub target: CurveRecord,
    /// Largest `m` tried.
    pub m_max: u64,
    /// Stop after this many admissible `l`.
    pub max_primes: Option<usize>,
    pub seed: u64,
    /// Random-point rejection before exact point counting.
    pub shortcut: bool,
}

impl SieveConfig {
    pub fn new(c1: u64, q: u64, parity: Parity, p: u64, target: CurveRecord) -> Self {
        SieveConfig { c1, q, parity, p, target, m_max: DEFAULT_M_MAX, max_primes: None, seed: DEFAULT_SEED, shortcut: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 11 || !is_prime(self.p) {
            return invalid(format!("p = {} must be a prime at least 11", self.p));
        }
        if !is_admissible(self.c1, self.q, self.parity) {
            return invalid(format!("({}, {}) is not an admissible pair for {:?} alpha", self.c1, self.q, self.parity));
        }
        let level = 2 * self.q * self.c1 * self.c1;
        if self.target.conductor != level.into() {
            return invalid(format!("target {} does not have conductor {level}", self.target.label));
        }
        if self.m_max == 0 {
            return invalid("m_max must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SieveMethod {
    Kraus,
    Combined,
}

/// Which half of the third condition on l held.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThirdCondition {
    /// `-C1 q^s` is a non-square mod l.
    NonSquare,
    /// `c_l^2 - 4` is nonzero mod p.
    TraceNotTwo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllEntry {
    pub ell: u64,
    pub m: u64,
    /// `a_l` of the target curve.
    pub trace: i64,
    pub q_is_square: bool,
    pub third: Option<ThirdCondition>,
    /// Pairs `(omega, beta)` examined, over the classes still alive.
    pub candidates: usize,
    /// Of those, pairs with `C1 omega^2 + q^beta = 0` (combined sieve only).
    pub singular: usize,
    /// Surviving classes at this l, among those still alive before it.
    pub classes: Vec<u64>,
    pub running: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Eliminated,
    Survivors(Vec<u64>),
    /// No admissible l within the budget.
    Inconclusive,
}

impl Verdict {
    pub fn is_eliminated(&self) -> bool {
        matches!(self, Verdict::Eliminated)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveReport {
    pub method: SieveMethod,
    pub c1: u64,
    pub q: u64,
    pub parity: Parity,
    pub p: u64,
    pub target: String,
    pub seed: u64,
    pub shortcut: bool,
    pub a_prime: Vec<u64>,
    pub a: Vec<u64>,
    pub entries: Vec<EllEntry>,
    pub verdict: Verdict,
}

impl SieveReport {
    pub fn survivors(&self) -> Vec<u64> {
        match &self.verdict {
            Verdict::Survivors(s) => s.clone(),
            Verdict::Eliminated => Vec::new(),
            Verdict::Inconclusive => self.a.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticClasses {
    pub a_prime: Vec<u64>,
    pub a: Vec<u64>,
}

/// The classes of alpha mod p, then mod 2p, allowed for a Frey curve that
/// is congruent mod p to `e`.
///
/// For a rational target and p not dividing alpha this is the symplectic
/// condition at 2 and q, which needs multiplicative reduction at both.
pub fn symplectic_classes(
    e: &CurveQ,
    q: u64,
    p: u64,
    parity: Parity,
    rational: bool,
    p_divides_alpha: bool,
) -> Result<SymplecticClasses> {
    if !is_prime(p) || p < 5 {
        return invalid(format!("p = {p} must be a prime at least 5"));
    }
    let a_prime: Vec<u64> = if p_divides_alpha {
        vec![0]
    } else if !rational {
        (0..p).collect()
    } else {
        let cd = tate_conductor(e)?;
        for r in [2, q] {
            if cd.conductor_exponent(r) != 1 {
                return precondition(format!("the target needs multiplicative reduction at {r}"));
            }
        }
        let v2 = cd.local_at(2).map_or(0, |l| l.disc_valuation) as u64;
        let vq = cd.local_at(q).map_or(0, |l| l.disc_valuation) as u64;
        // If p divides v2 vq the symbol vanishes and A' is empty. That is
        // right: the target is then unramified at 2 or q mod p, the Frey curve is not.
        let base = (p - 3 % p) * (v2 % p) % p * (vq % p) % p;
        (1..p).filter(|&a| jacobi_u64(base * a % p, p) == 1).collect()
    };
    let want = match parity {
        Parity::Odd => 1,
        Parity::Even => 0,
    };
    let a = (0..2 * p).filter(|&b| b % 2 == want && a_prime.contains(&(b % p))).collect();
    Ok(SymplecticClasses { a_prime, a })
}

/// Seeds one point-counting stream per curve, so results do not depend on
/// how work is split between threads.
pub(crate) fn curve_rng(seed: u64, ell: u64, beta: u64, omega: u64) -> ChaCha8Rng {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed ^ ell) ^ beta) ^ omega))
}

/// Per-l data shared by the Kraus and combined sieves.
pub(crate) struct EllContext {
    pub field: PrimeField,
    pub ell: u64,
    pub m: u64,
    pub p: u64,
    pub c1: u64,
    pub q: u64,
    pub trace: i64,
    pub q_is_square: bool,
    pub shortcut: bool,
    pub seed: u64,
    /// Generator of the `2m`-th roots of unity.
    pub eta: u64,
    squares: Option<SquareTable>,
}

impl EllContext {
    pub fn new(cfg: &SieveConfig, target: &CurveQ, ell: u64, m: u64) -> Result<Self> {
        let field = PrimeField::new(ell)?;
        let trace = CurveFp::reduce(target, field)?.trace_fast()?;
        let primes: Vec<u64> = factor_u64(ell - 1).into_iter().map(|(r, _)| r).collect();
        let g = field.primitive_root_with(&primes);
        let eta = field.pow(g, cfg.p);
        // The shortcut pins a_l(F) to +-c_l, which needs both even and p^2 > 4l.
        let shortcut = cfg.shortcut && trace % 2 == 0 && cfg.p * cfg.p > 4 * ell;
        let squares = (ell <= BSGS_THRESHOLD).then(|| SquareTable::new(field));
        Ok(EllContext {
            field,
            ell,
            m,
            p: cfg.p,
            c1: cfg.c1,
            q: cfg.q,
            trace,
            q_is_square: field.legendre(cfg.q % ell) == 1,
            shortcut,
            seed: cfg.seed,
            eta,
            squares,
        })
    }

    /// `(omega, beta)` with `C1 omega^2 + q^beta` a `2m`-th root of unity.
    pub fn unit_candidates(&self, beta: u64) -> Vec<u64> {
        let f = &self.field;
        let qb = f.pow(self.q % self.ell, beta);
        let c1_inv = f.inv(self.c1 % self.ell).expect("l does not divide C1");
        let mut out = Vec::new();
        let mut zeta = 1;
        for _ in 0..2 * self.m {
            let t = f.mul(f.sub(zeta, qb), c1_inv);
            if t == 0 {
                out.push(0);
            } else if let Some(r) = f.sqrt(t) {
                out.push(r);
                out.push(f.neg(r));
            }
            zeta = f.mul(zeta, self.eta);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `omega` with `C1 omega^2 + q^beta = 0`.
    pub fn singular_candidates(&self, beta: u64) -> Vec<u64> {
        let f = &self.field;
        let qb = f.pow(self.q % self.ell, beta);
        let t = f.mul(f.neg(qb), f.inv(self.c1 % self.ell).expect("l does not divide C1"));
        match f.sqrt(t) {
            Some(r) => {
                let mut v = vec![r, f.neg(r)];
                v.dedup();
                v
            }
            None => Vec::new(),
        }
    }

    /// `Y^2 = X^3 + 4 C1 omega X^2 + 4 C1 D X` with `D = C1 omega^2 + q^beta`,
    /// isomorphic to the local Frey curve.
    pub fn frey_model(&self, omega: u64, beta: u64) -> CubicModel {
        let f = &self.field;
        let c1 = self.c1 % self.ell;
        let d = f.add(f.mul(c1, f.mul(omega, omega)), f.pow(self.q % self.ell, beta));
        let four_c1 = f.mul(4, c1);
        CubicModel::new(self.field, f.mul(four_c1, omega), f.mul(four_c1, d), 0)
    }

    fn trace_of(&self, model: &CubicModel, rng: &mut ChaCha8Rng) -> Result<i64> {
        match &self.squares {
            Some(t) => Ok(model.trace_char_sum(Some(t))),
            None => Ok(self.ell as i64 + 1 - model.count_points_bsgs(rng)? as i64),
        }
    }

    /// Whether `a_l(F_{omega,beta})` matches the target: `a = c` mod p when
    /// q is a square mod l, `a^2 = c^2` otherwise.
    pub fn trace_matches(&self, omega: u64, beta: u64) -> Result<bool> {
        let model = self.frey_model(omega, beta);
        let mut rng = curve_rng(self.seed, self.ell, beta, omega);
        if self.shortcut {
            let pt = model.random_point(&mut rng);
            let n1 = (self.ell as i64 + 1 - self.trace) as u64;
            let n2 = (self.ell as i64 + 1 + self.trace) as u64;
            if model.mul(pt, n1) != Point::Infinity && model.mul(pt, n2) != Point::Infinity {
                return Ok(false);
            }
        }
        let a = self.trace_of(&model, &mut rng)?;
        Ok(self.compare(a))
    }

    pub fn compare(&self, a: i64) -> bool {
        let p = self.p as i64;
        let c = self.trace;
        if self.q_is_square {
            (a - c).rem_euclid(p) == 0
        } else {
            (a * a - c * c).rem_euclid(p) == 0
        }
    }
}

/// Admissible `(l, m)` for the first two conditions, in increasing `m`.
pub(crate) fn auxiliary_primes(cfg: &SieveConfig) -> Vec<(u64, u64)> {
    crate::arith::primes_in_progression(cfg.p, cfg.m_max, &[2 * cfg.q * cfg.c1])
}

pub(crate) fn intersect(running: &[u64], classes: &[u64]) -> Vec<u64> {
    let keep: BTreeSet<u64> = classes.iter().copied().collect();
    running.iter().copied().filter(|b| keep.contains(b)).collect()
}

/// Outcome of the small-exponent sieves for one target curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetOutcome {
    pub target: String,
    pub kraus: Verdict,
    /// Only run when the Kraus sieve leaves survivors.
    pub combined: Option<std::result::Result<Verdict, String>>,
}

impl TargetOutcome {
    pub fn eliminated(&self) -> bool {
        self.kraus.is_eliminated() || matches!(&self.combined, Some(Ok(v)) if v.is_eliminated())
    }
}

/// Runs the Kraus sieve and, where it leaves survivors, the combined sieve,
/// for every target of the pair. `p` is eliminated when every target is.
pub fn sieve_exponent(
    c1: u64,
    q: u64,
    parity: Parity,
    p: u64,
    targets: &[CurveRecord],
    m_max: u64,
    seed: u64,
) -> Result<Vec<TargetOutcome>> {
    let mut tm = None;
    let mut out = Vec::new();
    for t in targets {
        let mut cfg = SieveConfig::new(c1, q, parity, p, t.clone());
        cfg.m_max = m_max;
        cfg.seed = seed;
        let kraus = kraus_sieve(&cfg)?.verdict;
        let combined = if kraus.is_eliminated() {
            None
        } else {
            if tm.is_none() {
                tm = Some(crate::tm::yeven_system(c1, q, parity, p).map_err(|e| e.to_string()));
            }
            Some(match tm.as_ref().unwrap() {
                Ok(sys) => combined_tm_sieve(&cfg, sys).map(|r| r.verdict).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            })
        };
        out.push(TargetOutcome { target: t.label.clone(), kraus, combined });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Residue;
    use crate::curvedb::CurveDb;
    use crate::frey::local_frey;

    #[test]
    fn symplectic_sets() {
        let db = CurveDb::bundled();
        let e = db.lookup("46a1").unwrap().curve().unwrap();
        let s = symplectic_classes(&e, 23, 11, Parity::Odd, true, false).unwrap();
        assert_eq!(s.a_prime.len(), 5);
        assert!(s.a.iter().all(|b| b % 2 == 1 && s.a_prime.contains(&(b % 11))));
        assert_eq!(s.a.len(), 5);
        let s = symplectic_classes(&e, 23, 11, Parity::Odd, true, true).unwrap();
        assert_eq!((s.a_prime.clone(), s.a.clone()), (vec![0], vec![11]));
        let s = symplectic_classes(&e, 23, 11, Parity::Even, false, false).unwrap();
        assert_eq!(s.a_prime.len(), 11);
        assert_eq!(s.a.len(), 11);
        // good reduction at 3
        assert!(symplectic_classes(&e, 3, 11, Parity::Odd, true, false).is_err());
    }

    #[test]
    fn model_matches_local_frey() {
        let db = CurveDb::bundled();
        let rec = db.lookup("150a1").unwrap();
        let cfg = SieveConfig::new(5, 3, Parity::Odd, 11, rec.clone());
        let e = rec.curve().unwrap();
        for (ell, m) in [(23, 1), (67, 3), (89, 4)] {
            let ctx = EllContext::new(&cfg, &e, ell, m).unwrap();
            let f = ctx.field;
            for beta in [1, 5, 9] {
                for omega in ctx.unit_candidates(beta) {
                    let local = local_frey(Residue { value: omega, field: f }, beta, 5, 3).unwrap();
                    let a = local.trace_of_frobenius().unwrap();
                    let model = ctx.frey_model(omega, beta);
                    assert_eq!(model.trace_char_sum(None), a, "l={ell} omega={omega} beta={beta}");
                    let d = f.add(f.mul(5, f.mul(omega, omega)), f.pow(3, beta));
                    assert_eq!(f.pow(d, 2 * m), 1);
                }
            }
        }
    }

    #[test]
    fn unit_candidates_exhaustive() {
        let db = CurveDb::bundled();
        let rec = db.lookup("14a1").unwrap();
        let cfg = SieveConfig::new(1, 7, Parity::Odd, 13, rec.clone());
        let e = rec.curve().unwrap();
        let (ell, m) = (53, 2);
        let ctx = EllContext::new(&cfg, &e, ell, m).unwrap();
        let f = ctx.field;
        for beta in 0..26 {
            let brute: Vec<u64> = (0..ell)
                .filter(|&w| f.pow(f.add(f.mul(w, w), f.pow(7, beta)), 2 * m) == 1)
                .collect();
            assert_eq!(ctx.unit_candidates(beta), brute);
            let sing: BTreeSet<u64> = (0..ell).filter(|&w| f.add(f.mul(w, w), f.pow(7, beta)) == 0).collect();
            assert_eq!(ctx.singular_candidates(beta).into_iter().collect::<BTreeSet<_>>(), sing);
        }
    }
}
