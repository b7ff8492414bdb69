//! Construction of Thue and Thue–Mahler equations, with q-adic pruning.
//!
//! Nothing here solves the equations. The y-odd side produces the forms
//! `G = V F` and the candidate sets for `s`; the y-even side expands the
//! ideal factorisation into a [`TMProblem`] that external solvers can read.

mod hensel;
mod poly;
mod yeven;

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, valuation};
use crate::curvedb::Parity;
use crate::error::{invalid, precondition, Result};
use crate::quadfield::{class_group, QuadField};

pub use hensel::{hensel_root_free, HenselVerdict, RootReason, DEFAULT_K_CAP};
pub use poly::BivariateIntPoly;
pub use yeven::{reverse_engineer, yeven_system, Recovered, ReverseEngineered, TMProblem, TMRecord};

/// `(G, F)` with `G = ((U + V√−c)^p − (U − V√−c)^p) / (2√−c)` and `G = V F`.
pub fn yodd_polynomials(c: u64, p: u64) -> Result<(BivariateIntPoly, BivariateIntPoly)> {
    if p < 3 || p.is_multiple_of(2) {
        return invalid(format!("p = {p} must be an odd prime"));
    }
    if c == 0 {
        return invalid("c must be positive");
    }
    let pu = p as usize;
    let mut coeffs = vec![BigInt::zero(); pu + 1];
    let minus_c = -BigInt::from(c);
    for j in (1..=pu).step_by(2) {
        coeffs[j] = binomial(BigInt::from(pu), BigInt::from(j)) * num_traits::pow(minus_c.clone(), (j - 1) / 2);
    }
    let g = BivariateIntPoly::new(coeffs)?;
    let f = g.div_v_power(1).expect("odd powers of V only");
    Ok((g, f))
}

/// `H` with `F(r, s) = p r^(p−1) + s^2 H(r, s)`, or `None` if no such form exists.
pub fn binomial_cofactor(f: &BivariateIntPoly, p: u64) -> Option<BivariateIntPoly> {
    let mut lead = BivariateIntPoly::zero(f.degree());
    let mut coeffs = lead.coeffs().to_vec();
    coeffs[0] = BigInt::from(p);
    lead = BivariateIntPoly::new(coeffs).ok()?;
    f.sub(&lead).ok()?.div_v_power(2)
}

/// Exponent of q inside a candidate `s`, as a function of the unknown `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QExp {
    Zero,
    KMinusOne,
    K,
}

/// `±2^two_exp · q^(q_exp)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SCandidate {
    pub two_exp: u32,
    pub q_exp: QExp,
}

impl SCandidate {
    /// Positive value for a concrete `k`; `None` when `q^(k−1)` is needed with `k = 0`.
    pub fn value(&self, q: u64, k: u64) -> Option<BigInt> {
        let qe = match self.q_exp {
            QExp::Zero => 0,
            QExp::K => k,
            QExp::KMinusOne => k.checked_sub(1)?,
        };
        Some(num_traits::pow(BigInt::from(2), self.two_exp as usize) * num_traits::pow(BigInt::from(q), qe as usize))
    }

    /// With `s` carrying the full power of q the right-hand side no longer
    /// depends on `k` and the equation is a Thue equation.
    pub fn is_thue(&self) -> bool {
        self.q_exp != QExp::Zero
    }
}

impl fmt::Display for SCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let two = match self.two_exp {
            0 => String::new(),
            1 => "2".to_string(),
            e => format!("2^{e}"),
        };
        let q = match self.q_exp {
            QExp::Zero => "",
            QExp::KMinusOne => "q^(k-1)",
            QExp::K => "q^k",
        };
        match (two.is_empty(), q.is_empty()) {
            (true, true) => write!(f, "±1"),
            (false, true) => write!(f, "±{two}"),
            (true, false) => write!(f, "±{q}"),
            (false, false) => write!(f, "±{two}·{q}"),
        }
    }
}

/// Whether `−c ≡ 1 (mod 4)`, which selects the `(r + s√−c)/2` normalisation.
pub fn minus_c_is_one_mod_four(c: u64) -> bool {
    c % 4 == 3
}

/// The admissible values of `s` (up to sign) for the y-odd descent.
pub fn s_candidate_set(c: u64, q: u64, p: u64) -> Vec<SCandidate> {
    use QExp::*;
    let s = |two_exp, q_exp| SCandidate { two_exp, q_exp };
    let hard = minus_c_is_one_mod_four(c);
    let q_div_p = q == p;
    match (hard, q == 2, q_div_p) {
        (false, _, false) => vec![s(0, Zero), s(0, K)],
        (false, _, true) => vec![s(0, Zero), s(0, KMinusOne), s(0, K)],
        (true, true, _) => {
            let mut out: Vec<SCandidate> = (0..=((p - 1) / 2) as u32).map(|e| s(e, Zero)).collect();
            out.push(s(1, K));
            out
        }
        (true, false, false) => vec![s(0, Zero), s(1, Zero), s(0, K), s(1, K)],
        (true, false, true) => vec![s(0, Zero), s(1, Zero), s(0, KMinusOne), s(1, KMinusOne), s(0, K), s(1, K)],
    }
}

/// The `(c, d)` of the y-odd descent: `c = C₁q` for odd α, `c = C₁` for even α.
pub fn descent_c(c1: u64, q: u64, parity: Parity) -> u64 {
    match parity {
        Parity::Odd => c1 * q,
        Parity::Even => c1,
    }
}

/// How one candidate `s` is disposed of.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SDisposal {
    /// Right-hand side independent of `k`.
    Thue,
    /// `F(U, s)` has no root in `Z_q`, so `k <= k_max`.
    Bounded { k0: u32, k_max: i64 },
    /// A Thue–Mahler equation remains.
    ThueMahler(RootReason),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SEntry {
    pub s: SCandidate,
    pub sign: i8,
    pub disposal: SDisposal,
}

/// The y-odd reduction for one `(C₁, q, parity, p)` with `p ∤ h`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct YoddReduction {
    pub c1: u64,
    pub q: u64,
    pub parity: Parity,
    pub p: u64,
    pub c: u64,
    pub g: Vec<String>,
    pub f: Vec<String>,
    pub entries: Vec<SEntry>,
}

impl YoddReduction {
    pub fn thue_mahler_count(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e.disposal, SDisposal::ThueMahler(_))).count()
    }
}

/// Right-hand side constant of `G(r, s) = const · q^k`.
pub fn yodd_constant(c1: u64, c: u64, p: u64) -> BigInt {
    let base = num_traits::pow(BigInt::from(c1), ((p - 1) / 2) as usize);
    if minus_c_is_one_mod_four(c) {
        base << p as usize
    } else {
        base
    }
}

/// Builds the y-odd equations and applies the Hensel test to every
/// candidate `s` whose right-hand side still depends on `k`.
pub fn yodd_reduction(c1: u64, q: u64, parity: Parity, p: u64, k_cap: u32) -> Result<YoddReduction> {
    if !is_prime(p) || p < 3 {
        return invalid(format!("p = {p} must be an odd prime"));
    }
    if !is_prime(q) {
        return invalid(format!("q = {q} must be prime"));
    }
    let c = descent_c(c1, q, parity);
    let field = QuadField::new(c)?;
    let h = class_group(field).h;
    if h.is_multiple_of(p) {
        return precondition(format!("p = {p} divides the class number {h} of Q(sqrt(-{c}))"));
    }
    let (g, f) = yodd_polynomials(c, p)?;
    let constant = yodd_constant(c1, c, p);
    let e_const = valuation(&constant, q);
    let jobs: Vec<(SCandidate, i8)> = s_candidate_set(c, q, p)
        .into_iter()
        .flat_map(|s| [(s, 1i8), (s, -1i8)])
        .collect();
    let entries = jobs
        .into_par_iter()
        .map(|(s, sign)| {
            let disposal = if s.is_thue() {
                SDisposal::Thue
            } else {
                let sv = s.value(q, 0).expect("k-free candidate") * BigInt::from(sign);
                let fu = f.specialise_v(&sv);
                match hensel_root_free(&fu, q, k_cap) {
                    HenselVerdict::NoRoot { k0 } => {
                        // v_q(F(U, s)) = k + v_q(const) − v_q(s) < k0
                        let vs = if q == 2 { s.two_exp } else { 0 };
                        let k_max = k0 as i64 - 1 - e_const as i64 + vs as i64;
                        SDisposal::Bounded { k0, k_max }
                    }
                    HenselVerdict::RootPossible(r) => SDisposal::ThueMahler(r),
                }
            };
            SEntry { s, sign, disposal }
        })
        .collect();
    let dec = |poly: &BivariateIntPoly| poly.coeffs().iter().map(|c| c.to_string()).collect();
    Ok(YoddReduction { c1, q, parity, p, c, g: dec(&g), f: dec(&f), entries })
}

/// Searches `(r, s)` with `r^2 + c s^2 = C₁ y` (or `4 C₁ y`) solving
/// `G(r, s) = const · q^k`, as a consistency check on a known y-odd solution.
pub fn yodd_witness(c1: u64, q: u64, parity: Parity, p: u64, y: u64, k: u64) -> Result<Option<(i64, i64)>> {
    let c = descent_c(c1, q, parity);
    let (g, _) = yodd_polynomials(c, p)?;
    let rhs = yodd_constant(c1, c, p) * num_traits::pow(BigInt::from(q), k as usize);
    let norm = if minus_c_is_one_mod_four(c) { 4 * c1 * y } else { c1 * y } as i64;
    let c = c as i64;
    let mut s = 0i64;
    while c * s * s <= norm {
        let rest = norm - c * s * s;
        let r = (rest as f64).sqrt().round() as i64;
        if r * r == rest {
            for (rr, ss) in [(r, s), (-r, s), (r, -s), (-r, -s)] {
                if g.eval_i64(rr, ss) == rhs {
                    return Ok(Some((rr, ss)));
                }
            }
        }
        s += 1;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_exponents() {
        let (g, f) = yodd_polynomials(7, 3).unwrap();
        assert_eq!(g, BivariateIntPoly::from_i64(&[0, 3, 0, -7]).unwrap());
        assert_eq!(f, BivariateIntPoly::from_i64(&[3, 0, -7]).unwrap());
        let (_, f) = yodd_polynomials(7, 5).unwrap();
        assert_eq!(f, BivariateIntPoly::from_i64(&[5, 0, -70, 0, 49]).unwrap());
        assert!(yodd_polynomials(7, 4).is_err());
        assert!(yodd_polynomials(0, 5).is_err());
        for u in -5..5 {
            assert!(g.eval_i64(u, 0).is_zero());
        }
    }

    #[test]
    fn binomial_decomposition() {
        for c in [1u64, 2, 7, 15, 23, 247] {
            for p in [3u64, 5, 7, 11] {
                let (_, f) = yodd_polynomials(c, p).unwrap();
                let h = binomial_cofactor(&f, p).expect("decomposes");
                assert_eq!(h.degree() as u64, p - 3);
                let lead = BivariateIntPoly::from_i64(&{
                    let mut v = vec![0; p as usize];
                    v[0] = p as i64;
                    v
                })
                .unwrap();
                let rebuilt = lead.add(&h.mul(&BivariateIntPoly::v().mul(&BivariateIntPoly::v()))).unwrap();
                assert_eq!(rebuilt, f);
            }
        }
    }

    #[test]
    fn s_sets() {
        use QExp::*;
        let show = |v: Vec<SCandidate>| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        assert_eq!(show(s_candidate_set(2, 3, 5)), "±1 ±q^k");
        assert_eq!(show(s_candidate_set(2, 5, 5)), "±1 ±q^(k-1) ±q^k");
        assert_eq!(show(s_candidate_set(7, 3, 5)), "±1 ±2 ±q^k ±2·q^k");
        assert_eq!(show(s_candidate_set(7, 5, 5)), "±1 ±2 ±q^(k-1) ±2·q^(k-1) ±q^k ±2·q^k");
        assert_eq!(show(s_candidate_set(7, 2, 7)), "±1 ±2 ±2^2 ±2^3 ±2·q^k");
        let top = s_candidate_set(7, 2, 7).pop().unwrap();
        assert_eq!(top, SCandidate { two_exp: 1, q_exp: K });
        assert_eq!(top.value(2, 4), Some(BigInt::from(32)));
        assert_eq!(SCandidate { two_exp: 0, q_exp: KMinusOne }.value(5, 0), None);
    }

    #[test]
    fn known_odd_solutions_have_witnesses() {
        // (C1, q, x, y, alpha, p) with y odd
        for (c1, q, y, alpha, p) in [(1u64, 19u64, 55u64, 1u64, 5u64), (2, 19, 21, 1, 5), (6, 11, 7, 4, 5), (14, 19, 3, 1, 5)] {
            let parity = Parity::of(alpha);
            let c = descent_c(c1, q, parity);
            if class_group(QuadField::new(c).unwrap()).h.is_multiple_of(p) {
                // h(Q(sqrt(-266))) = 20: the class-number branch, no (r, s) descent
                assert_eq!((c1, q), (14, 19));
                continue;
            }
            let w = yodd_witness(c1, q, parity, p, y, alpha / 2).unwrap();
            let (_, s) = w.unwrap_or_else(|| panic!("no witness for {c1},{q}"));
            let set = s_candidate_set(c, q, p);
            let k = alpha / 2;
            assert!(
                set.iter().any(|cand| cand.value(q, k) == Some(BigInt::from(s.unsigned_abs()))),
                "s = {s} outside S for ({c1},{q})"
            );
        }
    }

    #[test]
    fn reduction_bounds_are_sound_for_known_solutions() {
        // (1,19,22434,55,1,5): c = 19, s = ±2 with k = 0
        let red = yodd_reduction(1, 19, Parity::Odd, 5, DEFAULT_K_CAP).unwrap();
        assert_eq!(red.entries.len(), 8);
        for e in &red.entries {
            if let SDisposal::Bounded { k_max, .. } = e.disposal {
                if e.s.two_exp == 1 && e.s.q_exp == QExp::Zero {
                    assert!(k_max >= 0, "{e:?}");
                }
            }
        }
        assert!(yodd_reduction(1, 23, Parity::Odd, 3, DEFAULT_K_CAP).is_err());
    }
}
