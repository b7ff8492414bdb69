//! Brute-force ground truth: admissible pairs, exhaustive enumeration of
//! small solutions, and exact verification.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_root, is_prime, is_squarefree};
use crate::curvedb::Parity;
use crate::error::{invalid, Error, Result};

const KNOWN: &str = include_str!("../data/known_solutions.csv");

/// `C1 x^2 + q^alpha = y^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    pub c1: u64,
    pub q: u64,
    pub x: u64,
    pub y: u64,
    pub alpha: u64,
    pub n: u64,
}

impl Solution {
    pub fn new(c1: u64, q: u64, x: u64, y: u64, alpha: u64, n: u64) -> Self {
        Solution { c1, q, x, y, alpha, n }
    }

    /// Sort key used for every emitted list: pair, then n, alpha, x.
    fn key(&self) -> (u64, u64, u64, u64, u64) {
        (self.c1, self.q, self.n, self.alpha, self.x)
    }
}

pub fn canonical_order(a: &Solution, b: &Solution) -> Ordering {
    a.key().cmp(&b.key())
}

/// Checks the identity, positivity and `gcd(C1 x, q, y) = 1`.
pub fn verify(sol: &Solution) -> bool {
    if sol.x == 0 || sol.y == 0 || sol.alpha == 0 || sol.n < 3 || sol.q < 2 {
        return false;
    }
    let lhs = BigInt::from(sol.c1) * BigInt::from(sol.x).pow(2) + BigInt::from(sol.q).pow(sol.alpha as u32);
    if lhs != BigInt::from(sol.y).pow(sol.n as u32) {
        return false;
    }
    let g = (sol.c1 as u128 * sol.x as u128).gcd(&(sol.q as u128)).gcd(&(sol.y as u128));
    g == 1
}

/// Coprime pairs `(C1, q)` with `C1` squarefree in `c1_range` and `q` prime in `q_range`.
pub fn coprime_pairs(c1_range: std::ops::RangeInclusive<u64>, q_range: std::ops::RangeInclusive<u64>) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for c1 in c1_range.filter(|&c| c >= 1 && is_squarefree(c)) {
        for q in q_range.clone().filter(|&q| is_prime(q)) {
            if c1.gcd(&q) == 1 {
                out.push((c1, q));
            }
        }
    }
    out
}

/// Whether `y` even is possible for this parity of `alpha`: `C1 q ≡ 7 (mod 8)`
/// for odd `alpha`, `C1 ≡ 7 (mod 8)` and `q` odd for even `alpha`.
pub fn is_admissible(c1: u64, q: u64, parity: Parity) -> bool {
    if q.is_multiple_of(2) || !is_prime(q) || !is_squarefree(c1) || c1.gcd(&q) != 1 {
        return false;
    }
    match parity {
        Parity::Odd => (c1 * q) % 8 == 7,
        Parity::Even => c1 % 8 == 7,
    }
}

pub fn admissible_pairs(
    c1_range: std::ops::RangeInclusive<u64>,
    q_range: std::ops::RangeInclusive<u64>,
    parity: Parity,
) -> Vec<(u64, u64)> {
    coprime_pairs(c1_range, q_range).into_iter().filter(|&(c1, q)| is_admissible(c1, q, parity)).collect()
}

/// The ranges of the classification: `1 <= C1 <= 20`, `2 <= q < 25`.
pub fn default_pairs() -> Vec<(u64, u64)> {
    coprime_pairs(1..=20, 2..=24)
}

fn exact_sqrt(v: &BigInt) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.sqrt();
    (&r * &r == *v).then_some(r)
}

/// All solutions with `x <= x_max`, `alpha <= alpha_max` and `n` in `n_set`.
///
/// Scans `y`: for fixed `(alpha, n)` the admissible `y` lie in
/// `(q^alpha)^(1/n) < y <= (q^alpha + C1 x_max^2)^(1/n)`, a short window
/// once `q^alpha` dominates.
pub fn enumerate(c1: u64, q: u64, x_max: u64, alpha_max: u64, n_set: &[u64]) -> Result<Vec<Solution>> {
    if c1 == 0 || q < 2 || x_max == 0 || alpha_max == 0 {
        return invalid("bounds and coefficients must be positive");
    }
    if let Some(&n) = n_set.iter().find(|&&n| n < 3) {
        return invalid(format!("exponent n = {n} must be at least 3"));
    }
    let c1b = BigInt::from(c1);
    let span = &c1b * BigInt::from(x_max).pow(2);
    let jobs: Vec<(u64, u64)> = (1..=alpha_max).flat_map(|a| n_set.iter().map(move |&n| (a, n))).collect();
    let mut out: Vec<Solution> = jobs
        .par_iter()
        .flat_map_iter(|&(alpha, n)| {
            let qa = BigInt::from(q).pow(alpha as u32);
            let (lo, _) = exact_root(&qa, n as u32);
            let (hi, _) = exact_root(&(&qa + &span), n as u32);
            let mut found = Vec::new();
            let mut y = lo + 1u32;
            while y <= hi {
                let diff = num_traits::pow(y.clone(), n as usize) - &qa;
                let (xsq, rem) = diff.div_rem(&c1b);
                if rem.is_zero() {
                    if let Some(x) = exact_sqrt(&xsq) {
                        if let (Ok(xv), Ok(yv)) = (u64::try_from(&x), u64::try_from(&y)) {
                            let sol = Solution::new(c1, q, xv, yv, alpha, n);
                            if xv <= x_max && verify(&sol) {
                                found.push(sol);
                            }
                        }
                    }
                }
                y += BigInt::one();
            }
            found
        })
        .collect();
    out.sort_by(canonical_order);
    Ok(out)
}

/// The same search by scanning `x`, kept as an independent check.
pub fn enumerate_by_x(c1: u64, q: u64, x_max: u64, alpha_max: u64, n_set: &[u64]) -> Vec<Solution> {
    let mut out = Vec::new();
    for alpha in 1..=alpha_max {
        let qa = BigInt::from(q).pow(alpha as u32);
        for x in 1..=x_max {
            let v = BigInt::from(c1) * BigInt::from(x).pow(2) + &qa;
            for &n in n_set {
                let (y, exact) = exact_root(&v, n as u32);
                if exact {
                    if let Ok(yv) = u64::try_from(&y) {
                        let sol = Solution::new(c1, q, x, yv, alpha, n);
                        if verify(&sol) {
                            out.push(sol);
                        }
                    }
                }
            }
        }
    }
    out.sort_by(canonical_order);
    out
}

/// The published solution list bundled with the crate.
pub fn known_solutions() -> Vec<Solution> {
    parse_solutions(KNOWN).expect("bundled solution table is well formed")
}

/// Reads `c1,q,x,y,alpha,n` rows with a header line.
pub fn parse_solutions(text: &str) -> Result<Vec<Solution>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let sol: Solution = rec.map_err(|e| Error::InvalidArgument(format!("bad solution row: {e}")))?;
        out.push(sol);
    }
    Ok(out)
}

pub fn write_solutions(sols: &[Solution]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in sols {
        w.serialize(s).map_err(|e| Error::Computation(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Computation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Computation(e.to_string()))
}
