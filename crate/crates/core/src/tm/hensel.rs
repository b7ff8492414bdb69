//! q-adic root detection by lift-and-prune.
//!
//! The search walks residue classes `r + q^j Z_q`. On a class the shifted
//! polynomial `g(T) = f(r + q^j T)` has coefficients `g_i`. If `v(g_0)` is
//! below every other `v(g_i)` the valuation of `f` is constant on the class
//! and the class is a leaf. If `g_1` alone attains the minimum over `i >= 1`
//! and `v(g_0) >= v(g_1)`, Hensel's lemma gives a root in the class.
//! Everything else is split into `q` subclasses.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::valuation;

pub const DEFAULT_K_CAP: u32 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootReason {
    /// A genuine root in `Z_q` was certified.
    Certified,
    /// Some class was still undecided at depth `k_cap`.
    CapReached,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HenselVerdict {
    /// `f(U) = 0 (mod q^k0)` has no solution, and `k0` is least with that property.
    NoRoot { k0: u32 },
    RootPossible(RootReason),
}

/// Coefficients (degree 0 up) of `f(r + m T)`.
fn taylor_shift(f: &[BigInt], r: &BigInt, m: &BigInt) -> Vec<BigInt> {
    let d = f.len();
    let mut out = vec![BigInt::zero(); d];
    let mut mpow = BigInt::one();
    for i in 0..d {
        // f^(i)(r)/i!
        let mut acc = BigInt::zero();
        let mut rpow = BigInt::one();
        for j in i..d {
            if j > i {
                rpow *= r;
            }
            if !f[j].is_zero() {
                acc += &f[j] * binomial(BigInt::from(j), BigInt::from(i)) * &rpow;
            }
        }
        out[i] = acc * &mpow;
        mpow *= m;
    }
    out
}

/// Decides whether `f` (coefficients from degree 0 up) has a root in `Z_q`,
/// refining residue classes at most `k_cap` times.
pub fn hensel_root_free(f: &[BigInt], q: u64, k_cap: u32) -> HenselVerdict {
    if f.iter().all(Zero::is_zero) {
        return HenselVerdict::RootPossible(RootReason::Certified);
    }
    let qb = BigInt::from(q);
    let mut best = 0u32;
    // (representative, depth)
    let mut frontier = vec![(BigInt::zero(), 0u32)];
    while let Some((r, j)) = frontier.pop() {
        let m = num_traits::pow(qb.clone(), j as usize);
        let g = taylor_shift(f, &r, &m);
        let v: Vec<u32> = g.iter().map(|c| valuation(c, q)).collect();
        if v[0] == u32::MAX {
            return HenselVerdict::RootPossible(RootReason::Certified);
        }
        let rest_min = v[1..].iter().copied().min().unwrap_or(u32::MAX);
        if v[0] < rest_min {
            best = best.max(v[0]);
            continue;
        }
        if v.len() > 1 && v[1] <= v[0] && v[2..].iter().all(|&x| x > v[1]) {
            return HenselVerdict::RootPossible(RootReason::Certified);
        }
        if j >= k_cap {
            return HenselVerdict::RootPossible(RootReason::CapReached);
        }
        for t in 0..q {
            frontier.push((&r + &m * t, j + 1));
        }
    }
    HenselVerdict::NoRoot { k0: best + 1 }
}
