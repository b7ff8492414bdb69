//! The large-exponent sieve over `K = Q(sqrt(-c))`.
//!
//! Modulo a split prime `L | l` the ratio of the two conjugate factors of
//! `C1 x^2 + q^alpha` lies in an explicit coset `theta beta^n* <h>` with
//! `h = g^p`. For each coset element `tau` the curve `Y^2 = X(X+1)(X+tau)` is a
//! twist of the Frey curve mod L, so its trace must square to `a_l(E)^2`
//! mod p. One `l` with no such `tau` rules the exponent out.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve_rng;
use crate::arith::{factor_u64, is_prime, jacobi_u64, PrimeField};
use crate::curvedb::{CurveRecord, Parity};
use crate::ellcurve::{CubicModel, CurveFp, Point};
use crate::error::{invalid, Result};
use crate::quadfield::{element_factorisation_data, QuadField, QuadInt};
use crate::tm::descent_c;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighpConfig {
    pub c1: u64,
    pub q: u64,
    pub parity: Parity,
    pub p: u64,
    pub target: CurveRecord,
    pub m_max: u64,
    pub seed: u64,
    /// Work at the conjugate prime above l.
    pub conjugate: bool,
}

impl HighpConfig {
    pub fn new(c1: u64, q: u64, parity: Parity, p: u64, target: CurveRecord) -> Self {
        HighpConfig { c1, q, parity, p, target, m_max: super::DEFAULT_HIGHP_M_MAX, seed: super::DEFAULT_SEED, conjugate: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighpEntry {
    pub ell: u64,
    pub m: u64,
    pub trace: i64,
    /// Image of `sqrt(-c)` defining the prime above l.
    pub root: u64,
    pub taus: usize,
    /// The surviving `tau`, sorted.
    pub survivors: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HighpVerdict {
    Eliminated { ell: u64 },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighpReport {
    pub c1: u64,
    pub q: u64,
    pub parity: Parity,
    pub p: u64,
    pub target: String,
    pub seed: u64,
    pub conjugate: bool,
    /// Primes `2mp + 1` skipped because l is inert in K.
    pub skipped_inert: usize,
    /// Primes skipped because `a_l(E)^2 = 4` mod p.
    pub skipped_trace: usize,
    pub entries: Vec<HighpEntry>,
    pub verdict: HighpVerdict,
}

impl HighpReport {
    pub fn eliminated(&self) -> bool {
        matches!(self.verdict, HighpVerdict::Eliminated { .. })
    }
}

fn residue(field: &QuadField, x: &QuadInt, f: &PrimeField, w: u64) -> u64 {
    field.reduce_mod(x, f, w)
}

/// `conj(x)/x` mod L.
fn conj_ratio(field: &QuadField, x: &QuadInt, f: &PrimeField, w: u64) -> Result<u64> {
    let num = residue(field, &field.conj(x), f, w);
    let den = residue(field, x, f, w);
    match f.inv(den) {
        Some(inv) => Ok(f.mul(num, inv)),
        None => invalid("generator vanishes at the prime above l"),
    }
}

/// Whether `Y^2 = X(X+1)(X+tau)` can have trace `+-c`.
fn tau_survives(model: &CubicModel, ell: u64, p: u64, c: i64, exact_forced: bool, seed: u64, tau: u64) -> Result<bool> {
    let mut rng = curve_rng(seed, ell, u64::MAX, tau);
    if exact_forced {
        let pt = model.random_point(&mut rng);
        let n1 = (ell as i64 + 1 - c) as u64;
        let n2 = (ell as i64 + 1 + c) as u64;
        if model.mul(pt, n1) != Point::Infinity && model.mul(pt, n2) != Point::Infinity {
            return Ok(false);
        }
    }
    let a = ell as i64 + 1 - model.count_points_bsgs(&mut rng)? as i64;
    Ok((a * a - c * c).rem_euclid(p as i64) == 0)
}

pub fn highp_sieve(cfg: &HighpConfig) -> Result<HighpReport> {
    if cfg.p < 11 || !is_prime(cfg.p) {
        return invalid(format!("p = {} must be a prime at least 11", cfg.p));
    }
    let c = descent_c(cfg.c1, cfg.q, cfg.parity);
    let field = QuadField::new(c)?;
    let data = element_factorisation_data(field, cfg.c1, cfg.p)?;
    let target = cfg.target.curve()?;
    let p = cfg.p;
    let mut report = HighpReport {
        c1: cfg.c1,
        q: cfg.q,
        parity: cfg.parity,
        p,
        target: cfg.target.label.clone(),
        seed: cfg.seed,
        conjugate: cfg.conjugate,
        skipped_inert: 0,
        skipped_trace: 0,
        entries: Vec::new(),
        verdict: HighpVerdict::Inconclusive,
    };
    for m in 1..=cfg.m_max {
        let ell = 2 * m * p + 1;
        if !is_prime(ell) || (2 * cfg.c1 * cfg.q).is_multiple_of(ell) {
            continue;
        }
        if jacobi_u64((ell - c % ell) % ell, ell) != 1 {
            report.skipped_inert += 1;
            continue;
        }
        let f = PrimeField::new(ell)?;
        let trace = CurveFp::reduce(&target, f)?.trace_fast()?;
        if (trace * trace - 4).rem_euclid(p as i64) == 0 {
            report.skipped_trace += 1;
            continue;
        }
        let r = f.sqrt(f.neg(c % ell)).expect("l splits");
        let root = if cfg.conjugate { ell - r } else { r };
        let w = field.w_mod(&f, root);
        let theta = conj_ratio(&field, &data.omega, &f, w)?;
        let beta = conj_ratio(&field, &data.delta, &f, w)?;
        let start = f.mul(theta, f.pow_signed(beta, data.n_star).expect("unit"));
        let primes: Vec<u64> = factor_u64(ell - 1).into_iter().map(|(r, _)| r).collect();
        let h = f.pow(f.primitive_root_with(&primes), p);
        let mut taus = Vec::with_capacity(2 * m as usize);
        let mut t = start;
        for _ in 0..2 * m {
            if t != 1 {
                taus.push(t);
            }
            t = f.mul(t, h);
        }
        // |a_tau -+ a_E| < 4 sqrt(l) < p forces a_tau = +-a_E exactly
        let exact_forced = 16 * ell < p * p;
        let checks: Vec<Result<bool>> = taus
            .par_iter()
            .map(|&tau| {
                let model = CubicModel::new(f, f.add(1, tau), tau, 0);
                tau_survives(&model, ell, p, trace, exact_forced, cfg.seed, tau)
            })
            .collect();
        let mut survivors = Vec::new();
        for (tau, res) in taus.iter().zip(checks) {
            if res? {
                survivors.push(*tau);
            }
        }
        survivors.sort_unstable();
        let done = survivors.is_empty();
        report.entries.push(HighpEntry { ell, m, trace, root, taus: taus.len(), survivors });
        if done {
            report.verdict = HighpVerdict::Eliminated { ell };
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvedb::CurveDb;

    /// `theta beta^n*` at the chosen prime above l.
    fn coset_start(cfg: &HighpConfig, ell: u64, conjugate: bool) -> Result<u64> {
        let c = descent_c(cfg.c1, cfg.q, cfg.parity);
        let field = QuadField::new(c)?;
        let data = element_factorisation_data(field, cfg.c1, cfg.p)?;
        let f = PrimeField::new(ell)?;
        let r = f.sqrt(f.neg(c % ell)).ok_or_else(|| crate::Error::Precondition("l is inert".into()))?;
        let w = field.w_mod(&f, if conjugate { ell - r } else { r });
        let theta = conj_ratio(&field, &data.omega, &f, w)?;
        let beta = conj_ratio(&field, &data.delta, &f, w)?;
        Ok(f.mul(theta, f.pow_signed(beta, data.n_star).expect("unit")))
    }

    fn cfg_17(p: u64) -> HighpConfig {
        let rec = CurveDb::bundled().lookup("14a1").unwrap();
        HighpConfig::new(1, 7, Parity::Odd, p, rec)
    }

    #[test]
    fn conjugate_prime_inverts_the_coset() {
        let p = 1_000_003;
        let cfg = cfg_17(p);
        for m in 1..40 {
            let ell = 2 * m * p + 1;
            if !is_prime(ell) || jacobi_u64((ell - 7 % ell) % ell, ell) != 1 {
                continue;
            }
            let f = PrimeField::new(ell).unwrap();
            let a = coset_start(&cfg, ell, false).unwrap();
            let b = coset_start(&cfg, ell, true).unwrap();
            // inverse up to the subgroup of p-th powers
            let prod = f.mul(a, b);
            assert_eq!(f.pow(prod, 2 * m), 1, "l = {ell}");
        }
        let mut conj = cfg.clone();
        conj.conjugate = true;
        let r1 = highp_sieve(&cfg).unwrap();
        let r2 = highp_sieve(&conj).unwrap();
        assert_eq!(r1.verdict, r2.verdict);
        let inv: Vec<Vec<u64>> = r1
            .entries
            .iter()
            .map(|e| {
                let f = PrimeField::new(e.ell).unwrap();
                let mut v: Vec<u64> = e.survivors.iter().map(|&t| f.inv(t).unwrap()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let other: Vec<Vec<u64>> = r2.entries.iter().map(|e| e.survivors.clone()).collect();
        assert_eq!(inv, other);
    }

    #[test]
    fn first_prime_past_a_million() {
        let p = crate::arith::next_prime(1_000_000);
        let r = highp_sieve(&cfg_17(p)).unwrap();
        match r.verdict {
            HighpVerdict::Eliminated { ell } => assert!(ell <= 2 * 100 * p + 1),
            HighpVerdict::Inconclusive => panic!("not eliminated: {r:?}"),
        }
    }

    #[test]
    fn exact_trace_path_agrees() {
        // p small enough that the random-point filter is off
        let r = highp_sieve(&cfg_17(101)).unwrap();
        for e in &r.entries {
            let f = PrimeField::new(e.ell).unwrap();
            for &tau in &e.survivors {
                let model = CubicModel::new(f, f.add(1, tau), tau, 0);
                let a = model.trace_char_sum(None);
                assert_eq!((a * a - e.trace * e.trace).rem_euclid(101), 0);
            }
        }
    }
}
