//! The residue sieve strengthened by the Thue–Mahler system mod l.
//!
//! A solution gives integers `(U, V)` with `F(U, V) = a q^k` and
//! `G(U, V) = b x`. Writing `k = pu + v` and scaling by `q^u` shows
//! `F = a q^v`, `G = b omega` is solvable mod l for the true `(omega, beta)`.
//! The sign of `x` depends on which prime above 2 the system was built from,
//! so both `+omega` and `-omega` are tried.

use std::collections::HashSet;

use rayon::prelude::*;

use super::{
    auxiliary_primes, intersect, symplectic_classes, EllContext, EllEntry, SieveConfig, SieveMethod, SieveReport,
    Verdict,
};
use crate::arith::{reduce_big, PrimeField};
use crate::error::{invalid, Result};
use crate::tm::{BivariateIntPoly, TMProblem};

/// Answers "is `F(U, V) = A`, `G(U, V) = B` solvable over `F_l`" in O(1)
/// after an O(l deg) pass over the projective line.
///
/// Nonzero `(U, V)` is `lambda (t, 1)` or `lambda (1, 0)`, and `lambda^p` runs
/// over the subgroup of index p, whose cosets are told apart by `x^(2m)`.
#[derive(Clone, Debug)]
pub struct SystemTable {
    field: PrimeField,
    m: u64,
    /// `(G/F, label(F))` over points with `F != 0`.
    ratios: HashSet<(u64, u64)>,
    /// `label(G)` over points with `F = 0 != G`.
    zero_labels: HashSet<u64>,
}

impl SystemTable {
    pub fn new(f: &BivariateIntPoly, g: &BivariateIntPoly, field: PrimeField, m: u64) -> Self {
        let l = field.modulus();
        let fc: Vec<u64> = f.coeffs().iter().map(|c| reduce_big(c, l)).collect();
        let gc: Vec<u64> = g.coeffs().iter().map(|c| reduce_big(c, l)).collect();
        let horner = |cs: &[u64], t: u64| cs.iter().fold(0, |acc, &c| field.add(field.mul(acc, t), c));
        let mut table = SystemTable { field, m, ratios: HashSet::new(), zero_labels: HashSet::new() };
        // t = l stands for the point at infinity (1, 0)
        for t in 0..=l {
            let (fv, gv) = if t == l { (fc[0], gc[0]) } else { (horner(&fc, t), horner(&gc, t)) };
            table.insert(fv, gv);
        }
        table
    }

    fn label(&self, x: u64) -> u64 {
        self.field.pow(x, 2 * self.m)
    }

    fn insert(&mut self, fv: u64, gv: u64) {
        let f = &self.field;
        if fv != 0 {
            let r = f.mul(gv, f.inv(fv).unwrap());
            let lab = self.label(fv);
            self.ratios.insert((r, lab));
        } else if gv != 0 {
            let lab = self.label(gv);
            self.zero_labels.insert(lab);
        }
    }

    pub fn solvable(&self, a0: u64, b0: u64) -> bool {
        let f = &self.field;
        if a0 != 0 {
            let r = f.mul(b0, f.inv(a0).unwrap());
            return self.ratios.contains(&(r, self.label(a0)));
        }
        // (0, 0) handles A = B = 0
        b0 == 0 || self.zero_labels.contains(&self.label(b0))
    }
}

fn check_system(cfg: &SieveConfig, tm: &TMProblem) -> Result<()> {
    if (tm.c1, tm.q, tm.parity, tm.p) != (cfg.c1, cfg.q, cfg.parity, cfg.p) {
        return invalid("Thue–Mahler system was built for a different instance");
    }
    if tm.descent != 1.into() {
        return invalid("expected the undescended system");
    }
    Ok(())
}

pub fn combined_tm_sieve(cfg: &SieveConfig, tm: &TMProblem) -> Result<SieveReport> {
    cfg.validate()?;
    check_system(cfg, tm)?;
    let target = cfg.target.curve()?;
    let sym = symplectic_classes(&target, cfg.q, cfg.p, cfg.parity, true, false)?;
    let mut running = sym.a.clone();
    let mut entries = Vec::new();
    let mut used = 0usize;
    for (ell, m) in auxiliary_primes(cfg) {
        if running.is_empty() || cfg.max_primes.is_some_and(|n| used >= n) {
            break;
        }
        used += 1;
        let ctx = EllContext::new(cfg, &target, ell, m)?;
        let f = ctx.field;
        let table = SystemTable::new(&tm.f, &tm.g, f, m);
        let a = reduce_big(&tm.a, ell);
        let b = reduce_big(&tm.b, ell);
        let system_ok = |omega: u64, a0: u64| {
            let b0 = f.mul(b, omega);
            table.solvable(a0, b0) || table.solvable(a0, f.neg(b0))
        };
        let mut classes = Vec::new();
        let (mut candidates, mut singular) = (0, 0);
        for &beta in &running {
            let v = (beta / 2) % cfg.p;
            let a0 = f.mul(a, f.pow(cfg.q % ell, v));
            let sing = ctx.singular_candidates(beta);
            let units = ctx.unit_candidates(beta);
            candidates += sing.len() + units.len();
            singular += sing.len();
            if sing.iter().any(|&w| system_ok(w, a0)) {
                classes.push(beta);
                continue;
            }
            let hit = units
                .par_iter()
                .filter(|&&w| system_ok(w, a0))
                .map(|&w| ctx.trace_matches(w, beta))
                .find_any(|r| !matches!(r, Ok(false)));
            match hit {
                Some(Err(e)) => return Err(e),
                Some(Ok(_)) => classes.push(beta),
                None => {}
            }
        }
        running = intersect(&running, &classes);
        entries.push(EllEntry {
            ell,
            m,
            trace: ctx.trace,
            q_is_square: ctx.q_is_square,
            third: None,
            candidates,
            singular,
            classes,
            running: running.clone(),
        });
    }
    let verdict = if used == 0 {
        Verdict::Inconclusive
    } else if running.is_empty() {
        Verdict::Eliminated
    } else {
        Verdict::Survivors(running)
    };
    Ok(SieveReport {
        method: SieveMethod::Combined,
        c1: cfg.c1,
        q: cfg.q,
        parity: cfg.parity,
        p: cfg.p,
        target: cfg.target.label.clone(),
        seed: cfg.seed,
        shortcut: cfg.shortcut,
        a_prime: sym.a_prime,
        a: sym.a,
        entries,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(f: &BivariateIntPoly, g: &BivariateIntPoly, field: PrimeField, a0: u64, b0: u64) -> bool {
        let l = field.modulus();
        let ev = |p: &BivariateIntPoly, u: u64, v: u64| reduce_big(&p.eval_i64(u as i64, v as i64), l);
        (0..l).any(|u| (0..l).any(|v| ev(f, u, v) == a0 && ev(g, u, v) == b0))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn table_matches_enumeration(
            fc in prop::collection::vec(-6i64..6, 4),
            gc in prop::collection::vec(-6i64..6, 4),
            targets in prop::collection::vec((0u64..31, 0u64..31), 8),
        ) {
            // l = 31 = 2*5*3 + 1 with p = 3, m = 5; cubic forms
            let field = PrimeField::new(31).unwrap();
            let f = BivariateIntPoly::from_i64(&fc).unwrap();
            let g = BivariateIntPoly::from_i64(&gc).unwrap();
            let table = SystemTable::new(&f, &g, field, 5);
            let mut cases = targets.clone();
            cases.extend([(0, 0), (0, 1), (1, 0), (0, 7)]);
            for (a0, b0) in cases {
                prop_assert_eq!(table.solvable(a0, b0), brute(&f, &g, field, a0, b0), "A={} B={}", a0, b0);
            }
        }
    }

    #[test]
    fn quintic_forms_mod_eleven() {
        // l = 11 = 2*1*5 + 1
        let field = PrimeField::new(11).unwrap();
        let f = BivariateIntPoly::from_i64(&[1, 0, -3, 0, 0, 2]).unwrap();
        let g = BivariateIntPoly::from_i64(&[0, 5, 0, 1, 0, -1]).unwrap();
        let table = SystemTable::new(&f, &g, field, 1);
        for a0 in 0..11 {
            for b0 in 0..11 {
                assert_eq!(table.solvable(a0, b0), brute(&f, &g, field, a0, b0));
            }
        }
    }
}
