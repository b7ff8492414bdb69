//! The residue sieve on alpha mod 2p.

use rayon::prelude::*;

use super::{
    auxiliary_primes, intersect, symplectic_classes, EllContext, EllEntry, SieveConfig, SieveMethod, SieveReport,
    ThirdCondition, Verdict,
};
use crate::arith::jacobi_u64;
use crate::curvedb::Parity;
use crate::error::Result;

fn third_condition(cfg: &SieveConfig, ctx: &EllContext) -> Option<ThirdCondition> {
    let f = &ctx.field;
    let s = match cfg.parity {
        Parity::Odd => 1,
        Parity::Even => 0,
    };
    let v = f.neg(f.mul(cfg.c1 % ctx.ell, f.pow(cfg.q % ctx.ell, s)));
    if jacobi_u64(v, ctx.ell) == -1 {
        return Some(ThirdCondition::NonSquare);
    }
    let c = ctx.trace;
    if (c * c - 4).rem_euclid(cfg.p as i64) != 0 {
        return Some(ThirdCondition::TraceNotTwo);
    }
    None
}

/// Classes among `alive` that some `omega` with a matching trace supports.
fn classes_at(ctx: &EllContext, alive: &[u64]) -> Result<(Vec<u64>, usize)> {
    let mut classes = Vec::new();
    let mut examined = 0;
    for &beta in alive {
        let omegas = ctx.unit_candidates(beta);
        examined += omegas.len();
        let hit = omegas
            .par_iter()
            .map(|&w| ctx.trace_matches(w, beta))
            .find_any(|r| !matches!(r, Ok(false)));
        match hit {
            Some(Err(e)) => return Err(e),
            Some(Ok(_)) => classes.push(beta),
            None => {}
        }
    }
    Ok((classes, examined))
}

pub fn kraus_sieve(cfg: &SieveConfig) -> Result<SieveReport> {
    cfg.validate()?;
    let target = cfg.target.curve()?;
    let sym = symplectic_classes(&target, cfg.q, cfg.p, cfg.parity, true, false)?;
    let mut running = sym.a.clone();
    let mut entries = Vec::new();
    let mut used = 0usize;
    for (ell, m) in auxiliary_primes(cfg) {
        if running.is_empty() || cfg.max_primes.is_some_and(|n| used >= n) {
            break;
        }
        let ctx = EllContext::new(cfg, &target, ell, m)?;
        let Some(third) = third_condition(cfg, &ctx) else {
            continue;
        };
        used += 1;
        let (classes, candidates) = classes_at(&ctx, &running)?;
        running = intersect(&running, &classes);
        entries.push(EllEntry {
            ell,
            m,
            trace: ctx.trace,
            q_is_square: ctx.q_is_square,
            third: Some(third),
            candidates,
            singular: 0,
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
        method: SieveMethod::Kraus,
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
