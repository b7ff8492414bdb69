//! Parsers for numeric command-line values.
//!
//! Integers may be written `100000`, `100_000`, `1e5`, `10^5`, or as a sum of
//! such terms (`10^6+10^4`). Ranges are `a..b`, both ends inclusive.

use anyhow::{anyhow, bail, Context};

fn term(s: &str) -> anyhow::Result<u64> {
    let s = s.trim().replace('_', "");
    let power = |base: &str, exp: &str| -> anyhow::Result<u64> {
        let b: u64 = base.parse().with_context(|| format!("bad base in {s:?}"))?;
        let e: u32 = exp.parse().with_context(|| format!("bad exponent in {s:?}"))?;
        b.checked_pow(e).ok_or_else(|| anyhow!("{s} overflows"))
    };
    if let Some((b, e)) = s.split_once('^') {
        return power(b, e);
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        return Ok(m.parse::<u64>().with_context(|| format!("bad mantissa in {s:?}"))? * power("10", e)?);
    }
    s.parse().with_context(|| format!("not a number: {s:?}"))
}

pub fn number(s: &str) -> anyhow::Result<u64> {
    s.split('+').try_fold(0u64, |acc, t| {
        let v = term(t)?;
        acc.checked_add(v).ok_or_else(|| anyhow!("{s} overflows"))
    })
}

pub fn range(s: &str) -> anyhow::Result<(u64, u64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| anyhow!("expected a range a..b, got {s:?}"))?;
    let (a, b) = (number(a)?, number(b.trim_start_matches('='))?);
    if a > b {
        bail!("empty range {s}");
    }
    Ok((a, b))
}

/// `C1,q`, optionally in parentheses.
pub fn pair(s: &str) -> anyhow::Result<(u64, u64)> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (a, b) = t.split_once(',').ok_or_else(|| anyhow!("expected C1,q, got {s:?}"))?;
    Ok((number(a)?, number(b)?))
}
