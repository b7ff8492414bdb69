//! `powdiff`: batch driver for the search, bound and sieve computations.
//!
//! Data goes to standard output, progress and timing to standard error.
//! Every run except `report` also writes a JSON report named by its content
//! hash under the output directory; `report --rerun` replays one.

mod config;
mod parse;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use config::{PartialConfig, RunConfig};
use powdiff::curvedb::{parse_label, target_table, CurveDb, CurveRecord, Parity, RemoteClient, RemoteConfig};
use powdiff::ellcurve::tate_conductor;
use powdiff::frey::{bound_p, frey_curve, frey_discriminant, level, BoundPConfig, Regime};
use powdiff::quadfield::{class_group, QuadField};
use powdiff::search::{admissible_pairs, default_pairs, enumerate, is_admissible, known_solutions, Solution};
use powdiff::sieves::{combined_tm_sieve, highp_sieve, kraus_sieve, HighpConfig, SieveConfig};
use powdiff::tm::{descent_c, yeven_system};
use powdiff::{arith, lfl};

const EXIT_USAGE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;

fn pair_arg(s: &str) -> Result<(u64, u64), String> {
    parse::pair(s).map_err(|e| e.to_string())
}

fn number_arg(s: &str) -> Result<u64, String> {
    parse::number(s).map_err(|e| e.to_string())
}

fn range_arg(s: &str) -> Result<(u64, u64), String> {
    parse::range(s).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "powdiff", version, about = "Solve C1 x^2 + q^alpha = y^n by search, bounds and modular sieves")]
struct Cli {
    /// TOML file with run settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest m for auxiliary primes 2mp+1 in the residue sieves.
    #[arg(long, global = true, value_parser = number_arg)]
    m_max: Option<u64>,
    /// Largest m for the large-exponent sieve.
    #[arg(long, global = true, value_parser = number_arg)]
    highp_m_max: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Use only the bundled curve data.
    #[arg(long, global = true)]
    offline: bool,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Directory for JSON reports.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Do not write a report file.
    #[arg(long, global = true)]
    no_save: bool,
    /// Print the full JSON result instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
enum ParityArg {
    Odd,
    Even,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Odd => Parity::Odd,
            ParityArg::Even => Parity::Even,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
enum RegimeArg {
    Odd,
    Even,
    PDividesAlpha,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Odd => Regime::OddAlpha,
            RegimeArg::Even => Regime::EvenAlpha,
            RegimeArg::PDividesAlpha => Regime::PDividesAlpha,
        }
    }
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Enumerate solutions within bounds.
    Search(SearchArgs),
    /// List coprime and admissible pairs.
    Pairs(PairsArgs),
    /// Class group of Q(sqrt(-c)).
    Classgroup(ClassgroupArgs),
    /// Conductor and local data of a curve by label.
    Curve(CurveArgs),
    /// Frey curve of a solution with y even.
    Frey(FreyArgs),
    /// Bound the exponent by eliminating newforms at the Frey level.
    BoundP(BoundPArgs),
    /// Residue-class sieve for fixed exponents.
    SieveKraus(SieveArgs),
    /// Residue-class sieve combined with the Thue–Mahler system.
    SieveTm(SieveArgs),
    /// Large-exponent sieve over the imaginary quadratic field.
    SieveHighp(HighpArgs),
    /// Export the y-even Thue–Mahler system as JSON.
    TmExport(TmExportArgs),
    /// Audit the shipped bound constants.
    Bounds(BoundsArgs),
    /// Summarise a saved report, optionally re-running it.
    Report(ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Search(_) => "search",
            Command::Pairs(_) => "pairs",
            Command::Classgroup(_) => "classgroup",
            Command::Curve(_) => "curve",
            Command::Frey(_) => "frey",
            Command::BoundP(_) => "bound-p",
            Command::SieveKraus(_) => "sieve-kraus",
            Command::SieveTm(_) => "sieve-tm",
            Command::SieveHighp(_) => "sieve-highp",
            Command::TmExport(_) => "tm-export",
            Command::Bounds(_) => "bounds",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SearchArgs {
    /// Pair C1,q; repeatable.
    #[arg(long = "pair", value_parser = pair_arg)]
    pairs: Vec<(u64, u64)>,
    /// All 101 coprime pairs with C1 <= 20, q < 25.
    #[arg(long)]
    all_pairs: bool,
    #[arg(long, default_value = "1000", value_parser = number_arg)]
    xmax: u64,
    #[arg(long, default_value = "40", value_parser = number_arg)]
    alpha_max: u64,
    /// Exponents n, comma separated.
    #[arg(long, default_value = "3,4,5,7,11,13", value_delimiter = ',', value_parser = number_arg)]
    n: Vec<u64>,
    /// Compare with the bundled solution table restricted to the bounds.
    #[arg(long)]
    diff: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct PairsArgs {
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    #[arg(long, default_value = "20")]
    c1_max: u64,
    #[arg(long, default_value = "24")]
    q_max: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ClassgroupArgs {
    /// The field Q(sqrt(-c)).
    #[arg(long, conflicts_with = "pair")]
    c: Option<u64>,
    /// Derive c from C1,q and the parity of alpha.
    #[arg(long, value_parser = pair_arg, requires = "parity")]
    pair: Option<(u64, u64)>,
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CurveArgs {
    /// Cremona label, e.g. 46a1.
    label: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct FreyArgs {
    #[arg(long)]
    c1: u64,
    #[arg(long)]
    q: u64,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long)]
    alpha: u32,
    /// Prime exponent n.
    #[arg(long)]
    p: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct BoundPArgs {
    #[arg(long, value_parser = pair_arg, required_unless_present = "all")]
    pair: Option<(u64, u64)>,
    /// Every admissible pair for the regime.
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value = "odd")]
    regime: RegimeArg,
    /// Auxiliary primes below this bound.
    #[arg(long, value_parser = number_arg)]
    ell_max: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SieveArgs {
    #[arg(long, value_parser = pair_arg)]
    pair: (u64, u64),
    #[arg(long, value_enum)]
    parity: ParityArg,
    /// A single exponent.
    #[arg(long, value_parser = number_arg, conflicts_with = "p_range", required_unless_present = "p_range")]
    p: Option<u64>,
    /// Every prime in a..b.
    #[arg(long, value_parser = range_arg)]
    p_range: Option<(u64, u64)>,
    /// Target curve label; repeatable. Defaults to the pair's rational targets.
    #[arg(long = "target")]
    targets: Vec<String>,
    /// Stop after this many usable auxiliary primes.
    #[arg(long)]
    max_primes: Option<usize>,
    /// Count points exactly instead of testing random points first.
    #[arg(long)]
    no_shortcut: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct HighpArgs {
    #[arg(long, value_parser = pair_arg)]
    pair: (u64, u64),
    #[arg(long, value_enum)]
    parity: ParityArg,
    #[arg(long, value_parser = number_arg, conflicts_with = "p_range", required_unless_present = "p_range")]
    p: Option<u64>,
    #[arg(long, value_parser = range_arg)]
    p_range: Option<(u64, u64)>,
    #[arg(long = "target")]
    targets: Vec<String>,
    /// Work at the conjugate prime above each auxiliary prime.
    #[arg(long)]
    conjugate: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct TmExportArgs {
    #[arg(long, value_parser = pair_arg)]
    pair: (u64, u64),
    #[arg(long, value_enum)]
    parity: ParityArg,
    #[arg(long)]
    p: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct BoundsArgs {}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ReportArgs {
    file: PathBuf,
    /// Re-run the recorded command and check the result is identical.
    #[arg(long)]
    rerun: bool,
}

/// Persisted record of one run.
#[derive(Debug, Serialize, Deserialize)]
struct Report {
    tool: String,
    version: String,
    command: Command,
    config: RunConfig,
    inconclusive: bool,
    result: Value,
}

struct Outcome {
    result: Value,
    summary: String,
    inconclusive: bool,
}

fn curve_db(cfg: &RunConfig) -> CurveDb {
    let db = CurveDb::bundled();
    if cfg.offline {
        db
    } else {
        db.with_remote(RemoteClient::new(RemoteConfig { cache_dir: cfg.cache_dir.clone(), ..Default::default() }))
    }
}

fn primes_for(p: Option<u64>, range: Option<(u64, u64)>) -> anyhow::Result<Vec<u64>> {
    let primes: Vec<u64> = match (p, range) {
        (Some(p), _) => vec![p],
        (None, Some((a, b))) => (a.max(11)..=b).filter(|&n| arith::is_prime(n)).collect(),
        (None, None) => bail!("give --p or --p-range"),
    };
    if primes.is_empty() {
        bail!("no primes at least 11 in the requested range");
    }
    if let Some(&bad) = primes.iter().find(|&&p| p < 11 || !arith::is_prime(p)) {
        bail!("p = {bad} must be a prime at least 11");
    }
    Ok(primes)
}

fn targets_for(db: &CurveDb, c1: u64, q: u64, parity: Parity, labels: &[String]) -> anyhow::Result<Vec<CurveRecord>> {
    if !is_admissible(c1, q, parity) {
        bail!("({c1}, {q}) is not admissible for {parity:?} alpha: y even needs C1 q = 7 mod 8 (odd) or C1 = 7 mod 8 (even)");
    }
    let labels: Vec<String> = if labels.is_empty() {
        let row = target_table(parity).iter().find(|(pair, _)| *pair == (c1, q));
        match row {
            Some((_, ls)) => ls.iter().map(|s| s.to_string()).collect(),
            None => bail!("({c1}, {q}) has no rational target curves; pass --target or run bound-p"),
        }
    } else {
        labels.to_vec()
    };
    labels.iter().map(|l| db.lookup(l).with_context(|| format!("looking up {l}"))).collect()
}

fn progress(done: usize, total: usize, what: &str) {
    if total > 1 && (done.is_multiple_of(50) || done == total) {
        eprintln!("[{done}/{total}] {what}");
    }
}

fn run_search(a: &SearchArgs) -> anyhow::Result<Outcome> {
    let pairs = if a.all_pairs { default_pairs() } else { a.pairs.clone() };
    if pairs.is_empty() {
        bail!("give --pair C1,q or --all-pairs");
    }
    let mut sols: Vec<Solution> = Vec::new();
    for (i, &(c1, q)) in pairs.iter().enumerate() {
        sols.extend(enumerate(c1, q, a.xmax, a.alpha_max, &a.n)?);
        progress(i + 1, pairs.len(), &format!("searched ({c1}, {q})"));
    }
    let mut summary = String::from("c1,q,x,y,alpha,n\n");
    for s in &sols {
        writeln!(summary, "{},{},{},{},{},{}", s.c1, s.q, s.x, s.y, s.alpha, s.n)?;
    }
    let mut result = json!({ "pairs": pairs, "solutions": sols });
    let mut inconclusive = false;
    if a.diff {
        let wanted: BTreeSet<(u64, u64)> = pairs.iter().copied().collect();
        let expected: BTreeSet<Solution> = known_solutions()
            .into_iter()
            .filter(|s| wanted.contains(&(s.c1, s.q)) && s.x <= a.xmax && s.alpha <= a.alpha_max && a.n.contains(&s.n))
            .collect();
        let found: BTreeSet<Solution> = sols.iter().copied().collect();
        let missing: Vec<_> = expected.difference(&found).copied().collect();
        let extra: Vec<_> = found.difference(&expected).copied().collect();
        writeln!(summary, "diff against bundled table: {} missing, {} extra", missing.len(), extra.len())?;
        inconclusive = !missing.is_empty() || !extra.is_empty();
        result["diff"] = json!({ "missing": missing, "extra": extra });
    }
    Ok(Outcome { result, summary, inconclusive })
}

fn run_pairs(a: &PairsArgs) -> anyhow::Result<Outcome> {
    let coprime = powdiff::search::coprime_pairs(1..=a.c1_max, 2..=a.q_max);
    let odd = admissible_pairs(1..=a.c1_max, 2..=a.q_max, Parity::Odd);
    let even = admissible_pairs(1..=a.c1_max, 2..=a.q_max, Parity::Even);
    let fmt = |v: &[(u64, u64)]| v.iter().map(|(c, q)| format!("({c},{q})")).collect::<Vec<_>>().join(" ");
    let mut summary = String::new();
    let result = match a.parity {
        Some(ParityArg::Odd) => {
            writeln!(summary, "odd alpha ({}): {}", odd.len(), fmt(&odd))?;
            json!({ "odd": odd })
        }
        Some(ParityArg::Even) => {
            writeln!(summary, "even alpha ({}): {}", even.len(), fmt(&even))?;
            json!({ "even": even })
        }
        None => {
            writeln!(summary, "coprime pairs: {}", coprime.len())?;
            writeln!(summary, "odd alpha ({}): {}", odd.len(), fmt(&odd))?;
            writeln!(summary, "even alpha ({}): {}", even.len(), fmt(&even))?;
            json!({ "coprime": coprime, "odd": odd, "even": even })
        }
    };
    Ok(Outcome { result, summary, inconclusive: false })
}

fn run_classgroup(a: &ClassgroupArgs) -> anyhow::Result<Outcome> {
    let c = match (a.c, a.pair, a.parity) {
        (Some(c), _, _) => c,
        (None, Some((c1, q)), Some(par)) => descent_c(c1, q, par.into()),
        _ => bail!("give --c or --pair with --parity"),
    };
    let data = class_group(QuadField::new(c)?);
    let forms: Vec<String> = data.reduced_forms.iter().map(|f| format!("({},{},{})", f.a, f.b, f.c)).collect();
    let mut summary = String::new();
    writeln!(summary, "Q(sqrt(-{c})): h = {}", data.h)?;
    writeln!(summary, "reduced forms: {}", forms.join(" "))?;
    match data.p2_order {
        Some(o) => writeln!(summary, "class of p2 has order {o}; generates: {}", data.p2_is_generator)?,
        None => writeln!(summary, "2 does not split")?,
    }
    Ok(Outcome { result: serde_json::to_value(&data)?, summary, inconclusive: false })
}

fn run_curve(a: &CurveArgs, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let rec = curve_db(cfg).lookup(&a.label)?;
    let (label_level, _, _) = parse_label(&a.label)?;
    let data = tate_conductor(&rec.curve()?)?;
    let mut summary = String::new();
    writeln!(summary, "{}: {}", rec.label, data.minimal_model)?;
    writeln!(summary, "conductor {} (label level {label_level})", data.conductor)?;
    for l in &data.local {
        writeln!(summary, "  p = {}: f = {}, v(disc) = {}, {:?}", l.prime, l.conductor_exponent, l.disc_valuation, l.kodaira)?;
    }
    let consistent = data.conductor == BigInt::from(label_level);
    if !consistent {
        writeln!(summary, "conductor does not match the label")?;
    }
    Ok(Outcome {
        result: json!({ "record": rec, "conductor": data, "matches_label": consistent }),
        summary,
        inconclusive: !consistent,
    })
}

fn run_frey(a: &FreyArgs) -> anyhow::Result<Outcome> {
    let x: BigInt = a.x.parse().context("x must be an integer")?;
    let y: BigInt = a.y.parse().context("y must be an integer")?;
    let e = frey_curve(a.c1, a.q, &x, &y, a.alpha, a.p)?;
    let formula = frey_discriminant(a.c1, a.q, &y, a.alpha, a.p);
    let direct = e.discriminant();
    let data = tate_conductor(&e)?;
    let lev = level(a.c1, a.q, a.alpha.is_multiple_of(a.p));
    let mut summary = String::new();
    writeln!(summary, "Frey curve: {e}")?;
    writeln!(summary, "discriminant formula agrees: {}", formula == direct)?;
    writeln!(summary, "conductor {}, level after lowering {}", data.conductor, lev.n)?;
    Ok(Outcome {
        result: json!({
            "curve": e,
            "discriminant": direct.to_string(),
            "discriminant_matches_formula": formula == direct,
            "conductor": data,
            "level": lev.n,
        }),
        summary,
        inconclusive: formula != direct,
    })
}

fn run_bound_p(a: &BoundPArgs, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let regime: Regime = a.regime.into();
    let pairs = match (a.all, a.pair) {
        (false, Some(p)) => vec![p],
        (true, _) => match regime {
            Regime::OddAlpha => admissible_pairs(1..=20, 2..=24, Parity::Odd),
            Regime::EvenAlpha => admissible_pairs(1..=20, 2..=24, Parity::Even),
            Regime::PDividesAlpha => {
                let mut v = admissible_pairs(1..=20, 2..=24, Parity::Odd);
                v.extend(admissible_pairs(1..=20, 2..=24, Parity::Even));
                v.sort_unstable();
                v.dedup();
                v
            }
        },
        (false, None) => bail!("give --pair C1,q or --all"),
    };
    let db = curve_db(cfg);
    let bcfg = BoundPConfig { ell_max: a.ell_max.unwrap_or(cfg.ell_max) };
    let mut rows = Vec::new();
    let mut summary = String::from("pair level rational after-trace after-inertia after-twist after-2-torsion remaining\n");
    for (i, &(c1, q)) in pairs.iter().enumerate() {
        let row = bound_p(&db, c1, q, regime, &bcfg)?;
        writeln!(
            summary,
            "({c1},{q}) {} {} {} {} {} {} {}",
            row.level,
            row.rational,
            row.after_trace_bound,
            row.after_inertia,
            row.after_twist,
            row.after_full_two_torsion,
            row.remaining.join(",")
        )?;
        rows.push(row);
        progress(i + 1, pairs.len(), &format!("bound-p ({c1}, {q})"));
    }
    Ok(Outcome { result: serde_json::to_value(&rows)?, summary, inconclusive: false })
}

fn run_sieve(a: &SieveArgs, combined: bool, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let (c1, q) = a.pair;
    let parity: Parity = a.parity.into();
    let db = curve_db(cfg);
    let targets = targets_for(&db, c1, q, parity, &a.targets)?;
    let primes = primes_for(a.p, a.p_range)?;
    let mut reports = Vec::new();
    let mut summary = String::new();
    let mut open = 0usize;
    for (i, &p) in primes.iter().enumerate() {
        let tm = if combined { Some(yeven_system(c1, q, parity, p)?) } else { None };
        for t in &targets {
            let mut sc = SieveConfig::new(c1, q, parity, p, t.clone());
            sc.m_max = cfg.m_max;
            sc.seed = cfg.seed;
            sc.max_primes = a.max_primes;
            sc.shortcut = !a.no_shortcut;
            let r = match &tm {
                Some(sys) => combined_tm_sieve(&sc, sys)?,
                None => kraus_sieve(&sc)?,
            };
            if !r.verdict.is_eliminated() {
                open += 1;
            }
            writeln!(summary, "p = {p} {}: {:?} after {} primes", t.label, r.verdict, r.entries.len())?;
            reports.push(r);
        }
        progress(i + 1, primes.len(), &format!("p = {p}"));
    }
    writeln!(summary, "{} of {} (p, target) cases not eliminated", open, reports.len())?;
    Ok(Outcome { result: serde_json::to_value(&reports)?, summary, inconclusive: open > 0 })
}

fn run_highp(a: &HighpArgs, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let (c1, q) = a.pair;
    let parity: Parity = a.parity.into();
    let db = curve_db(cfg);
    let targets = targets_for(&db, c1, q, parity, &a.targets)?;
    let primes = primes_for(a.p, a.p_range)?;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let per_prime: Vec<anyhow::Result<Vec<_>>> = primes
        .par_iter()
        .map(|&p| {
            let out = targets
                .iter()
                .map(|t| {
                    let mut hc = HighpConfig::new(c1, q, parity, p, t.clone());
                    hc.m_max = cfg.highp_m_max;
                    hc.seed = cfg.seed;
                    hc.conjugate = a.conjugate;
                    highp_sieve(&hc)
                })
                .collect::<powdiff::Result<Vec<_>>>()?;
            let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            progress(n, primes.len(), "large-exponent sieve");
            Ok(out)
        })
        .collect();
    let mut reports = Vec::new();
    for r in per_prime {
        reports.extend(r?);
    }
    let open: Vec<String> = reports.iter().filter(|r| !r.eliminated()).map(|r| format!("p = {} {}", r.p, r.target)).collect();
    let mut summary = String::new();
    writeln!(summary, "{} primes x {} targets: {} eliminated", primes.len(), targets.len(), reports.len() - open.len())?;
    for o in &open {
        writeln!(summary, "not eliminated: {o}")?;
    }
    Ok(Outcome { result: serde_json::to_value(&reports)?, summary, inconclusive: !open.is_empty() })
}

fn run_tm_export(a: &TmExportArgs) -> anyhow::Result<Outcome> {
    let (c1, q) = a.pair;
    let tm = yeven_system(c1, q, a.parity.into(), a.p)?;
    let rec = tm.to_record();
    let summary = format!("{}\n", serde_json::to_string_pretty(&rec)?);
    Ok(Outcome { result: serde_json::to_value(&rec)?, summary, inconclusive: false })
}

fn run_bounds() -> anyhow::Result<Outcome> {
    let audit = lfl::audit()?;
    let mut summary = String::from("pair parity p y derived stated ok\n");
    for r in &audit.rows {
        writeln!(
            summary,
            "({},{}) {:?} {:.0e} {:.4e} {:.6e} {:.6e} {}",
            r.c1, r.q, r.parity, r.p as f64, r.y, r.derived, r.stated, r.consistent
        )?;
    }
    let n0: Vec<Value> = lfl::bundled_constants()
        .iter()
        .map(|i| json!({ "c1": i.c1, "q": i.q, "parity": i.parity, "n0": i.n0.to_string() }))
        .collect();
    for c in &audit.ypbig {
        writeln!(summary, "y^p certificate ({},{}) at p = {}: forced p <= {:.0}, certified {}", c.c1, c.q, c.p, c.forced_p_max, c.certified)?;
    }
    writeln!(summary, "{} discrepancies", audit.discrepancies.len())?;
    let uncertified = audit.ypbig.iter().any(|c| !c.certified);
    Ok(Outcome {
        result: json!({ "audit": audit, "n0": n0 }),
        summary,
        inconclusive: !audit.discrepancies.is_empty() || uncertified,
    })
}

fn execute(cmd: &Command, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Search(a) => run_search(a),
        Command::Pairs(a) => run_pairs(a),
        Command::Classgroup(a) => run_classgroup(a),
        Command::Curve(a) => run_curve(a, cfg),
        Command::Frey(a) => run_frey(a),
        Command::BoundP(a) => run_bound_p(a, cfg),
        Command::SieveKraus(a) => run_sieve(a, false, cfg),
        Command::SieveTm(a) => run_sieve(a, true, cfg),
        Command::SieveHighp(a) => run_highp(a, cfg),
        Command::TmExport(a) => run_tm_export(a),
        Command::Bounds(_) => run_bounds(),
        Command::Report(_) => unreachable!("reports are not nested"),
    }
}

fn render(report: &Report) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

fn build_report(cmd: &Command, cfg: &RunConfig, out: &Outcome) -> Report {
    Report {
        tool: "powdiff".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd.clone(),
        config: cfg.clone(),
        inconclusive: out.inconclusive,
        result: out.result.clone(),
    }
}

/// Writes under a content-hash name; an identical report is never rewritten.
fn save(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let digest = Sha256::digest(text.as_bytes());
    let hash: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    let path = dir.join(format!("{name}-{hash}.json"));
    if !path.exists() {
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(path)
}

fn run_report(a: &ReportArgs) -> anyhow::Result<u8> {
    let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let report: Report = serde_json::from_str(&text).context("not a powdiff report")?;
    println!("{} {} ({}), inconclusive: {}", report.tool, report.command.name(), report.version, report.inconclusive);
    if !a.rerun {
        return Ok(if report.inconclusive { EXIT_INCONCLUSIVE } else { 0 });
    }
    let cfg = report.config.clone();
    let out = execute(&report.command, &cfg)?;
    let again = render(&build_report(&report.command, &cfg, &out))?;
    if again == text {
        println!("re-run reproduces the report byte for byte");
        Ok(0)
    } else {
        println!("re-run differs from the saved report");
        Ok(EXIT_INCONCLUSIVE)
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    if let Command::Report(a) = &cli.command {
        return run_report(a);
    }
    let flags = PartialConfig {
        seed: cli.seed,
        m_max: cli.m_max,
        highp_m_max: cli.highp_m_max,
        threads: cli.threads,
        offline: cli.offline.then_some(true),
        cache_dir: cli.cache_dir.clone(),
        out_dir: cli.out_dir.clone(),
        save: cli.no_save.then_some(false),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(cli.config.as_deref(), &flags)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global().ok();
    }
    let start = Instant::now();
    let out = execute(&cli.command, &cfg)?;
    let report = build_report(&cli.command, &cfg, &out);
    let text = render(&report)?;
    if cli.json {
        print!("{text}");
    } else {
        print!("{}", out.summary);
    }
    if cfg.save {
        let path = save(&cfg.out_dir, cli.command.name(), &text)?;
        eprintln!("report: {}", path.display());
    }
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    Ok(if out.inconclusive { EXIT_INCONCLUSIVE } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            e.print().ok();
            return ExitCode::from(if usage { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
