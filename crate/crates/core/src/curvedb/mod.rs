//! Target curves for the bad pairs: a bundled Cremona-labelled data file,
//! the per-pair candidate lists and an optional remote lookup with an
//! on-disk cache.

mod remote;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::ellcurve::{tate_conductor, CurveQ};
use crate::error::{Error, Result};

pub use remote::{RemoteClient, RemoteConfig, DEFAULT_URL_TEMPLATE};

const BUNDLED: &str = include_str!("../../data/curves.json");

/// A curve with its Cremona label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub label: String,
    #[serde(with = "decimal_array")]
    pub a_invariants: [BigInt; 5],
    #[serde(with = "decimal")]
    pub conductor: BigInt,
}

impl CurveRecord {
    pub fn curve(&self) -> Result<CurveQ> {
        CurveQ::from_bigints(&self.a_invariants)
    }

    /// Checks the label shape, the label/conductor agreement and that Tate's
    /// algorithm reproduces the stored conductor.
    pub fn validate(&self) -> Result<()> {
        let (level, _, _) = parse_label(&self.label)?;
        if BigInt::from(level) != self.conductor {
            return Err(Error::Database(format!(
                "{}: conductor {} disagrees with label",
                self.label, self.conductor
            )));
        }
        let n = tate_conductor(&self.curve()?)?.conductor;
        if n != self.conductor {
            return Err(Error::Database(format!("{}: Tate's algorithm gives conductor {n}", self.label)));
        }
        Ok(())
    }
}

/// Splits a Cremona label "1274j1" into (1274, "j", 1).
pub fn parse_label(label: &str) -> Result<(u64, String, u32)> {
    let bad = || Error::NotFound(label.to_string());
    let digits_end = label.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
    let rest = &label[digits_end..];
    let letters_end = rest.find(|c: char| !c.is_ascii_lowercase()).ok_or_else(bad)?;
    let (class, index) = rest.split_at(letters_end);
    if digits_end == 0 || class.is_empty() || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let level = label[..digits_end].parse().map_err(|_| bad())?;
    let index = index.parse().map_err(|_| bad())?;
    if level == 0 || index == 0 {
        return Err(bad());
    }
    Ok((level, class.to_string(), index))
}

/// Parity of the exponent on q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(alpha: u64) -> Self {
        if alpha.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Pairs (C₁, q) where the Frey curve can be level-lowered to a rational
/// newform, with the Cremona labels of the possible curves.
pub const ODD_TARGETS: &[((u64, u64), &[&str])] = &[
    ((1, 7), &["14a1"]),
    ((1, 23), &["46a1"]),
    ((3, 5), &["90a1", "90b1"]),
    ((3, 13), &["234b1", "234c1"]),
    ((5, 3), &["150a1", "150b1"]),
    ((5, 11), &["550g1", "550l1"]),
    ((11, 5), &["1210a1", "1210h1"]),
    ((13, 3), &["1014c1", "1014g1"]),
    ((13, 11), &["3718c1", "3718r1"]),
];

pub const EVEN_TARGETS: &[((u64, u64), &[&str])] = &[
    ((7, 3), &["294f1", "294g1"]),
    ((7, 5), &["490g1", "490j1"]),
    ((7, 11), &["1078l1", "1078m1"]),
    ((7, 13), &["1274j1", "1274m1"]),
    ((7, 23), &["2254d1", "2254e1"]),
    ((15, 7), &["3150e1", "3150i1", "3150z1", "3150bd1"]),
    ((15, 11), &["4950e1", "4950g1", "4950bb1", "4950bc1"]),
    ((15, 17), &["7650h1", "7650i1", "7650bo1", "7650bp1"]),
];

pub fn target_table(parity: Parity) -> &'static [((u64, u64), &'static [&'static str])] {
    match parity {
        Parity::Odd => ODD_TARGETS,
        Parity::Even => EVEN_TARGETS,
    }
}

/// Candidate curves for a pair, with a flag when the pair has none.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidates {
    pub records: Vec<CurveRecord>,
    pub is_bad_pair: bool,
}

/// Bundled records plus an optional remote fallback.
#[derive(Debug)]
pub struct CurveDb {
    records: BTreeMap<String, CurveRecord>,
    remote: Option<RemoteClient>,
}

fn bundled_records() -> &'static BTreeMap<String, CurveRecord> {
    static CELL: OnceLock<BTreeMap<String, CurveRecord>> = OnceLock::new();
    CELL.get_or_init(|| {
        let list: Vec<CurveRecord> = serde_json::from_str(BUNDLED).expect("bundled curve data is valid JSON");
        list.into_iter().map(|r| (r.label.clone(), r)).collect()
    })
}

impl CurveDb {
    /// Offline database over the bundled file.
    pub fn bundled() -> Self {
        CurveDb { records: bundled_records().clone(), remote: None }
    }

    pub fn with_remote(mut self, client: RemoteClient) -> Self {
        self.remote = Some(client);
        self
    }

    pub fn records(&self) -> impl Iterator<Item = &CurveRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn lookup(&self, label: &str) -> Result<CurveRecord> {
        parse_label(label)?;
        if let Some(r) = self.records.get(label) {
            return Ok(r.clone());
        }
        match &self.remote {
            Some(client) => client.fetch(label),
            None => Err(Error::NotFound(label.to_string())),
        }
    }

    /// Isogeny classes (first curve of each) at a level.
    pub fn classes_at_level(&self, level: u64) -> Vec<&CurveRecord> {
        self.records
            .values()
            .filter(|r| matches!(parse_label(&r.label), Ok((n, _, 1)) if n == level))
            .collect()
    }

    pub fn candidates_for(&self, c1: u64, q: u64, parity: Parity) -> Result<Candidates> {
        match target_table(parity).iter().find(|(pair, _)| *pair == (c1, q)) {
            None => Ok(Candidates { records: Vec::new(), is_bad_pair: false }),
            Some((_, labels)) => {
                let records = labels.iter().map(|l| self.lookup(l)).collect::<Result<_>>()?;
                Ok(Candidates { records, is_bad_pair: true })
            }
        }
    }
}

mod decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

mod decimal_array {
    use num_bigint::BigInt;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt; 5], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(5))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[BigInt; 5], D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        let parsed: Vec<BigInt> = v.iter().map(|s| s.parse().map_err(D::Error::custom)).collect::<Result<_, _>>()?;
        parsed.try_into().map_err(|_| D::Error::custom("expected five a-invariants"))
    }
}
