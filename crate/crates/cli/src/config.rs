//! Run configuration: built-in defaults, then a TOML file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use powdiff::sieves::{DEFAULT_HIGHP_M_MAX, DEFAULT_M_MAX, DEFAULT_SEED};

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Largest `m` for auxiliary primes `2mp + 1` in the residue sieves.
    pub m_max: u64,
    pub highp_m_max: u64,
    /// Auxiliary primes below this bound are used by `bound-p`.
    pub ell_max: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    /// Never query the remote curve database.
    pub offline: bool,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Write reports under `out_dir`.
    pub save: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            m_max: DEFAULT_M_MAX,
            highp_m_max: DEFAULT_HIGHP_M_MAX,
            ell_max: 100,
            threads: 0,
            offline: false,
            cache_dir: None,
            out_dir: PathBuf::from("powdiff-reports"),
            save: true,
        }
    }
}

/// The same fields, all optional, as read from a file or the command line.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub seed: Option<u64>,
    pub m_max: Option<u64>,
    pub highp_m_max: Option<u64>,
    pub ell_max: Option<u64>,
    pub threads: Option<usize>,
    pub offline: Option<bool>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub save: Option<bool>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

impl RunConfig {
    pub fn apply(mut self, p: &PartialConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &p.$f { self.$f = v.clone(); } )* };
        }
        take!(seed, m_max, highp_m_max, ell_max, threads, offline, out_dir, save);
        if p.cache_dir.is_some() {
            self.cache_dir = p.cache_dir.clone();
        }
        self
    }

    pub fn resolve(file: Option<&Path>, flags: &PartialConfig) -> anyhow::Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            cfg = cfg.apply(&PartialConfig::from_file(path)?);
        }
        cfg = cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.m_max == 0 || self.highp_m_max == 0 {
            bail!("m_max and highp_m_max must be positive");
        }
        if self.ell_max < 5 {
            bail!("ell_max = {} leaves no auxiliary primes; use at least 5", self.ell_max);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "seed = 7\nm_max = 50\nout_dir = \"from-file\"\n").unwrap();
        let flags = PartialConfig { m_max: Some(80), ..Default::default() };
        let cfg = RunConfig::resolve(Some(&path), &flags).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.m_max, 80);
        assert_eq!(cfg.out_dir, PathBuf::from("from-file"));
        assert_eq!(cfg.highp_m_max, DEFAULT_HIGHP_M_MAX);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "sed = 7\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), &PartialConfig::default()).is_err());
        fs::write(&path, "m_max = 0\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), &PartialConfig::default()).is_err());
    }
}
