//! Experiment settings from flags and an optional TOML file; flags take precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_SLACK: f64 = auctions_core::bounds::DEFAULT_SLACK;
pub const MAX_SLACK: f64 = 0.2;

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub instance: Option<PathBuf>,
    pub mechanism: Option<String>,
    pub tau: Option<TauList>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub slack: Option<f64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TauList {
    One(f64),
    Many(Vec<f64>),
}

impl TauList {
    fn into_vec(self) -> Vec<f64> {
        match self {
            TauList::One(t) => vec![t],
            TauList::Many(v) => v,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Settings after merging flags over the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance_path: Option<PathBuf>,
    pub mechanism: Option<String>,
    pub taus: Vec<f64>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub slack: f64,
    pub workers: usize,
}

/// Flag values before merging.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlagValues {
    pub instance: Option<PathBuf>,
    pub mechanism: Option<String>,
    pub tau: Vec<f64>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub slack: Option<f64>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn resolve(flags: FlagValues, file: FileConfig) -> CliResult<Self> {
        let taus = if flags.tau.is_empty() { file.tau.map(TauList::into_vec).unwrap_or_default() } else { flags.tau };
        let cfg = Self {
            instance_path: flags.instance.or(file.instance),
            mechanism: flags.mechanism.or(file.mechanism),
            taus,
            replicates: flags.replicates.or(file.replicates),
            seed: flags.seed.or(file.seed),
            output_path: flags.out.or(file.out),
            slack: flags.slack.or(file.slack).unwrap_or(DEFAULT_SLACK),
            workers: flags.workers.or(file.workers).unwrap_or(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if !(0.0..=MAX_SLACK).contains(&self.slack) {
            return Err(CliError::Usage(format!("slack must lie in [0, {MAX_SLACK}], got {}", self.slack)));
        }
        if self.workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        if let Some(r) = self.replicates {
            if r < 2 {
                return Err(CliError::Usage(format!("--replicates must be at least 2, got {r}")));
            }
        }
        if let Some(t) = self.taus.iter().find(|t| !(t.is_finite() && **t > 1.0)) {
            return Err(CliError::Usage(format!("tau must exceed 1, got {t}")));
        }
        Ok(())
    }

    /// Seeds are never drawn from the clock.
    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Usage("a --seed (or `seed` in the config file) is required".into()))
    }

    pub fn replicates_or(&self, default: u64) -> u64 {
        self.replicates.unwrap_or(default)
    }

    pub fn require_instance(&self) -> CliResult<&Path> {
        self.instance_path.as_deref().ok_or_else(|| CliError::Usage("--instance is required".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("seed = 3\nreplicates = 100\ntau = [2.0, 4.0]\nslack = 0.05\n").unwrap();
        let flags = FlagValues { seed: Some(9), ..FlagValues::default() };
        let cfg = ExperimentConfig::resolve(flags, file).unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.replicates, Some(100));
        assert_eq!(cfg.taus, vec![2.0, 4.0]);
        assert_eq!(cfg.slack, 0.05);
        assert_eq!(cfg.workers, 1);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            FlagValues { slack: Some(0.5), ..FlagValues::default() },
            FlagValues { workers: Some(0), ..FlagValues::default() },
            FlagValues { replicates: Some(1), ..FlagValues::default() },
            FlagValues { tau: vec![1.0], ..FlagValues::default() },
        ];
        for flags in bad {
            assert!(ExperimentConfig::resolve(flags, FileConfig::default()).is_err());
        }
        assert!(toml::from_str::<FileConfig>("sede = 1").is_err());
        let cfg = ExperimentConfig::resolve(FlagValues::default(), FileConfig::default()).unwrap();
        assert!(cfg.require_seed().is_err());
        assert_eq!(cfg.slack, DEFAULT_SLACK);
    }
}
