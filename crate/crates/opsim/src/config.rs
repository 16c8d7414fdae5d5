//! Experiment configuration files and command-line overrides.
//!
//! ```json
//! {
//!   "name": "case2",
//!   "system_file": "../data/five_bus/system.json",
//!   "timeseries_dir": "../data/five_bus/profiles",
//!   "master_seed": 20190101,
//!   "n_trials": 10,
//!   "window_days": 30,
//!   "treatments": [
//!     {"kind": "uc"},
//!     {"kind": "suc", "n_scenarios": 100, "relative_sd": 0.3, "truncation": [0, 2]},
//!     {"kind": "ruc", "lookahead_h": 36, "apply_h": 24}
//!   ],
//!   "solver": {"mip_gap": 1e-4},
//!   "voll": 10000,
//!   "emulator_resolution_s": 300,
//!   "horizon_h": 24,
//!   "network": "network"
//! }
//! ```
//!
//! Paths are relative to the config file. Each load and wind farm reads
//! `<timeseries_dir>/<profile>.csv`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use opsim_core::experiment::PlanError;
use opsim_core::scenario::ScenarioSpec;
use opsim_core::{MetricName, NetworkMode, SolverSettings, Treatment};
use serde::{Deserialize, Serialize};

use crate::formats::{read, DataError};

fn default_voll() -> f64 {
    10_000.0
}

fn default_resolution() -> u32 {
    300
}

fn default_horizon() -> u32 {
    24
}

fn default_network() -> NetworkMode {
    NetworkMode::Network
}

fn default_metrics() -> Vec<MetricName> {
    MetricName::ALL.to_vec()
}

fn default_scenarios() -> u32 {
    ScenarioSpec::default().n_scenarios
}

fn default_sd() -> f64 {
    ScenarioSpec::default().relative_sd
}

fn default_truncation() -> [f64; 2] {
    ScenarioSpec::default().truncation
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreatmentConfig {
    Uc,
    Suc {
        #[serde(default = "default_scenarios")]
        n_scenarios: u32,
        #[serde(default = "default_sd")]
        relative_sd: f64,
        #[serde(default = "default_truncation")]
        truncation: [f64; 2],
    },
    Ruc {
        lookahead_h: u32,
        apply_h: u32,
    },
}

impl TreatmentConfig {
    pub fn treatment(&self) -> Treatment {
        match *self {
            TreatmentConfig::Uc => Treatment::deterministic(),
            TreatmentConfig::Suc { n_scenarios, relative_sd, truncation } => {
                Treatment::stochastic(ScenarioSpec { n_scenarios, relative_sd, truncation })
            }
            TreatmentConfig::Ruc { lookahead_h, apply_h } => Treatment::rolling(lookahead_h, apply_h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment id; names the output directory.
    pub name: String,
    pub system_file: PathBuf,
    pub timeseries_dir: PathBuf,
    pub master_seed: u64,
    pub n_trials: u32,
    pub window_days: u32,
    pub treatments: Vec<TreatmentConfig>,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Value of lost load, $/MWh.
    #[serde(default = "default_voll")]
    pub voll: f64,
    #[serde(default = "default_resolution")]
    pub emulator_resolution_s: u32,
    #[serde(default = "default_horizon")]
    pub horizon_h: u32,
    #[serde(default = "default_network")]
    pub network: NetworkMode,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricName>,
}

/// Values given on the command line in place of the config file's.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub master_seed: Option<u64>,
    pub trials: Option<u32>,
    pub days: Option<u32>,
    pub scenarios: Option<u32>,
}

impl Overrides {
    /// Applies the overrides and returns `field -> "config value -> new value"`
    /// for each one that was given.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> BTreeMap<String, String> {
        let mut log = BTreeMap::new();
        let mut note = |field: &str, old: String, new: String| {
            log.insert(field.to_string(), format!("{old} -> {new}"));
        };
        if let Some(seed) = self.master_seed {
            note("master_seed", cfg.master_seed.to_string(), seed.to_string());
            cfg.master_seed = seed;
        }
        if let Some(n) = self.trials {
            note("n_trials", cfg.n_trials.to_string(), n.to_string());
            cfg.n_trials = n;
        }
        if let Some(d) = self.days {
            note("window_days", cfg.window_days.to_string(), d.to_string());
            cfg.window_days = d;
        }
        if let Some(n) = self.scenarios {
            for t in &mut cfg.treatments {
                if let TreatmentConfig::Suc { n_scenarios, .. } = t {
                    note("n_scenarios", n_scenarios.to_string(), n.to_string());
                    *n_scenarios = n;
                }
            }
        }
        log
    }
}

/// A config file as read from disk.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// File contents, verbatim.
    pub text: String,
    /// Directory relative paths are resolved against.
    pub base: PathBuf,
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<LoadedConfig, DataError> {
        let text = String::from_utf8_lossy(&read(path)?).into_owned();
        let config = serde_json::from_str(&text).map_err(|e| DataError::MalformedFile {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, text, base })
    }

    pub fn system_path(&self) -> PathBuf {
        self.base.join(&self.config.system_file)
    }

    pub fn profile_path(&self, profile: &str) -> PathBuf {
        self.base.join(&self.config.timeseries_dir).join(format!("{profile}.csv"))
    }
}

impl ExperimentConfig {
    pub fn treatments(&self) -> Vec<Treatment> {
        self.treatments.iter().map(TreatmentConfig::treatment).collect()
    }

    pub fn ed_steps(&self) -> Result<u32, PlanError> {
        let res = self.emulator_resolution_s;
        if res == 0 || 3600 % res != 0 {
            return Err(PlanError::InvalidParameters(format!("emulator resolution {res} s must divide one hour")));
        }
        Ok(3600 / res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"name":"x","system_file":"s.json","timeseries_dir":"p","master_seed":3,
        "n_trials":2,"window_days":5,"treatments":[{"kind":"uc"},{"kind":"suc","n_scenarios":4}]}"#;

    #[test]
    fn defaults_fill_in() {
        let cfg: ExperimentConfig = serde_json::from_str(MINIMAL).unwrap();
        assert_eq!((cfg.voll, cfg.emulator_resolution_s, cfg.horizon_h), (10_000.0, 300, 24));
        assert_eq!(cfg.network, NetworkMode::Network);
        assert_eq!(cfg.metrics.len(), 7);
        assert_eq!(
            cfg.treatments[1],
            TreatmentConfig::Suc { n_scenarios: 4, relative_sd: 0.3, truncation: [0.0, 2.0] }
        );
        assert_eq!(cfg.ed_steps().unwrap(), 12);
    }

    #[test]
    fn overrides_are_logged() {
        let mut cfg: ExperimentConfig = serde_json::from_str(MINIMAL).unwrap();
        let log = Overrides { master_seed: Some(7), scenarios: Some(9), ..Default::default() }.apply(&mut cfg);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(log["master_seed"], "3 -> 7");
        assert_eq!(log["n_scenarios"], "4 -> 9");
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("\"name\"", "\"nmae\"");
        assert!(serde_json::from_str::<ExperimentConfig>(&text).is_err());
    }
}
