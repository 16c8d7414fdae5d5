//! Loads the system and annual profiles named by a config and turns them
//! into experiment parameters and realized trial data.
//!
//! Profiles are normalized (load as a fraction of peak, wind as a capacity
//! factor) and must cover `DATA_DAYS + 1` days: the first day is history for
//! the persistence forecast of day 0, and is placed at `t = -86400` whatever
//! the file's own timestamps are.

use std::collections::BTreeMap;
use std::path::PathBuf;

use opsim_core::experiment::DATA_DAYS;
use opsim_core::scenario::SECONDS_PER_DAY;
use opsim_core::{resample_stepwise, ExperimentParameters, RealizationSeries, System, TimeSeries, TrialData};

use crate::config::LoadedConfig;
use crate::digest::sha256_hex;
use crate::formats::{parse_profile, parse_system, read, DataError};

#[derive(Debug, Clone)]
pub struct Profile {
    pub path: PathBuf,
    pub digest: String,
    pub series: TimeSeries,
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub system: System,
    pub system_digest: String,
    /// By profile name.
    pub profiles: BTreeMap<String, Profile>,
}

pub fn load_inputs(cfg: &LoadedConfig) -> Result<Inputs, DataError> {
    let system_path = cfg.system_path();
    let system_digest = sha256_hex(&read(&system_path)?);
    let system = parse_system(&system_path)?;
    let names = system.loads.iter().map(|l| &l.profile).chain(system.renewable_gens.iter().map(|r| &r.profile));
    let mut profiles = BTreeMap::new();
    for name in names {
        if profiles.contains_key(name) {
            continue;
        }
        let path = cfg.profile_path(name);
        let digest = sha256_hex(&read(&path)?);
        let series = parse_profile(&path)?;
        profiles.insert(name.clone(), Profile { path, digest, series });
    }
    Ok(Inputs { system, system_digest, profiles })
}

impl Inputs {
    pub fn parameters(&self, cfg: &LoadedConfig) -> Result<ExperimentParameters, opsim_core::experiment::PlanError> {
        let c = &cfg.config;
        Ok(ExperimentParameters {
            system: self.system.clone(),
            // Relative to the config file, so the plan does not depend on the
            // working directory.
            profile_refs: self
                .profiles
                .keys()
                .map(|name| (name.clone(), c.timeseries_dir.join(format!("{name}.csv")).to_string_lossy().replace('\\', "/")))
                .collect(),
            emulator_resolution_s: c.emulator_resolution_s,
            ed_steps: c.ed_steps()?,
            horizon_h: c.horizon_h,
            master_seed: c.master_seed,
            solver: c.solver.clone(),
            value_of_lost_load: c.voll,
            network: c.network,
            metrics: c.metrics.clone(),
        })
    }

    fn realization(&self, owner: &str, profile: &str, scale: f64, resolution_s: u32) -> Result<RealizationSeries, DataError> {
        let p = &self.profiles[profile];
        let needed = (i64::from(DATA_DAYS) + 1) * SECONDS_PER_DAY;
        let found = p.series.end() - p.series.start;
        if found < needed {
            return Err(DataError::Coverage { path: p.path.clone(), needed_s: needed, found_s: found });
        }
        let rebased = TimeSeries { start: -SECONDS_PER_DAY, ..p.series.scaled(scale) };
        let fine = resample_stepwise(&rebased, resolution_s).map_err(|source| DataError::Series { path: p.path.clone(), source })?;
        Ok(RealizationSeries::new(owner, fine))
    }

    /// MW realizations at the emulator resolution, shared by every trial.
    pub fn trial_data(&self, resolution_s: u32) -> Result<TrialData, DataError> {
        let sys = &self.system;
        Ok(TrialData {
            wind: sys
                .renewable_gens
                .iter()
                .map(|r| self.realization(&r.id, &r.profile, r.installed_capacity, resolution_s))
                .collect::<Result<_, _>>()?,
            load: sys.loads.iter().map(|l| self.realization(&l.id, &l.profile, l.peak, resolution_s)).collect::<Result<_, _>>()?,
        })
    }
}
