//! System files (JSON) and time-series files (CSV).
//!
//! # System file
//!
//! A JSON object with keys `name`, `base_power`, `buses`, `lines`,
//! `thermal_gens`, `renewable_gens` and `loads`. Unknown keys are rejected.
//! Optional fields and their defaults:
//!
//! | field | default |
//! |---|---|
//! | `name` | `""` |
//! | `base_power` | `100` MVA |
//! | `buses[].reference` | `false` |
//! | `lines`, `renewable_gens`, `loads` | empty |
//! | `thermal_gens[].p_min` | `0` |
//! | `thermal_gens[].ramp_up`, `ramp_down` | `p_max` MW/h |
//! | `thermal_gens[].min_up`, `min_down` | `1` h |
//! | `thermal_gens[].startup_cost`, `no_load_cost` | `0` |
//! | `thermal_gens[].must_run` | `false` |
//! | `renewable_gens[].profile`, `loads[].profile` | the device id |
//!
//! `cost_curve` is a list of `{"breakpoint": MW, "marginal_cost": $/MWh}`;
//! the first segment starts at `p_min`.
//!
//! # Time-series file
//!
//! CSV with header `timestamp,value`. Timestamps are integer seconds or
//! ISO-8601 date-times (`2024-01-01T00:00:00`, optionally with an offset or
//! `Z`); they must be uniformly spaced.

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime};
use opsim_core::series::SeriesError;
use opsim_core::system::{Bus, CostSegment, Line, Load, RenewableGen, ThermalGen};
use opsim_core::{System, TimeSeries};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    MalformedFile { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {device} refers to unknown bus \"{bus}\"")]
    ReferentialIntegrity { path: PathBuf, device: String, bus: String },
    #[error("{path}: {source}")]
    Series { path: PathBuf, source: SeriesError },
    #[error("{path}: covers {found_s} s, the experiment needs {needed_s} s")]
    Coverage { path: PathBuf, needed_s: i64, found_s: i64 },
}

impl DataError {
    pub fn io(path: &Path, source: std::io::Error) -> DataError {
        DataError::Io { path: path.to_path_buf(), source }
    }
}

pub fn read(path: &Path) -> Result<Vec<u8>, DataError> {
    std::fs::read(path).map_err(|e| DataError::io(path, e))
}

fn default_base_power() -> f64 {
    100.0
}

fn one() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(default)]
    name: String,
    #[serde(default = "default_base_power")]
    base_power: f64,
    buses: Vec<RawBus>,
    #[serde(default)]
    lines: Vec<Line>,
    #[serde(default)]
    thermal_gens: Vec<RawThermal>,
    #[serde(default)]
    renewable_gens: Vec<RawRenewable>,
    #[serde(default)]
    loads: Vec<RawLoad>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBus {
    id: String,
    #[serde(default)]
    reference: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermal {
    id: String,
    bus: String,
    #[serde(default)]
    p_min: f64,
    p_max: f64,
    ramp_up: Option<f64>,
    ramp_down: Option<f64>,
    #[serde(default = "one")]
    min_up: u32,
    #[serde(default = "one")]
    min_down: u32,
    #[serde(default)]
    startup_cost: f64,
    #[serde(default)]
    no_load_cost: f64,
    cost_curve: Vec<CostSegment>,
    #[serde(default)]
    must_run: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRenewable {
    id: String,
    bus: String,
    installed_capacity: f64,
    profile: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoad {
    id: String,
    bus: String,
    peak: f64,
    profile: Option<String>,
}

/// Parses a system document. `path` only labels errors.
pub fn parse_system_str(text: &str, path: &Path) -> Result<System, DataError> {
    let raw: RawSystem = serde_json::from_str(text).map_err(|e| DataError::MalformedFile {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let sys = System {
        name: raw.name,
        base_power: raw.base_power,
        buses: raw.buses.into_iter().map(|b| Bus { id: b.id, reference: b.reference }).collect(),
        lines: raw.lines,
        thermal_gens: raw
            .thermal_gens
            .into_iter()
            .map(|g| ThermalGen {
                ramp_up: g.ramp_up.unwrap_or(g.p_max),
                ramp_down: g.ramp_down.unwrap_or(g.p_max),
                id: g.id,
                bus: g.bus,
                p_min: g.p_min,
                p_max: g.p_max,
                min_up: g.min_up,
                min_down: g.min_down,
                startup_cost: g.startup_cost,
                no_load_cost: g.no_load_cost,
                cost_curve: g.cost_curve,
                must_run: g.must_run,
            })
            .collect(),
        renewable_gens: raw
            .renewable_gens
            .into_iter()
            .map(|r| RenewableGen {
                profile: r.profile.unwrap_or_else(|| r.id.clone()),
                id: r.id,
                bus: r.bus,
                installed_capacity: r.installed_capacity,
            })
            .collect(),
        loads: raw
            .loads
            .into_iter()
            .map(|l| Load { profile: l.profile.unwrap_or_else(|| l.id.clone()), id: l.id, bus: l.bus, peak: l.peak })
            .collect(),
    };
    let links = sys
        .lines
        .iter()
        .flat_map(|l| [(&l.id, &l.from_bus), (&l.id, &l.to_bus)])
        .chain(sys.thermal_gens.iter().map(|g| (&g.id, &g.bus)))
        .chain(sys.renewable_gens.iter().map(|g| (&g.id, &g.bus)))
        .chain(sys.loads.iter().map(|l| (&l.id, &l.bus)));
    for (device, bus) in links {
        if sys.bus_index(bus).is_none() {
            return Err(DataError::ReferentialIntegrity {
                path: path.to_path_buf(),
                device: device.clone(),
                bus: bus.clone(),
            });
        }
    }
    Ok(sys)
}

/// Reads a system file. Type invariants beyond bus references are left to
/// `validate_system`.
pub fn parse_system(path: &Path) -> Result<System, DataError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| DataError::MalformedFile {
        path: path.to_path_buf(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    parse_system_str(&text, path)
}

/// The system with every field written out; parsing the result gives the
/// same system back.
pub fn write_system(sys: &System) -> String {
    serde_json::to_string_pretty(sys).expect("system serializes") + "\n"
}

fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(t) = s.parse::<i64>() {
        return Some(t);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| t.and_utc().timestamp())
}

/// Parses CSV text. `path` only labels errors.
pub fn parse_timeseries_str(text: &str, path: &Path) -> Result<TimeSeries, DataError> {
    let malformed = |line: usize, message: String| DataError::MalformedFile { path: path.to_path_buf(), line, column: 0, message };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| malformed(1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["timestamp", "value"] {
        return Err(malformed(1, format!("expected header \"timestamp,value\", found \"{}\"", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut stamps = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| malformed(line, e.to_string()))?;
        if rec.len() != 2 {
            return Err(malformed(line, format!("expected 2 fields, found {}", rec.len())));
        }
        let t = parse_timestamp(&rec[0]).ok_or_else(|| malformed(line, format!("bad timestamp \"{}\"", &rec[0])))?;
        let v: f64 = rec[1].parse().map_err(|_| malformed(line, format!("bad value \"{}\"", &rec[1])))?;
        stamps.push(t);
        values.push(v);
    }
    TimeSeries::from_samples(&stamps, values).map_err(|source| DataError::Series { path: path.to_path_buf(), source })
}

pub fn parse_timeseries(path: &Path) -> Result<TimeSeries, DataError> {
    let bytes = read(path)?;
    parse_timeseries_str(&String::from_utf8_lossy(&bytes), path)
}

/// A load or wind profile: a time series that must not go negative.
pub fn parse_profile(path: &Path) -> Result<TimeSeries, DataError> {
    let ts = parse_timeseries(path)?;
    ts.check_non_negative().map_err(|source| DataError::Series { path: path.to_path_buf(), source })?;
    Ok(ts)
}
