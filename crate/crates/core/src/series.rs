//! Time series and the two roles they play in a trial.
//!
//! A [`ForecastSet`] is what a decision model is allowed to see; a
//! [`RealizationSeries`] is what the emulator sees. The two are separate types
//! with no conversion between them, and each carries a [`SeriesId`] so the
//! simulation can assert at run time that no emulator input was handed to a
//! decision model.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fnv::Fnv64;

/// Probability mass tolerance for scenario sets.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("time series is empty")]
    EmptySeries,
    #[error("resolution must be positive")]
    ZeroResolution,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("non-uniform spacing at sample {index}: expected {expected} s, found {found} s")]
    NonUniformSpacing { index: usize, expected: i64, found: i64 },
    #[error("negative value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("new resolution {new} s does not divide {old} s")]
    NonDivisibleResolution { old: u32, new: u32 },
    #[error("slice [{start}, {start}+{len}) outside series of {available} samples")]
    OutOfRange { start: i64, len: usize, available: usize },
    #[error("forecast set has no members")]
    NoMembers,
    #[error("probabilities and members differ in length")]
    ProbabilityCount,
    #[error("probability {0} is not positive")]
    NonPositiveProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("scenario {0} does not share the time axis of scenario 0")]
    MisalignedMember(usize),
}

/// Uniformly spaced samples on an abstract integer-second time axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// Timestamp of the first sample, seconds.
    pub start: i64,
    pub resolution_s: u32,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start: i64, resolution_s: u32, values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::EmptySeries);
        }
        if resolution_s == 0 {
            return Err(SeriesError::ZeroResolution);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite(i));
        }
        Ok(TimeSeries { start, resolution_s, values })
    }

    /// Builds a series from explicit timestamps, inferring the resolution from
    /// the first two and checking every later gap against it.
    pub fn from_samples(timestamps: &[i64], values: Vec<f64>) -> Result<Self, SeriesError> {
        if timestamps.is_empty() || values.is_empty() {
            return Err(SeriesError::EmptySeries);
        }
        debug_assert_eq!(timestamps.len(), values.len());
        let resolution = if timestamps.len() > 1 { timestamps[1] - timestamps[0] } else { 3600 };
        if resolution <= 0 || resolution > i64::from(u32::MAX) {
            return Err(SeriesError::NonUniformSpacing {
                index: 1,
                expected: 3600,
                found: resolution,
            });
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap != resolution {
                return Err(SeriesError::NonUniformSpacing {
                    index: i + 1,
                    expected: resolution,
                    found: gap,
                });
            }
        }
        TimeSeries::new(timestamps[0], resolution as u32, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One past the last covered second.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 * i64::from(self.resolution_s)
    }

    pub fn timestamp(&self, index: usize) -> i64 {
        self.start + index as i64 * i64::from(self.resolution_s)
    }

    /// Energy in MWh when values are MW.
    pub fn energy_mwh(&self) -> f64 {
        self.values.iter().sum::<f64>() * f64::from(self.resolution_s) / 3600.0
    }

    pub fn check_non_negative(&self) -> Result<(), SeriesError> {
        match self.values.iter().position(|v| *v < 0.0) {
            Some(index) => Err(SeriesError::NegativeValue { index, value: self.values[index] }),
            None => Ok(()),
        }
    }

    /// Samples covering `[from, from + len * resolution)`. `from` must sit on
    /// the sample grid.
    pub fn slice(&self, from: i64, len: usize) -> Result<TimeSeries, SeriesError> {
        let res = i64::from(self.resolution_s);
        let offset = from - self.start;
        let out_of_range =
            SeriesError::OutOfRange { start: from, len, available: self.values.len() };
        if offset < 0 || offset % res != 0 {
            return Err(out_of_range);
        }
        let first = (offset / res) as usize;
        if first + len > self.values.len() || len == 0 {
            return Err(out_of_range);
        }
        Ok(TimeSeries {
            start: from,
            resolution_s: self.resolution_s,
            values: self.values[first..first + len].to_vec(),
        })
    }

    pub fn scaled(&self, factor: f64) -> TimeSeries {
        TimeSeries {
            start: self.start,
            resolution_s: self.resolution_s,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    fn same_axis(&self, other: &TimeSeries) -> bool {
        self.start == other.start
            && self.resolution_s == other.resolution_s
            && self.values.len() == other.values.len()
    }
}

/// Stepwise-constant expansion to a finer resolution.
pub fn resample_stepwise(ts: &TimeSeries, new_resolution: u32) -> Result<TimeSeries, SeriesError> {
    if new_resolution == 0 || ts.resolution_s % new_resolution != 0 {
        return Err(SeriesError::NonDivisibleResolution { old: ts.resolution_s, new: new_resolution });
    }
    let k = (ts.resolution_s / new_resolution) as usize;
    let mut values = Vec::with_capacity(ts.values.len() * k);
    for v in &ts.values {
        values.extend(core::iter::repeat(*v).take(k));
    }
    Ok(TimeSeries { start: ts.start, resolution_s: new_resolution, values })
}

/// Stable identifier of a series object, used for provenance checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesId(pub u64);

impl SeriesId {
    /// Deterministic id from a list of labels and integers.
    pub fn derive(labels: &[&str], numbers: &[i64]) -> SeriesId {
        let mut h = Fnv64::new();
        for l in labels {
            h.write(l.as_bytes());
            h.write(&[0xff]);
        }
        for n in numbers {
            h.write_u64(*n as u64);
        }
        SeriesId(h.finish())
    }
}

/// Observed values fed to the emulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationSeries {
    pub owner: String,
    pub id: SeriesId,
    pub series: TimeSeries,
}

impl RealizationSeries {
    pub fn new(owner: impl Into<String>, series: TimeSeries) -> Self {
        let owner = owner.into();
        let id = SeriesId::derive(&["realization", &owner], &[series.start]);
        RealizationSeries { owner, id, series }
    }

    /// A sub-window. The slice keeps the parent's id: it is the same
    /// observation, just fewer samples of it.
    pub fn slice(&self, from: i64, len: usize) -> Result<RealizationSeries, SeriesError> {
        Ok(RealizationSeries { owner: self.owner.clone(), id: self.id, series: self.series.slice(from, len)? })
    }
}

/// How a forecast was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ForecastOrigin {
    /// Hourly means of an earlier window of the named realization.
    Persistence { source: SeriesId, lag_s: i64 },
    /// Seeded scenario draws around a point forecast.
    Sampled { base: SeriesId, prng_state: u64 },
    /// Supplied directly (tests, external forecast files).
    External,
    /// Values copied from a realization covering the same period. Exists so
    /// the leak can be represented, and is always rejected by decision models.
    CopiedRealization { source: SeriesId },
}

/// Point forecast or probability-weighted scenario set for one device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    pub owner: String,
    pub id: SeriesId,
    pub origin: ForecastOrigin,
    pub members: Vec<TimeSeries>,
    pub probabilities: Vec<f64>,
}

impl ForecastSet {
    pub fn point(owner: impl Into<String>, origin: ForecastOrigin, series: TimeSeries) -> Self {
        let owner = owner.into();
        let id = SeriesId::derive(&["forecast", &owner], &[series.start, 1]);
        ForecastSet { owner, id, origin, members: alloc::vec![series], probabilities: alloc::vec![1.0] }
    }

    pub fn scenarios(
        owner: impl Into<String>,
        origin: ForecastOrigin,
        members: Vec<TimeSeries>,
        probabilities: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let owner = owner.into();
        let start = members.first().map(|m| m.start).unwrap_or(0);
        let id = SeriesId::derive(&["forecast", &owner], &[start, members.len() as i64]);
        let set = ForecastSet { owner, id, origin, members, probabilities };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), SeriesError> {
        let first = self.members.first().ok_or(SeriesError::NoMembers)?;
        if self.members.len() != self.probabilities.len() {
            return Err(SeriesError::ProbabilityCount);
        }
        if let Some(p) = self.probabilities.iter().find(|p| !(**p > 0.0)) {
            return Err(SeriesError::NonPositiveProbability(*p));
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(SeriesError::ProbabilitySum(total));
        }
        if let Some(i) = self.members.iter().position(|m| !m.same_axis(first)) {
            return Err(SeriesError::MisalignedMember(i));
        }
        Ok(())
    }

    pub fn n_scenarios(&self) -> usize {
        self.members.len()
    }

    pub fn is_point(&self) -> bool {
        self.members.len() == 1
    }

    pub fn axis(&self) -> &TimeSeries {
        &self.members[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn from_samples_infers_resolution() {
        let ts = TimeSeries::from_samples(&[0, 3600, 7200], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(ts.resolution_s, 3600);
        assert_eq!(ts.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn non_uniform_spacing_rejected() {
        let err = TimeSeries::from_samples(&[0, 3600, 5400], vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, SeriesError::NonUniformSpacing { index: 2, .. }));
    }

    #[test]
    fn year_of_hours() {
        let ticks: Vec<i64> = (0..8760).map(|h| h * 3600).collect();
        let ts = TimeSeries::from_samples(&ticks, vec![1.0; 8760]).unwrap();
        assert_eq!(ts.end() - ts.start, 365 * 86_400);
    }

    #[test]
    fn resample_hourly_to_five_minutes() {
        let ts = TimeSeries::new(0, 3600, vec![10.0, 20.0]).unwrap();
        let fine = resample_stepwise(&ts, 300).unwrap();
        assert_eq!(fine.len(), 24);
        assert!(fine.values[..12].iter().all(|v| *v == 10.0));
        assert!(fine.values[12..].iter().all(|v| *v == 20.0));
    }

    #[test]
    fn resample_identity_and_errors() {
        let ts = TimeSeries::new(5, 900, vec![1.0, 4.0]).unwrap();
        assert_eq!(resample_stepwise(&ts, 900).unwrap(), ts);
        assert_eq!(
            resample_stepwise(&ts, 700),
            Err(SeriesError::NonDivisibleResolution { old: 900, new: 700 })
        );
    }

    #[test]
    fn slice_bounds() {
        let ts = TimeSeries::new(0, 300, (0..24).map(f64::from).collect()).unwrap();
        let s = ts.slice(600, 3).unwrap();
        assert_eq!(s.values, vec![2.0, 3.0, 4.0]);
        assert!(ts.slice(100, 1).is_err());
        assert!(ts.slice(0, 25).is_err());
    }

    #[test]
    fn scenario_probabilities_checked() {
        let m = TimeSeries::new(0, 3600, vec![1.0]).unwrap();
        let bad = ForecastSet::scenarios("w", ForecastOrigin::External, vec![m.clone(), m.clone()], vec![0.5, 0.6]);
        assert!(matches!(bad, Err(SeriesError::ProbabilitySum(_))));
        let ok = ForecastSet::scenarios("w", ForecastOrigin::External, vec![m.clone(), m], vec![0.5, 0.5]);
        assert!(ok.is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn resample_preserves_energy(
            values in proptest::collection::vec(0.0f64..1e4, 1..200),
            k in 1u32..24,
        ) {
            let ts = TimeSeries::new(0, 300 * k, values).unwrap();
            let fine = resample_stepwise(&ts, 300).unwrap();
            // Direct summation oracle.
            let coarse: f64 = ts.values.iter().map(|v| v * f64::from(300 * k) / 3600.0).sum();
            let fine_e: f64 = fine.values.iter().map(|v| v * 300.0 / 3600.0).sum();
            prop_assert!((coarse - fine_e).abs() <= 1e-9 * coarse.abs().max(1.0));
        }
    }
}
