//! Forecasts for decision models: day-ahead persistence point forecasts and
//! seeded truncated-normal scenario sets around them.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{sample_truncated_normal, Prng, SamplingError};
use crate::series::{ForecastOrigin, ForecastSet, RealizationSeries, SeriesError, TimeSeries};

pub const SECONDS_PER_HOUR: i64 = 3600;
pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario spec: {0}")]
    InvalidSpec(&'static str),
    #[error("a point forecast is required, got {0} members")]
    NotAPointForecast(usize),
    #[error("persistence needs realization data from {needed} but it starts at {available}")]
    InsufficientHistory { needed: i64, available: i64 },
    #[error("realization resolution {0} s does not divide one hour")]
    Resolution(u32),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Shape of a sampled scenario set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n_scenarios: u32,
    /// Standard deviation as a fraction of the point forecast.
    pub relative_sd: f64,
    /// Sampling interval as multiples `[lo, hi]` of the point forecast.
    pub truncation: [f64; 2],
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec { n_scenarios: 100, relative_sd: 0.30, truncation: [0.0, 2.0] }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_scenarios == 0 {
            return Err(ScenarioError::InvalidSpec("n_scenarios must be >= 1"));
        }
        if !(self.relative_sd >= 0.0) || !self.relative_sd.is_finite() {
            return Err(ScenarioError::InvalidSpec("relative_sd must be >= 0"));
        }
        let [lo, hi] = self.truncation;
        if !(lo >= 0.0) || !hi.is_finite() {
            return Err(ScenarioError::InvalidSpec("truncation bounds must be finite and lo >= 0"));
        }
        if !(lo < hi) {
            return Err(ScenarioError::InvalidSpec("truncation needs lo < hi"));
        }
        Ok(())
    }
}

/// Day-ahead persistence forecast of `hours` hourly values starting at
/// `start`.
///
/// Hour `h` gets the mean of the realization over hour `h mod 24` of the day
/// before `start`, so no value from the forecast period itself is ever used.
pub fn gen_point_forecast(realization: &RealizationSeries, start: i64, hours: usize) -> Result<ForecastSet, ScenarioError> {
    let ts = &realization.series;
    let res = i64::from(ts.resolution_s);
    if res == 0 || SECONDS_PER_HOUR % res != 0 {
        return Err(ScenarioError::Resolution(ts.resolution_s));
    }
    let history = start - SECONDS_PER_DAY;
    if history < ts.start {
        return Err(ScenarioError::InsufficientHistory { needed: history, available: ts.start });
    }
    let per_hour = (SECONDS_PER_HOUR / res) as usize;
    let day = ts.slice(history, 24 * per_hour)?;
    let hourly: Vec<f64> = day
        .values
        .chunks(per_hour)
        .map(|c| c.iter().sum::<f64>() / per_hour as f64)
        .collect();
    let values = (0..hours).map(|h| hourly[h % 24]).collect();
    let series = TimeSeries::new(start, SECONDS_PER_HOUR as u32, values)?;
    Ok(ForecastSet::point(
        realization.owner.clone(),
        ForecastOrigin::Persistence { source: realization.id, lag_s: SECONDS_PER_DAY },
        series,
    ))
}

/// Samples `spec.n_scenarios` equiprobable scenarios around a point forecast.
///
/// Each value is drawn independently as a normal with mean `f`, standard
/// deviation `relative_sd * f`, truncated to `[lo * f, hi * f]`. Draws run
/// scenario by scenario, hour by hour; hours with `f <= 0` yield zero and
/// consume no randomness.
pub fn gen_scenario_set(prng: &mut Prng, point: &ForecastSet, spec: &ScenarioSpec) -> Result<ForecastSet, ScenarioError> {
    spec.validate()?;
    if !point.is_point() {
        return Err(ScenarioError::NotAPointForecast(point.n_scenarios()));
    }
    let base = point.axis();
    let origin = ForecastOrigin::Sampled { base: point.id, prng_state: prng.state() };
    let [lo, hi] = spec.truncation;
    let n = spec.n_scenarios as usize;
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        let mut values = Vec::with_capacity(base.len());
        for &f in &base.values {
            let v = if f > 0.0 { sample_truncated_normal(prng, f, spec.relative_sd * f, lo * f, hi * f)? } else { 0.0 };
            values.push(v);
        }
        members.push(TimeSeries { start: base.start, resolution_s: base.resolution_s, values });
    }
    let p = 1.0 / n as f64;
    Ok(ForecastSet::scenarios(point.owner.clone(), origin, members, alloc::vec![p; n])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn realization(days: &[[f64; 24]]) -> RealizationSeries {
        let hourly: Vec<f64> = days.iter().flatten().copied().collect();
        let ts = TimeSeries::new(0, 3600, hourly).unwrap();
        RealizationSeries::new("w1", crate::series::resample_stepwise(&ts, 300).unwrap())
    }

    #[test]
    fn constant_persists() {
        let r = realization(&[[100.0; 24], [100.0; 24]]);
        let f = gen_point_forecast(&r, SECONDS_PER_DAY, 24).unwrap();
        assert_eq!(f.axis().values, vec![100.0; 24]);
        assert_eq!(f.axis().resolution_s, 3600);
    }

    #[test]
    fn forecast_is_previous_day_means() {
        let mut d1 = [0.0; 24];
        let mut d2 = [0.0; 24];
        for h in 0..24 {
            d1[h] = h as f64;
            d2[h] = 100.0 + h as f64;
        }
        // Make one hour of day 1 vary within the hour.
        let mut r = realization(&[d1, d2]);
        for k in 0..12 {
            r.series.values[5 * 12 + k] = k as f64;
        }
        let f = gen_point_forecast(&r, SECONDS_PER_DAY, 30).unwrap();
        let oracle: Vec<f64> = (0..30)
            .map(|h| {
                let hh = h % 24;
                r.series.values[hh * 12..hh * 12 + 12].iter().sum::<f64>() / 12.0
            })
            .collect();
        assert_eq!(f.axis().values, oracle);
        assert_eq!(f.axis().values[5], 5.5);
        assert!(matches!(f.origin, ForecastOrigin::Persistence { lag_s: SECONDS_PER_DAY, .. }));
    }

    #[test]
    fn first_day_lacks_history() {
        let r = realization(&[[1.0; 24]]);
        assert!(matches!(gen_point_forecast(&r, 0, 24), Err(ScenarioError::InsufficientHistory { .. })));
    }

    fn point(values: Vec<f64>) -> ForecastSet {
        ForecastSet::point("w1", ForecastOrigin::External, TimeSeries::new(0, 3600, values).unwrap())
    }

    #[test]
    fn hundred_scenarios_are_equiprobable() {
        let spec = ScenarioSpec::default();
        let set = gen_scenario_set(&mut Prng::new(1), &point(vec![50.0; 24]), &spec).unwrap();
        assert_eq!(set.n_scenarios(), 100);
        assert!(set.probabilities.iter().all(|p| *p == 0.01));
        assert!((set.probabilities.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_sd_copies_point() {
        let spec = ScenarioSpec { n_scenarios: 5, relative_sd: 0.0, ..ScenarioSpec::default() };
        let p = point(vec![3.0, 0.0, 7.5]);
        let set = gen_scenario_set(&mut Prng::new(9), &p, &spec).unwrap();
        for m in &set.members {
            assert_eq!(m.values, p.axis().values);
        }
    }

    #[test]
    fn zero_forecast_hours_stay_zero() {
        let spec = ScenarioSpec { n_scenarios: 20, ..ScenarioSpec::default() };
        let set = gen_scenario_set(&mut Prng::new(2), &point(vec![10.0, 0.0, 4.0]), &spec).unwrap();
        for m in &set.members {
            assert_eq!(m.values[1], 0.0);
            assert!(m.values[0] >= 0.0 && m.values[0] <= 20.0);
            assert!(m.values[2] >= 0.0 && m.values[2] <= 8.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = ScenarioSpec { n_scenarios: 10, ..ScenarioSpec::default() };
        let p = point(vec![10.0; 24]);
        let a = gen_scenario_set(&mut Prng::new(77), &p, &spec).unwrap();
        let b = gen_scenario_set(&mut Prng::new(77), &p, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_specs() {
        let p = point(vec![1.0]);
        for spec in [
            ScenarioSpec { n_scenarios: 0, ..ScenarioSpec::default() },
            ScenarioSpec { relative_sd: -0.1, ..ScenarioSpec::default() },
            ScenarioSpec { truncation: [1.0, 1.0], ..ScenarioSpec::default() },
        ] {
            assert!(matches!(gen_scenario_set(&mut Prng::new(0), &p, &spec), Err(ScenarioError::InvalidSpec(_))));
        }
    }
}
