//! Per-trial metrics of a finished case and their aggregation across trials.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::TreatmentKind;
use crate::formulations::ModelKind;
use crate::simulation::{CaseOutcome, CaseRun};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("case {0} did not complete")]
    IncompleteRun(String),
    #[error("no records for {treatment:?} / {metric}")]
    EmptyGroup { treatment: TreatmentKind, metric: MetricName },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricName {
    #[serde(rename = "fuel_cost_total")]
    FuelCostTotal,
    #[serde(rename = "cost_commitment")]
    CostCommitment,
    #[serde(rename = "cost_variable")]
    CostVariable,
    #[serde(rename = "ens_MWh")]
    EnsMwh,
    #[serde(rename = "solve_time_decision_avg")]
    SolveTimeDecisionAvg,
    #[serde(rename = "solve_time_decision_max")]
    SolveTimeDecisionMax,
    #[serde(rename = "solve_time_ed_avg")]
    SolveTimeEdAvg,
}

impl MetricName {
    pub const ALL: [MetricName; 7] = [
        MetricName::FuelCostTotal,
        MetricName::CostCommitment,
        MetricName::CostVariable,
        MetricName::EnsMwh,
        MetricName::SolveTimeDecisionAvg,
        MetricName::SolveTimeDecisionMax,
        MetricName::SolveTimeEdAvg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::FuelCostTotal => "fuel_cost_total",
            MetricName::CostCommitment => "cost_commitment",
            MetricName::CostVariable => "cost_variable",
            MetricName::EnsMwh => "ens_MWh",
            MetricName::SolveTimeDecisionAvg => "solve_time_decision_avg",
            MetricName::SolveTimeDecisionMax => "solve_time_decision_max",
            MetricName::SolveTimeEdAvg => "solve_time_ed_avg",
        }
    }

    pub fn parse(s: &str) -> Option<MetricName> {
        MetricName::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// Wall-clock metrics vary between runs and are kept out of the
    /// deterministic outputs.
    pub fn is_timing(self) -> bool {
        matches!(self, MetricName::SolveTimeDecisionAvg | MetricName::SolveTimeDecisionMax | MetricName::SolveTimeEdAvg)
    }

    pub fn unit(self) -> &'static str {
        match self {
            MetricName::EnsMwh => "MWh",
            m if m.is_timing() => "s",
            _ => "$",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub trial_index: u32,
    pub treatment: TreatmentKind,
    pub metric: MetricName,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub treatment: TreatmentKind,
    pub metric: MetricName,
    pub min: f64,
    pub p5: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub p95: f64,
    pub max: f64,
    pub mean: f64,
    pub n: usize,
}

fn solve_times(run: &CaseRun, decision: bool) -> (f64, f64, usize) {
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut n = 0;
    for r in &run.records {
        if (r.model != ModelKind::Ed) == decision {
            sum += r.wall_time_s;
            max = max.max(r.wall_time_s);
            n += 1;
        }
    }
    (if n == 0 { 0.0 } else { sum / n as f64 }, max, n)
}

/// The full metric set of one completed case. Commitment costs come from the
/// decision schedules over the hours each was applied; variable costs and
/// unserved energy come from the emulator.
pub fn compute_metrics(run: &CaseRun) -> Result<Vec<MetricRecord>, MetricsError> {
    if run.outcome != CaseOutcome::Completed {
        return Err(MetricsError::IncompleteRun(run.test_set.clone()));
    }
    let commitment: f64 = run.decisions.iter().map(|d| d.no_load_cost + d.startup_cost).sum();
    let variable: f64 = run.dispatches.iter().map(|d| d.costs.variable).sum();
    let ens: f64 = run.dispatches.iter().map(|d| d.ens_mwh()).sum();
    let (dec_avg, dec_max, _) = solve_times(run, true);
    let (ed_avg, _, _) = solve_times(run, false);
    let value = |m: MetricName| match m {
        MetricName::FuelCostTotal => commitment + variable,
        MetricName::CostCommitment => commitment,
        MetricName::CostVariable => variable,
        MetricName::EnsMwh => ens,
        MetricName::SolveTimeDecisionAvg => dec_avg,
        MetricName::SolveTimeDecisionMax => dec_max,
        MetricName::SolveTimeEdAvg => ed_avg,
    };
    Ok(MetricName::ALL
        .into_iter()
        .map(|metric| MetricRecord { trial_index: run.trial_index, treatment: run.treatment, metric, value: value(metric) })
        .collect())
}

/// Quantile `q` of sorted values by linear interpolation between order
/// statistics at position `q * (n - 1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(treatment: TreatmentKind, metric: MetricName, mut values: Vec<f64>) -> SummaryStats {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    SummaryStats {
        treatment,
        metric,
        min: values[0],
        p5: quantile(&values, 0.05),
        q1: quantile(&values, 0.25),
        median: quantile(&values, 0.5),
        q3: quantile(&values, 0.75),
        p95: quantile(&values, 0.95),
        max: values[n - 1],
        mean: values.iter().sum::<f64>() / n as f64,
        n,
    }
}

/// Summary statistics per (treatment, metric), ordered by treatment then
/// metric. `treatments` and `metrics` name the groups that must be present;
/// a group without records is an error. Values are sorted before any
/// arithmetic, so the result does not depend on record order.
pub fn aggregate(
    records: &[MetricRecord],
    treatments: &[TreatmentKind],
    metrics: &[MetricName],
) -> Result<Vec<SummaryStats>, MetricsError> {
    let mut groups: BTreeMap<(TreatmentKind, MetricName), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.treatment, r.metric)).or_default().push(r.value);
    }
    let mut out = Vec::with_capacity(treatments.len() * metrics.len());
    for &treatment in treatments {
        for &metric in metrics {
            let values = groups
                .remove(&(treatment, metric))
                .ok_or(MetricsError::EmptyGroup { treatment, metric })?;
            out.push(summarize(treatment, metric, values));
        }
    }
    Ok(out)
}
