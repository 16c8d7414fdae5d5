//! Plot-ready CSV output of metrics and their summaries.
//!
//! Files under the experiment directory:
//!
//! - `metrics.csv`: one row per trial, treatment and metric (long format)
//! - `summary.csv`: one row per treatment and metric
//! - `timing_metrics.csv`, `timing_summary.csv`: the same for the wall-clock
//!   metrics, kept apart so the files above are byte-identical across reruns
//! - `by_metric/<metric>.csv`: summary rows of one metric, one per treatment
//!
//! Numbers use the shortest decimal that reads back to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use opsim_core::{MetricRecord, SummaryStats};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TIMING_METRICS_FILE: &str = "timing_metrics.csv";
pub const TIMING_SUMMARY_FILE: &str = "timing_summary.csv";
pub const BY_METRIC_DIR: &str = "by_metric";

const SUMMARY_HEADER: [&str; 12] = ["treatment", "metric", "unit", "n", "min", "p5", "q1", "median", "q3", "p95", "max", "mean"];
const METRICS_HEADER: [&str; 5] = ["trial_index", "treatment", "metric", "unit", "value"];

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct ReportError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

/// Shortest round-trip decimal, with `-0` written as `0`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// RFC 4180 CSV with LF line endings.
pub fn csv_bytes<R: AsRef<[u8]>>(header: &[&str], rows: impl IntoIterator<Item = Vec<R>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(&row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

pub fn metrics_csv(records: &[MetricRecord]) -> Vec<u8> {
    csv_bytes(
        &METRICS_HEADER,
        records.iter().map(|r| {
            vec![
                r.trial_index.to_string(),
                r.treatment.tag().to_string(),
                r.metric.as_str().to_string(),
                r.metric.unit().to_string(),
                format_value(r.value),
            ]
        }),
    )
}

pub fn summary_csv(stats: &[SummaryStats]) -> Vec<u8> {
    csv_bytes(
        &SUMMARY_HEADER,
        stats.iter().map(|s| {
            let mut row = vec![s.treatment.tag().to_string(), s.metric.as_str().to_string(), s.metric.unit().to_string(), s.n.to_string()];
            row.extend([s.min, s.p5, s.q1, s.median, s.q3, s.p95, s.max, s.mean].map(format_value));
            row
        }),
    )
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, ReportError> {
    fs::write(&path, bytes).map_err(|source| ReportError { path: path.clone(), source })?;
    Ok(path)
}

/// Writes every report file into `dir`, replacing earlier ones, and returns
/// their paths.
pub fn write_report(records: &[MetricRecord], stats: &[SummaryStats], dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let by_metric = dir.join(BY_METRIC_DIR);
    fs::create_dir_all(&by_metric).map_err(|source| ReportError { path: by_metric.clone(), source })?;
    let (timing_records, records): (Vec<MetricRecord>, Vec<MetricRecord>) =
        records.iter().cloned().partition(|r| r.metric.is_timing());
    let (timing_stats, plain_stats): (Vec<SummaryStats>, Vec<SummaryStats>) =
        stats.iter().cloned().partition(|s| s.metric.is_timing());
    let mut written = vec![
        write(dir.join(METRICS_FILE), &metrics_csv(&records))?,
        write(dir.join(SUMMARY_FILE), &summary_csv(&plain_stats))?,
        write(dir.join(TIMING_METRICS_FILE), &metrics_csv(&timing_records))?,
        write(dir.join(TIMING_SUMMARY_FILE), &summary_csv(&timing_stats))?,
    ];
    let mut metrics: Vec<_> = stats.iter().map(|s| s.metric).collect();
    metrics.sort();
    metrics.dedup();
    for metric in metrics {
        let rows: Vec<SummaryStats> = stats.iter().filter(|s| s.metric == metric).cloned().collect();
        written.push(write(by_metric.join(format!("{}.csv", metric.as_str())), &summary_csv(&rows))?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use opsim_core::{MetricName, TreatmentKind};

    #[test]
    fn values_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345678.9, -2.5, f64::MAX] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(3.0), "3");
    }

    #[test]
    fn fields_are_quoted_when_needed() {
        let bytes = csv_bytes(&["a", "b"], [vec!["x,y".to_string(), "z".to_string()]]);
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n\"x,y\",z\n");
    }

    #[test]
    fn metrics_rows() {
        let r = MetricRecord { trial_index: 2, treatment: TreatmentKind::StochasticUc, metric: MetricName::EnsMwh, value: 1.0 };
        let text = String::from_utf8(metrics_csv(&[r])).unwrap();
        assert_eq!(text, "trial_index,treatment,metric,unit,value\n2,suc,ens_MWh,MWh,1\n");
    }
}
