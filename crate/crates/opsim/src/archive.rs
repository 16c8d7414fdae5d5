//! Write-once raw output of a run.
//!
//! ```text
//! archive/
//!   plan.json                 experiment plan, solver settings included
//!   <test-set>/case.json      the full case run, wall-clock times zeroed
//!   <test-set>/timing.json    wall-clock solve times, in record order
//!   <test-set>/dispatch.csv   emulator dispatch, one row per interval
//!   <test-set>/commitment.csv decision schedules, one row per unit-hour
//! ```
//!
//! Every file except `timing.json` is a pure function of the inputs and its
//! digest goes into the manifest; timing digests are kept apart.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use opsim_core::{CaseRun, ExperimentPlan, System};
use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::report::{csv_bytes, format_value};

pub const PLAN_FILE: &str = "plan.json";
pub const CASE_FILE: &str = "case.json";
pub const TIMING_FILE: &str = "timing.json";
pub const DISPATCH_FILE: &str = "dispatch.csv";
pub const COMMITMENT_FILE: &str = "commitment.csv";

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} already exists; archives are write-once")]
    Exists(PathBuf),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: wall-time count {found} does not match {expected} records")]
    TimingMismatch { path: PathBuf, expected: usize, found: usize },
}

/// Digests of a sealed archive, keyed by path relative to the archive root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveDigests {
    pub files: BTreeMap<String, String>,
    pub timing: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct Timing {
    test_set: String,
    wall_time_s: Vec<f64>,
}

/// Writes go through one lock, so cases finishing on different threads are
/// written one at a time.
pub struct Archive {
    root: PathBuf,
    digests: Mutex<ArchiveDigests>,
    writer: Mutex<()>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArchiveError + '_ {
    move |source| ArchiveError::Io { path: path.to_path_buf(), source }
}

impl Archive {
    /// Creates the archive directory, which must not exist yet.
    pub fn create(root: &Path) -> Result<Archive, ArchiveError> {
        if let Some(parent) = root.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::create_dir(root).map_err(|source| match source.kind() {
            std::io::ErrorKind::AlreadyExists => ArchiveError::Exists(root.to_path_buf()),
            _ => ArchiveError::Io { path: root.to_path_buf(), source },
        })?;
        Ok(Archive { root: root.to_path_buf(), digests: Mutex::new(ArchiveDigests::default()), writer: Mutex::new(()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write(&self, rel: &str, bytes: &[u8], timing: bool) -> Result<(), ArchiveError> {
        let path = self.root.join(rel);
        let mut file = OpenOptions::new().write(true).create_new(true).open(&path).map_err(|source| match source.kind() {
            std::io::ErrorKind::AlreadyExists => ArchiveError::Exists(path.clone()),
            _ => ArchiveError::Io { path: path.clone(), source },
        })?;
        file.write_all(bytes).map_err(io_err(&path))?;
        let mut d = self.digests.lock().expect("archive digests");
        let map = if timing { &mut d.timing } else { &mut d.files };
        map.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_plan(&self, plan: &ExperimentPlan) -> Result<(), ArchiveError> {
        self.write(PLAN_FILE, &json_bytes(plan, self.root.join(PLAN_FILE))?, false)
    }

    /// Writes every file of one case. Safe to call from several threads.
    pub fn write_case(&self, run: &CaseRun, sys: &System) -> Result<(), ArchiveError> {
        let _writer = self.writer.lock().expect("archive writer");
        let dir = self.root.join(&run.test_set);
        fs::create_dir(&dir).map_err(|source| match source.kind() {
            std::io::ErrorKind::AlreadyExists => ArchiveError::Exists(dir.clone()),
            _ => ArchiveError::Io { path: dir.clone(), source },
        })?;
        let rel = |file: &str| format!("{}/{file}", run.test_set);

        let timing = Timing { test_set: run.test_set.clone(), wall_time_s: run.records.iter().map(|r| r.wall_time_s).collect() };
        let mut stripped = run.clone();
        for r in &mut stripped.records {
            r.wall_time_s = 0.0;
        }
        self.write(&rel(CASE_FILE), &json_bytes(&stripped, dir.join(CASE_FILE))?, false)?;
        self.write(&rel(DISPATCH_FILE), &dispatch_csv(run, sys), false)?;
        self.write(&rel(COMMITMENT_FILE), &commitment_csv(run), false)?;
        self.write(&rel(TIMING_FILE), &json_bytes(&timing, dir.join(TIMING_FILE))?, true)
    }

    pub fn seal(self) -> ArchiveDigests {
        self.digests.into_inner().expect("archive digests")
    }
}

fn json_bytes<T: Serialize>(value: &T, path: PathBuf) -> Result<Vec<u8>, ArchiveError> {
    serde_json::to_vec_pretty(value).map_err(|source| ArchiveError::Json { path, source })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ArchiveError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|source| ArchiveError::Json { path: path.to_path_buf(), source })
}

pub fn load_plan(root: &Path) -> Result<ExperimentPlan, ArchiveError> {
    read_json(&root.join(PLAN_FILE))
}

/// Reads a case back, wall-clock times included.
pub fn load_case(root: &Path, test_set: &str) -> Result<CaseRun, ArchiveError> {
    let dir = root.join(test_set);
    let mut run: CaseRun = read_json(&dir.join(CASE_FILE))?;
    let timing_path = dir.join(TIMING_FILE);
    let timing: Timing = read_json(&timing_path)?;
    if timing.wall_time_s.len() != run.records.len() {
        return Err(ArchiveError::TimingMismatch {
            path: timing_path,
            expected: run.records.len(),
            found: timing.wall_time_s.len(),
        });
    }
    for (r, t) in run.records.iter_mut().zip(timing.wall_time_s) {
        r.wall_time_s = t;
    }
    Ok(run)
}

/// Digest of every file under `root`, split like [`ArchiveDigests`].
pub fn digest_tree(root: &Path) -> Result<ArchiveDigests, ArchiveError> {
    fn walk(root: &Path, dir: &Path, out: &mut ArchiveDigests) -> Result<(), ArchiveError> {
        let mut entries: Vec<PathBuf> =
            fs::read_dir(dir).map_err(io_err(dir))?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(io_err(dir))?;
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(root, &path, out)?;
                continue;
            }
            let rel = path.strip_prefix(root).expect("under root").to_string_lossy().replace('\\', "/");
            let digest = sha256_hex(&fs::read(&path).map_err(io_err(&path))?);
            let timing = path.file_name().is_some_and(|n| n == TIMING_FILE);
            if timing { &mut out.timing } else { &mut out.files }.insert(rel, digest);
        }
        Ok(())
    }
    let mut out = ArchiveDigests::default();
    walk(root, root, &mut out)?;
    Ok(out)
}

/// One row per emulator interval. `residual_mw` is generation plus wind plus
/// shed minus load minus surplus.
pub fn dispatch_csv(run: &CaseRun, sys: &System) -> Vec<u8> {
    let mut header = vec!["time_s".to_string()];
    header.extend(sys.thermal_gens.iter().map(|g| format!("gen:{}", g.id)));
    header.extend(sys.renewable_gens.iter().map(|r| format!("wind:{}", r.id)));
    header.extend(sys.renewable_gens.iter().map(|r| format!("wind_available:{}", r.id)));
    header.extend(sys.loads.iter().map(|l| format!("load:{}", l.id)));
    header.extend(sys.loads.iter().map(|l| format!("shed:{}", l.id)));
    header.extend(sys.buses.iter().map(|b| format!("surplus:{}", b.id)));
    let with_flows = run.dispatches.iter().any(|d| !d.flow_mw.is_empty());
    if with_flows {
        header.extend(sys.lines.iter().map(|l| format!("flow:{}", l.id)));
    }
    header.push("residual_mw".to_string());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = run.dispatches.iter().flat_map(|d| {
        (0..d.periods()).map(move |t| {
            let mut row = vec![(d.start + t as i64 * i64::from(d.step_s)).to_string()];
            let mut tables = vec![&d.thermal_mw, &d.wind_mw, &d.wind_available_mw, &d.load_mw, &d.shed_mw, &d.surplus_mw];
            if with_flows {
                tables.push(&d.flow_mw);
            }
            for table in tables {
                row.extend(table.iter().map(|r| format_value(r[t])));
            }
            let sum = |rows: &[Vec<f64>]| rows.iter().map(|r| r[t]).sum::<f64>();
            let residual = sum(&d.thermal_mw) + sum(&d.wind_mw) + sum(&d.shed_mw) - sum(&d.load_mw) - sum(&d.surplus_mw);
            row.push(format_value(residual));
            row
        })
    });
    csv_bytes(&header, rows)
}

/// One row per unit and hour of every decision schedule.
pub fn commitment_csv(run: &CaseRun) -> Vec<u8> {
    let bit = |b: bool| if b { "1" } else { "0" }.to_string();
    let rows = run.decisions.iter().flat_map(|dec| {
        let s = &dec.schedule;
        (0..s.horizon_h as usize).flat_map(move |t| {
            s.gens.iter().enumerate().map(move |(g, id)| {
                vec![
                    dec.start.to_string(),
                    t.to_string(),
                    (s.start + t as i64 * 3600).to_string(),
                    id.clone(),
                    bit(s.status[g][t]),
                    bit(s.startup[g][t]),
                    bit((t as u32) < dec.applied_h),
                    bit(s.from_incumbent),
                ]
            })
        })
    });
    csv_bytes(&["decision_start_s", "hour", "time_s", "gen", "on", "startup", "applied", "from_incumbent"], rows)
}
