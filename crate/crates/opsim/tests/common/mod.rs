#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn shipped_config(name: &str) -> PathBuf {
    workspace().join("configs").join(format!("{name}.json"))
}

pub fn opsim<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_opsim")).args(args).output().expect("spawn opsim")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A scratch directory under the target dir, emptied first.
pub fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("clear scratch dir");
    }
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

pub fn copy_tree(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let path = entry.unwrap().path();
        let target = to.join(path.file_name().unwrap());
        if path.is_dir() {
            copy_tree(&path, &target);
        } else {
            fs::copy(&path, &target).unwrap();
        }
    }
}

/// Copies the five-bus data and one shipped config into `dir`, applying
/// `edit` to the config, and returns the new config path.
pub fn fixture(dir: &Path, config: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    copy_tree(&workspace().join("data/five_bus"), &dir.join("data/five_bus"));
    let mut value: Value = serde_json::from_slice(&fs::read(shipped_config(config)).unwrap()).unwrap();
    edit(&mut value);
    fs::create_dir_all(dir.join("configs")).unwrap();
    let path = dir.join("configs").join(format!("{config}.json"));
    fs::write(&path, serde_json::to_vec_pretty(&value).unwrap()).unwrap();
    path
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

/// Header and rows of a CSV file.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

pub fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

/// `(trial, treatment, metric) -> value` from a long-format metrics file.
pub fn metric_values(path: &Path) -> Vec<(u32, String, String, f64)> {
    let (h, rows) = read_csv(path);
    let (ti, tr, m, v) = (column(&h, "trial_index"), column(&h, "treatment"), column(&h, "metric"), column(&h, "value"));
    rows.iter().map(|r| (r[ti].parse().unwrap(), r[tr].clone(), r[m].clone(), r[v].parse().unwrap())).collect()
}

/// Test-set directories of an archive, sorted.
pub fn test_sets(archive: &Path) -> Vec<String> {
    let mut sets: Vec<String> = fs::read_dir(archive)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    sets.sort();
    sets
}
