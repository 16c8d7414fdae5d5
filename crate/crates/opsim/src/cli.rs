//! The `opsim` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime};

use clap::{Args, Parser, Subcommand};
use opsim_core::experiment::build_plan;
use opsim_core::{aggregate, compute_metrics, validate_system, CaseRun, ExperimentPlan, MetricRecord, SummaryStats, TrialData};

use crate::archive::{self, Archive, ArchiveError};
use crate::config::{LoadedConfig, Overrides};
use crate::inputs::{load_inputs, Inputs};
use crate::manifest::{self, CaseStatus, Environment, FileDigest, Manifest, MANIFEST_FILE};
use crate::report::write_report;
use crate::runner::run_plan;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  semantic failure: validation violations, reproduce-check mismatch, I/O failure while writing results
  2  usage error, malformed or missing input, existing archive
  3  partial run: at least one case aborted";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Semantic = 1,
    Usage = 2,
    Partial = 3,
}

#[derive(Debug, Parser)]
#[command(name = "opsim", version, about = "Power-system operations experiments: unit commitment under uncertainty", after_help = EXIT_CODES)]
pub struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a config, its system and profiles, and the experiment plan.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every test set and write archive, metrics, summary and manifest.
    Run(RunArgs),
    /// Recompute metrics and summaries from an existing archive.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Output root; results are read from `<out>/<experiment name>`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare two manifests, ignoring their environment sections.
    ReproduceCheck { manifest_a: PathBuf, manifest_b: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output root; results go to `<out>/<experiment name>`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub days: Option<u32>,
    /// Scenario count of every stochastic treatment.
    #[arg(long)]
    pub scenarios: Option<u32>,
    /// Cases run in parallel. Output does not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

struct Failure {
    exit: Exit,
    messages: Vec<String>,
}

impl Failure {
    fn new(exit: Exit, message: impl ToString) -> Failure {
        Failure { exit, messages: vec![message.to_string()] }
    }
}

impl From<ArchiveError> for Failure {
    fn from(e: ArchiveError) -> Failure {
        let exit = if matches!(e, ArchiveError::Exists(_)) { Exit::Usage } else { Exit::Semantic };
        Failure::new(exit, e)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Validate { config } => cmd_validate(config),
        Command::Run(args) => cmd_run(args, cli.verbose),
        Command::Report { config, out } => cmd_report(config, out),
        Command::ReproduceCheck { manifest_a, manifest_b } => cmd_reproduce_check(manifest_a, manifest_b),
    };
    match result {
        Ok(exit) => exit as i32,
        Err(f) => {
            for m in &f.messages {
                eprintln!("error: {m}");
            }
            f.exit as i32
        }
    }
}

struct Prepared {
    loaded: LoadedConfig,
    inputs: Inputs,
    plan: ExperimentPlan,
    data: TrialData,
    overrides: BTreeMap<String, String>,
}

fn prepare(config: &Path, overrides: &Overrides) -> Result<Prepared, Failure> {
    let mut loaded = LoadedConfig::read(config).map_err(|e| Failure::new(Exit::Usage, e))?;
    let applied = overrides.apply(&mut loaded.config);
    let inputs = load_inputs(&loaded).map_err(|e| Failure::new(Exit::Usage, e))?;
    let violations = validate_system(&inputs.system);
    if !violations.is_empty() {
        return Err(Failure { exit: Exit::Semantic, messages: violations.iter().map(|v| v.to_string()).collect() });
    }
    let c = &loaded.config;
    let params = inputs.parameters(&loaded).map_err(|e| Failure::new(Exit::Semantic, e))?;
    let plan = build_plan(params, c.n_trials, c.window_days, c.treatments()).map_err(|e| Failure::new(Exit::Semantic, e))?;
    let data = inputs.trial_data(c.emulator_resolution_s).map_err(|e| Failure::new(Exit::Usage, e))?;
    Ok(Prepared { loaded, inputs, plan, data, overrides: applied })
}

fn cmd_validate(config: &Path) -> Result<Exit, Failure> {
    let p = prepare(config, &Overrides::default())?;
    println!(
        "{}: ok ({} trials x {} treatments = {} test sets)",
        p.loaded.config.name,
        p.plan.trials.len(),
        p.plan.treatments.len(),
        p.plan.test_sets.len()
    );
    Ok(Exit::Ok)
}

/// Metrics of every completed run and their summaries over the treatments
/// that have at least one.
fn summarize(plan: &ExperimentPlan, runs: &[CaseRun]) -> Result<(Vec<MetricRecord>, Vec<SummaryStats>), Failure> {
    let mut records = Vec::new();
    for run in runs.iter().filter(|r| r.completed()) {
        records.extend(compute_metrics(run).map_err(|e| Failure::new(Exit::Semantic, e))?);
    }
    let metrics = &plan.parameters.metrics;
    records.retain(|r| metrics.contains(&r.metric));
    let kinds: Vec<_> = plan.treatments.iter().map(|t| t.kind).filter(|k| records.iter().any(|r| r.treatment == *k)).collect();
    let stats = aggregate(&records, &kinds, metrics).map_err(|e| Failure::new(Exit::Semantic, e))?;
    Ok((records, stats))
}

fn report_status(runs: &[CaseRun]) -> Exit {
    let aborted: Vec<&CaseRun> = runs.iter().filter(|r| !r.completed()).collect();
    if aborted.is_empty() {
        return Exit::Ok;
    }
    eprintln!("{} of {} cases aborted:", aborted.len(), runs.len());
    for r in runs {
        match &r.outcome {
            opsim_core::CaseOutcome::Completed => eprintln!("  {}: completed", r.test_set),
            opsim_core::CaseOutcome::Aborted { reason } => eprintln!("  {}: aborted: {reason}", r.test_set),
        }
    }
    Exit::Partial
}

fn cmd_run(args: &RunArgs, verbose: bool) -> Result<Exit, Failure> {
    let overrides = Overrides { master_seed: args.master_seed, trials: args.trials, days: args.days, scenarios: args.scenarios };
    let p = prepare(&args.config, &overrides)?;
    let cfg = &p.loaded.config;
    let dir = args.out.join(&cfg.name);
    let archive = Archive::create(&dir.join("archive"))?;
    archive.write_plan(&p.plan)?;

    let started = Instant::now();
    let started_utc = chrono::DateTime::<chrono::Utc>::from(SystemTime::now()).to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let write_errors = Mutex::new(Vec::new());
    let total = p.plan.test_sets.len();
    let done = Mutex::new(0usize);
    let runs = run_plan(&p.plan, &p.data, args.jobs.max(1), &|run: &CaseRun| {
        if let Err(e) = archive.write_case(run, &p.inputs.system) {
            write_errors.lock().expect("error list").push(e.to_string());
        }
        if verbose {
            let mut n = done.lock().expect("progress");
            *n += 1;
            let state = if run.completed() { "completed" } else { "aborted" };
            eprintln!("[{n}/{total}] {} {state} ({:.1} s elapsed)", run.test_set, started.elapsed().as_secs_f64());
        }
    });
    let write_errors = write_errors.into_inner().expect("error list");
    if !write_errors.is_empty() {
        return Err(Failure { exit: Exit::Semantic, messages: write_errors });
    }
    let digests = archive.seal();

    let (records, stats) = summarize(&p.plan, &runs)?;
    write_report(&records, &stats, &dir).map_err(|e| Failure::new(Exit::Semantic, e))?;

    let effective = serde_json::to_vec(cfg).expect("config serializes");
    let manifest = Manifest {
        experiment: cfg.name.clone(),
        experiment_config: p.loaded.text.clone(),
        config_file_digest: crate::digest::sha256_hex(p.loaded.text.as_bytes()),
        effective_config: cfg.clone(),
        config_digest: crate::digest::sha256_hex(&effective),
        overrides: p.overrides.clone(),
        master_seed: cfg.master_seed,
        system_file: FileDigest { path: slash(&cfg.system_file), sha256: p.inputs.system_digest.clone() },
        timeseries: p
            .inputs
            .profiles
            .iter()
            .map(|(name, prof)| {
                let path = slash(&cfg.timeseries_dir.join(format!("{name}.csv")));
                (name.clone(), FileDigest { path, sha256: prof.digest.clone() })
            })
            .collect(),
        solver_settings: cfg.solver.clone(),
        software: manifest::software_versions(),
        cases: runs
            .iter()
            .map(|r| CaseStatus {
                test_set: r.test_set.clone(),
                completed: r.completed(),
                abort_reason: match &r.outcome {
                    opsim_core::CaseOutcome::Aborted { reason } => Some(reason.clone()),
                    opsim_core::CaseOutcome::Completed => None,
                },
            })
            .collect(),
        archive_digests: digests.files,
        environment: Environment {
            note: "wall-clock data; ignored by reproduce-check".to_string(),
            started_utc,
            elapsed_s: started.elapsed().as_secs_f64(),
            jobs: args.jobs.max(1),
            timing_digests: digests.timing,
        },
    };
    manifest.write(&dir.join(MANIFEST_FILE)).map_err(|e| Failure::new(Exit::Semantic, e))?;
    if verbose {
        eprintln!("wrote {}", dir.display());
    }
    Ok(report_status(&runs))
}

fn slash(path: &Path) -> String {
    path.to_string_lossy().replace('\\', "/")
}

fn cmd_report(config: &Path, out: &Path) -> Result<Exit, Failure> {
    let loaded = LoadedConfig::read(config).map_err(|e| Failure::new(Exit::Usage, e))?;
    let dir = out.join(&loaded.config.name);
    let root = dir.join("archive");
    let plan = archive::load_plan(&root).map_err(|e| Failure::new(Exit::Usage, e))?;
    let runs = plan
        .test_sets
        .iter()
        .map(|ts| archive::load_case(&root, &ts.id))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::new(Exit::Usage, e))?;
    let (records, stats) = summarize(&plan, &runs)?;
    let files = write_report(&records, &stats, &dir).map_err(|e| Failure::new(Exit::Semantic, e))?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(report_status(&runs))
}

fn cmd_reproduce_check(a: &Path, b: &Path) -> Result<Exit, Failure> {
    let va = manifest::read_value(a).map_err(|e| Failure::new(Exit::Usage, e))?;
    let vb = manifest::read_value(b).map_err(|e| Failure::new(Exit::Usage, e))?;
    match manifest::compare(&va, &vb) {
        None => {
            println!("manifests agree");
            Ok(Exit::Ok)
        }
        Some(field) => {
            println!("manifests differ at {field}");
            Ok(Exit::Semantic)
        }
    }
}
