use std::time::Instant;

use opsim_core::solver::{BuiltinSolver, Clock};
use opsim_core::{run_case, CaseRun, ExperimentPlan, TrialData};
use rayon::prelude::*;

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> WallClock {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Runs every test set of the plan on up to `jobs` threads. Results come
/// back in plan order whatever order the cases finish in.
pub fn run_plan(plan: &ExperimentPlan, data: &TrialData, jobs: usize, on_done: &(dyn Fn(&CaseRun) + Sync)) -> Vec<CaseRun> {
    let one = |ts| {
        let run = run_case(plan, ts, data, &BuiltinSolver, &WallClock::start());
        on_done(&run);
        run
    };
    if jobs <= 1 {
        return plan.test_sets.iter().map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    pool.install(|| plan.test_sets.par_iter().map(one).collect())
}
