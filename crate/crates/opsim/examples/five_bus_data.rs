//! Regenerates `data/five_bus`: the five-bus system file and 366 days of
//! hourly normalized load and wind profiles. Output is a pure function of the
//! seed below.
//!
//! ```text
//! cargo run -p opsim --example five_bus_data -- data/five_bus
//! ```

use std::f64::consts::TAU;
use std::fs;
use std::path::PathBuf;

use opsim_core::system::{Bus, CostSegment, Line, Load, RenewableGen, ThermalGen};
use opsim_core::{Prng, System};

const SEED: u64 = 0x5b05;
const HOURS: usize = 366 * 24;

#[allow(clippy::too_many_arguments)]
fn unit(
    id: &str,
    bus: &str,
    p_min: f64,
    p_max: f64,
    costs: [f64; 3],
    ramp: f64,
    min_time: u32,
    no_load: f64,
    startup: f64,
) -> ThermalGen {
    let width = (p_max - p_min) / 3.0;
    ThermalGen {
        id: id.into(),
        bus: bus.into(),
        p_min,
        p_max,
        ramp_up: ramp,
        ramp_down: ramp,
        min_up: min_time,
        min_down: min_time,
        startup_cost: startup,
        no_load_cost: no_load,
        cost_curve: (0..3)
            .map(|k| CostSegment {
                breakpoint: if k == 2 { p_max } else { p_min + width * (k + 1) as f64 },
                marginal_cost: costs[k],
            })
            .collect(),
        must_run: false,
    }
}

fn line(id: &str, from: &str, to: &str, reactance: f64, limit: f64) -> Line {
    Line { id: id.into(), from_bus: from.into(), to_bus: to.into(), susceptance: 1.0 / reactance, flow_limit: limit }
}

fn system() -> System {
    let bus = |id: &str, reference| Bus { id: id.into(), reference };
    let load = |id: &str, bus: &str| Load { id: id.into(), bus: bus.into(), peak: 4800.0, profile: id.into() };
    System {
        name: "five-bus".into(),
        base_power: 100.0,
        buses: vec![bus("A", true), bus("B", false), bus("C", false), bus("D", false), bus("E", false)],
        lines: vec![
            line("AB", "A", "B", 0.0281, 4000.0),
            line("AD", "A", "D", 0.0304, 6000.0),
            line("AE", "A", "E", 0.0064, 6000.0),
            line("BC", "B", "C", 0.0108, 6000.0),
            line("CD", "C", "D", 0.0297, 6000.0),
            line("DE", "D", "E", 0.0297, 2400.0),
        ],
        thermal_gens: vec![
            unit("alta", "A", 100.0, 400.0, [14.0, 15.0, 16.5], 400.0, 1, 200.0, 2_000.0),
            unit("park_city", "A", 400.0, 1700.0, [15.0, 16.0, 18.0], 800.0, 4, 600.0, 8_000.0),
            unit("solitude", "C", 1500.0, 5200.0, [30.0, 32.0, 35.0], 1500.0, 6, 3_000.0, 40_000.0),
            unit("sundance", "D", 300.0, 2000.0, [40.0, 44.0, 50.0], 2000.0, 1, 1_000.0, 5_000.0),
            unit("brighton", "E", 2400.0, 6000.0, [10.0, 11.0, 12.5], 1500.0, 8, 4_000.0, 80_000.0),
        ],
        renewable_gens: vec![RenewableGen {
            id: "wind".into(),
            bus: "B".into(),
            installed_capacity: 3600.0,
            profile: "wind".into(),
        }],
        loads: vec![load("load_b", "B"), load("load_c", "C"), load("load_d", "D")],
    }
}

/// Daily and seasonal shape with persistent weather noise, scaled so the
/// annual maximum is exactly 1.
fn load_profile(prng: &mut Prng, phase: f64) -> Vec<f64> {
    let mut weather = 0.0;
    let mut raw: Vec<f64> = (0..HOURS)
        .map(|h| {
            let day = h as f64 / 24.0;
            let hour = (h % 24) as f64;
            let seasonal = 0.82 + 0.12 * (TAU * (day - 200.0) / 365.0).cos() + 0.05 * (TAU * day / 182.5).cos();
            let daily = 0.78 + 0.14 * (TAU * (hour - 17.0 + phase) / 24.0).cos() + 0.06 * (TAU * (hour - 9.0) / 12.0).cos();
            weather = 0.985 * weather + 0.012 * prng.next_standard_normal();
            (seasonal * daily + weather).max(0.05)
        })
        .collect();
    let peak = raw.iter().cloned().fold(0.0, f64::max);
    raw.iter_mut().for_each(|v| *v /= peak);
    raw
}

/// Capacity factor from a persistent latent process pushed through a
/// logistic, with a weak diurnal cycle.
fn wind_profile(prng: &mut Prng) -> Vec<f64> {
    let mut latent = 0.0;
    (0..HOURS)
        .map(|h| {
            let hour = (h % 24) as f64;
            let day = h as f64 / 24.0;
            latent = 0.95 * latent + 0.32 * prng.next_standard_normal();
            let bias = -0.55 + 0.35 * (TAU * (day - 20.0) / 365.0).cos() + 0.25 * (TAU * (hour - 2.0) / 24.0).cos();
            1.0 / (1.0 + (-(latent + bias) * 1.6).exp())
        })
        .collect()
}

fn write_profile(dir: &std::path::Path, name: &str, values: &[f64]) -> std::io::Result<()> {
    let mut out = String::from("timestamp,value\n");
    for (h, v) in values.iter().enumerate() {
        let v = (v * 1e6).round() / 1e6;
        out.push_str(&format!("{},{}\n", h * 3600, v));
    }
    fs::write(dir.join(format!("{name}.csv")), out)
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/five_bus".into()));
    fs::create_dir_all(dir.join("profiles"))?;
    let sys = system();
    let json = serde_json::to_string_pretty(&sys).expect("system serializes");
    fs::write(dir.join("system.json"), json + "\n")?;
    let mut prng = Prng::new(SEED);
    for (k, l) in sys.loads.iter().enumerate() {
        write_profile(&dir.join("profiles"), &l.profile, &load_profile(&mut prng, k as f64 * 0.5))?;
    }
    write_profile(&dir.join("profiles"), "wind", &wind_profile(&mut prng))?;
    Ok(())
}
