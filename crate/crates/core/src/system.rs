//! Static grid description: buses, lines and devices.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    /// Angle reference. Exactly one bus carries it.
    #[serde(default)]
    pub reference: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Per unit on the system base.
    pub susceptance: f64,
    /// MW.
    pub flow_limit: f64,
}

/// One segment of a convex piecewise-linear cost curve. The segment starts at
/// the previous breakpoint (or `p_min` for the first) and ends at `breakpoint`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSegment {
    /// MW.
    pub breakpoint: f64,
    /// $/MWh.
    pub marginal_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalGen {
    pub id: String,
    pub bus: String,
    pub p_min: f64,
    pub p_max: f64,
    /// MW per hour.
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// Hours.
    pub min_up: u32,
    pub min_down: u32,
    /// $ per start.
    pub startup_cost: f64,
    /// $ per hour online.
    pub no_load_cost: f64,
    pub cost_curve: Vec<CostSegment>,
    #[serde(default)]
    pub must_run: bool,
}

impl ThermalGen {
    /// `(width, marginal cost)` of each segment above `p_min`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mut prev = self.p_min;
        self.cost_curve.iter().map(move |s| {
            let w = s.breakpoint - prev;
            prev = s.breakpoint;
            (w, s.marginal_cost)
        })
    }

    /// Marginal cost of the first segment, which also prices the block of
    /// output from 0 to `p_min`.
    pub fn min_load_marginal_cost(&self) -> f64 {
        self.cost_curve.first().map_or(0.0, |s| s.marginal_cost)
    }

    /// Energy cost rate in $/h at output `p` (MW) while online, excluding the
    /// no-load cost. Output up to `p_min` is priced at the first segment's
    /// marginal cost.
    pub fn variable_cost_rate(&self, p: f64) -> f64 {
        let mut cost = self.min_load_marginal_cost() * self.p_min.min(p.max(0.0));
        let mut rest = (p - self.p_min).max(0.0);
        for (w, mc) in self.segments() {
            let take = rest.min(w);
            cost += take * mc;
            rest -= take;
            if rest <= 0.0 {
                break;
            }
        }
        cost
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewableGen {
    pub id: String,
    pub bus: String,
    /// MW.
    pub installed_capacity: f64,
    /// Name of the normalized availability profile.
    pub profile: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: String,
    pub bus: String,
    /// MW.
    pub peak: f64,
    /// Name of the normalized demand profile.
    pub profile: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub name: String,
    /// MVA.
    pub base_power: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub thermal_gens: Vec<ThermalGen>,
    pub renewable_gens: Vec<RenewableGen>,
    pub loads: Vec<Load>,
}

impl System {
    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn reference_bus(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.reference)
    }

    /// Total thermal capacity in MW.
    pub fn thermal_capacity(&self) -> f64 {
        self.thermal_gens.iter().map(|g| g.p_max).sum()
    }

    /// Bus index of every device reference, failing on the first dangling id.
    pub fn resolve_buses(&self) -> Result<BusIndex, String> {
        let lookup = |id: &str| self.bus_index(id).ok_or_else(|| id.to_string());
        Ok(BusIndex {
            line_from: self.lines.iter().map(|l| lookup(&l.from_bus)).collect::<Result<_, _>>()?,
            line_to: self.lines.iter().map(|l| lookup(&l.to_bus)).collect::<Result<_, _>>()?,
            thermal: self.thermal_gens.iter().map(|g| lookup(&g.bus)).collect::<Result<_, _>>()?,
            renewable: self.renewable_gens.iter().map(|g| lookup(&g.bus)).collect::<Result<_, _>>()?,
            load: self.loads.iter().map(|l| lookup(&l.bus)).collect::<Result<_, _>>()?,
        })
    }
}

/// Device-to-bus indices for a validated system.
#[derive(Clone, Debug, PartialEq)]
pub struct BusIndex {
    pub line_from: Vec<usize>,
    pub line_to: Vec<usize>,
    pub thermal: Vec<usize>,
    pub renewable: Vec<usize>,
    pub load: Vec<usize>,
}

/// A broken invariant, named by device and rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub device: String,
    pub rule: String,
    pub detail: String,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {} ({})", self.device, self.rule, self.detail)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn check(&mut self, ok: bool, device: &str, rule: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.0.push(Violation { device: device.to_string(), rule: rule.to_string(), detail: detail() });
        }
    }
}

fn finite_non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

/// Every violated invariant; empty iff the system is valid.
pub fn validate_system(sys: &System) -> Vec<Violation> {
    let mut r = Report(Vec::new());
    r.check(sys.base_power.is_finite() && sys.base_power > 0.0, &sys.name, "base_power>0", || {
        format!("base_power = {}", sys.base_power)
    });

    fn unique<'a>(r: &mut Report, kind: &str, ids: impl Iterator<Item = &'a String>) {
        let mut seen = BTreeSet::new();
        for id in ids {
            r.check(seen.insert(id.as_str()), id, "unique id", || format!("duplicate {kind} id"));
        }
    }
    unique(&mut r, "bus", sys.buses.iter().map(|b| &b.id));
    unique(&mut r, "line", sys.lines.iter().map(|l| &l.id));
    unique(
        &mut r,
        "generator",
        sys.thermal_gens.iter().map(|g| &g.id).chain(sys.renewable_gens.iter().map(|g| &g.id)),
    );
    unique(&mut r, "load", sys.loads.iter().map(|l| &l.id));

    let n_ref = sys.buses.iter().filter(|b| b.reference).count();
    r.check(n_ref == 1, &sys.name, "single reference bus", || format!("{n_ref} buses flagged reference"));

    let has_bus = |id: &str| sys.bus_index(id).is_some();
    for l in &sys.lines {
        r.check(l.from_bus != l.to_bus, &l.id, "from_bus≠to_bus", || format!("both ends at {}", l.from_bus));
        for end in [&l.from_bus, &l.to_bus] {
            r.check(has_bus(end), &l.id, "bus exists", || format!("unknown bus {end}"));
        }
        r.check(l.flow_limit.is_finite() && l.flow_limit > 0.0, &l.id, "flow_limit>0", || {
            format!("flow_limit = {}", l.flow_limit)
        });
        r.check(l.susceptance.is_finite() && l.susceptance != 0.0, &l.id, "susceptance≠0", || {
            format!("susceptance = {}", l.susceptance)
        });
    }

    for g in &sys.thermal_gens {
        r.check(has_bus(&g.bus), &g.id, "bus exists", || format!("unknown bus {}", g.bus));
        r.check(finite_non_negative(g.p_min), &g.id, "p_min≥0", || format!("p_min = {}", g.p_min));
        r.check(g.p_max.is_finite() && g.p_min <= g.p_max, &g.id, "p_min≤p_max", || {
            format!("p_min = {}, p_max = {}", g.p_min, g.p_max)
        });
        r.check(g.p_max > 0.0, &g.id, "p_max>0", || format!("p_max = {}", g.p_max));
        r.check(g.ramp_up.is_finite() && g.ramp_up > 0.0, &g.id, "ramp_up>0", || format!("ramp_up = {}", g.ramp_up));
        r.check(g.ramp_down.is_finite() && g.ramp_down > 0.0, &g.id, "ramp_down>0", || {
            format!("ramp_down = {}", g.ramp_down)
        });
        r.check(g.min_up >= 1, &g.id, "min_up≥1", || format!("min_up = {}", g.min_up));
        r.check(g.min_down >= 1, &g.id, "min_down≥1", || format!("min_down = {}", g.min_down));
        r.check(finite_non_negative(g.startup_cost), &g.id, "startup_cost≥0", || {
            format!("startup_cost = {}", g.startup_cost)
        });
        r.check(finite_non_negative(g.no_load_cost), &g.id, "no_load_cost≥0", || {
            format!("no_load_cost = {}", g.no_load_cost)
        });
        check_curve(&mut r, g);
    }

    for g in &sys.renewable_gens {
        r.check(has_bus(&g.bus), &g.id, "bus exists", || format!("unknown bus {}", g.bus));
        r.check(g.installed_capacity.is_finite() && g.installed_capacity > 0.0, &g.id, "installed_capacity>0", || {
            format!("installed_capacity = {}", g.installed_capacity)
        });
    }
    for l in &sys.loads {
        r.check(has_bus(&l.bus), &l.id, "bus exists", || format!("unknown bus {}", l.bus));
        r.check(l.peak.is_finite() && l.peak > 0.0, &l.id, "peak>0", || format!("peak = {}", l.peak));
    }

    if let Some(unreached) = unreachable_buses(sys) {
        for b in unreached {
            r.check(false, &b, "connected network", || "not reachable from the reference bus".to_string());
        }
    }
    r.0
}

fn check_curve(r: &mut Report, g: &ThermalGen) {
    r.check(!g.cost_curve.is_empty(), &g.id, "cost curve non-empty", || "no segments".to_string());
    let flat = g.p_min == g.p_max;
    let mut prev = g.p_min;
    for (k, s) in g.cost_curve.iter().enumerate() {
        let increasing = s.breakpoint > prev || (flat && k == 0 && s.breakpoint == prev);
        r.check(s.breakpoint.is_finite() && increasing, &g.id, "breakpoints increasing", || {
            format!("segment {k} ends at {} after {prev}", s.breakpoint)
        });
        r.check(finite_non_negative(s.marginal_cost), &g.id, "marginal_cost≥0", || {
            format!("segment {k} marginal cost {}", s.marginal_cost)
        });
        prev = s.breakpoint;
    }
    for (k, w) in g.cost_curve.windows(2).enumerate() {
        r.check(w[1].marginal_cost >= w[0].marginal_cost, &g.id, "convex cost", || {
            format!("segment {} is cheaper than segment {k}", k + 1)
        });
    }
    if let Some(last) = g.cost_curve.last() {
        r.check(last.breakpoint == g.p_max, &g.id, "curve ends at p_max", || {
            format!("last breakpoint {} vs p_max {}", last.breakpoint, g.p_max)
        });
    }
}

/// `None` when the network cannot be checked (no unique reference, dangling
/// ends); otherwise the buses not reachable from the reference.
fn unreachable_buses(sys: &System) -> Option<Vec<String>> {
    let root = sys.reference_bus()?;
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for l in &sys.lines {
        let (a, b) = (sys.bus_index(&l.from_bus)?, sys.bus_index(&l.to_bus)?);
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen = vec![false; sys.buses.len()];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(b) = queue.pop_front() {
        for &n in adj.get(&b).map(Vec::as_slice).unwrap_or(&[]) {
            if !seen[n] {
                seen[n] = true;
                queue.push_back(n);
            }
        }
    }
    Some(sys.buses.iter().zip(&seen).filter(|(_, s)| !**s).map(|(b, _)| b.id.clone()).collect())
}
