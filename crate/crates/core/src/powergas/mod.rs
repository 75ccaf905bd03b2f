//! Coordinated hourly power and gas operation with hydrogen blending.
//!
//! A [`ComInstance`] joins a DC power network with unit commitment to a
//! gas network carrying hydrogen/methane blends. [`build_uc`] produces the
//! mixed-integer model; [`sequential_convex_solve`] iterates it with
//! Weymouth cones and McCormick envelopes until the gas physics settle.

mod gas;
mod scp;
mod uc;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

pub use gas::{
    blend_cap_for_year, check_security, check_security_with, envelope_interval, mccormick, mix_at_node, soc_relax,
    weymouth_residual, wobbe_index, ComponentConstants, EnvelopeCut, GasComposition, GasConstants, SecurityAxis,
    SecurityRegion, SecurityReport, Species, WeymouthCone, SPECIES,
};
pub use scp::{dispatch_days, sequential_convex_solve, ScpOptions};
pub use uc::{build_com, build_uc, GasLinearisation, UcIndex, UcModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenType {
    Coal,
    Peat,
    Oil,
    Gas,
    Waste,
    Hydro,
    OnshoreWind,
    Solar,
    OffshoreWind,
    Interconnector,
}

impl GenType {
    /// Output follows an hourly availability series.
    pub fn is_variable(self) -> bool {
        matches!(self, GenType::OnshoreWind | GenType::Solar | GenType::OffshoreWind)
    }

    pub fn is_wind(self) -> bool {
        matches!(self, GenType::OnshoreWind | GenType::OffshoreWind)
    }

    pub fn is_committable(self) -> bool {
        !self.is_variable() && self != GenType::Interconnector
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct CostSegment<T> {
    pub width_mw: T,
    /// €/MWh
    pub price: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ElectrolyserLink<T> {
    pub capacity_mw: T,
    pub efficiency: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Generator<T> {
    pub name: String,
    pub bus: usize,
    pub kind: GenType,
    #[serde(default = "zero")]
    pub pmin: T,
    pub pmax: T,
    /// MW/h; unlimited when absent.
    #[serde(default)]
    pub ramp: Option<T>,
    #[serde(default = "one_hour")]
    pub min_up: u32,
    #[serde(default = "one_hour")]
    pub min_down: u32,
    #[serde(default = "zero")]
    pub start_cost: T,
    /// €/h while committed, covering output up to `pmin`.
    #[serde(default = "zero")]
    pub no_load_cost: T,
    /// Incremental cost blocks above `pmin` (import price for interconnectors).
    #[serde(default)]
    pub segments: Vec<CostSegment<T>>,
    /// Stored kinetic energy when online, MW·s.
    #[serde(default = "zero")]
    pub inertia_mws: T,
    #[serde(default)]
    pub must_run: bool,
    pub synchronous: bool,
    #[serde(default)]
    pub initial_on: bool,
    /// Gas node supplying fuel, with MWh thermal per MWh electric.
    #[serde(default)]
    pub gas_node: Option<usize>,
    #[serde(default = "zero")]
    pub heat_rate: T,
    /// Interconnector export limit and price received.
    #[serde(default = "zero")]
    pub export_max: T,
    #[serde(default = "zero")]
    pub export_price: T,
    /// Co-located electrolyser on an offshore wind farm.
    #[serde(default)]
    pub electrolyser: Option<ElectrolyserLink<T>>,
}

fn one_hour() -> u32 {
    1
}

fn zero<T: Scalar>() -> T {
    T::zero()
}

fn one<T: Scalar>() -> T {
    T::one()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Summer,
    Winter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Line<T> {
    pub from: usize,
    pub to: usize,
    pub reactance_pu: T,
    pub rating_mw: T,
    #[serde(default = "one")]
    pub summer_factor: T,
    #[serde(default = "one")]
    pub winter_factor: T,
}

impl<T: Scalar> Line<T> {
    pub fn rating(&self, season: Season) -> T {
        self.rating_mw
            * match season {
                Season::Summer => self.summer_factor,
                Season::Winter => self.winter_factor,
            }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct PowerSystem<T> {
    #[serde(default = "default_base_mva")]
    pub base_mva: T,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line<T>>,
    pub generators: Vec<Generator<T>>,
}

fn default_base_mva<T: Scalar>() -> T {
    T::lit(100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Linepack<T> {
    /// Stored volume bounds, kcm.
    pub min: T,
    pub max: T,
    /// Methane held at the start; the day must end with at least as much.
    pub initial: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct GasNode<T> {
    pub name: String,
    /// Methane source capacity, kcm/h.
    #[serde(default = "zero")]
    pub supply_max: T,
    /// €/MWh thermal of methane bought at this node.
    #[serde(default = "zero")]
    pub supply_price: T,
    /// bar
    pub pressure_min: T,
    pub pressure_max: T,
    #[serde(default)]
    pub linepack: Option<Linepack<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Pipeline<T> {
    pub from: usize,
    pub to: usize,
    /// Weymouth constant, bar² per (kcm/h)².
    pub k: T,
    /// kcm/h in either direction.
    pub max_flow: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct InjectionPoint<T> {
    pub node: usize,
    /// MW of hydrogen (HHV).
    pub max_mw: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct GasSystem<T> {
    pub nodes: Vec<GasNode<T>>,
    #[serde(default)]
    pub pipelines: Vec<Pipeline<T>>,
    #[serde(default)]
    pub injections: Vec<InjectionPoint<T>>,
    pub region: SecurityRegion<T>,
}

impl<T: Scalar> GasSystem<T> {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        for n in &self.nodes {
            if !(n.pressure_min > T::zero() && n.pressure_min <= n.pressure_max) {
                return Err(Error::validation(format!(
                    "gas node {}: pressure bounds must be positive and ordered",
                    n.name
                )));
            }
            if !(n.supply_max >= T::zero()) {
                return Err(Error::validation(format!(
                    "gas node {}: supply_max must be >= 0",
                    n.name
                )));
            }
            if let Some(lp) = &n.linepack {
                if !(lp.min >= T::zero() && lp.min <= lp.initial && lp.initial <= lp.max) {
                    return Err(Error::validation(format!("gas node {}: linepack bounds", n.name)));
                }
            }
        }
        for (i, p) in self.pipelines.iter().enumerate() {
            if p.from >= self.nodes.len() || p.to >= self.nodes.len() || p.from == p.to {
                return Err(Error::validation(format!("pipeline {i}: bad endpoints")));
            }
            if !(p.k > T::zero()) || !(p.max_flow > T::zero()) {
                return Err(Error::validation(format!(
                    "pipeline {i}: K and max_flow must be positive"
                )));
            }
        }
        for inj in &self.injections {
            if inj.node >= self.nodes.len() || !(inj.max_mw >= T::zero()) {
                return Err(Error::validation("hydrogen injection point is invalid"));
            }
        }
        Ok(())
    }

    pub fn p_max(&self) -> T {
        self.nodes.iter().fold(T::zero(), |m, n| m.max(n.pressure_max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct OperationalPolicy<T> {
    /// Ceiling on the non-synchronous share of demand plus exports.
    pub snsp_cap: T,
    #[serde(default)]
    pub min_synchronous_units: u32,
    #[serde(default = "zero")]
    pub min_inertia_mws: T,
    /// Fixed spinning reserve floor, MW.
    #[serde(default = "zero")]
    pub reserve_mw: T,
    /// Reserve as a share of available wind.
    #[serde(default = "zero")]
    pub reserve_wind_fraction: T,
    /// Cover the loss of the largest online unit.
    #[serde(default)]
    pub reserve_largest_unit: bool,
    /// Offshore electrolysers may sell hydrogen abroad.
    #[serde(default)]
    pub export_enabled: bool,
    /// €/MWh of hydrogen exported.
    #[serde(default = "zero")]
    pub hydrogen_export_price: T,
    /// €/MWh charged on curtailed wind.
    #[serde(default = "default_curtailment_penalty")]
    pub curtailment_penalty: T,
}

fn default_curtailment_penalty<T: Scalar>() -> T {
    T::lit(0.1)
}

impl<T: Scalar> OperationalPolicy<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.snsp_cap > T::zero() && self.snsp_cap <= T::one()) {
            return Err(Error::validation("snsp_cap must lie in (0, 1]"));
        }
        for (name, v) in [
            ("min_inertia_mws", self.min_inertia_mws),
            ("reserve_mw", self.reserve_mw),
            ("reserve_wind_fraction", self.reserve_wind_fraction),
            ("curtailment_penalty", self.curtailment_penalty),
        ] {
            if !(v >= T::zero()) {
                return Err(Error::validation(format!("policy {name} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// One representative day: hourly demand, renewable availability and
/// gas demand, standing for `weight` days of the year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct DayProfile<T> {
    pub name: String,
    pub weight: T,
    pub season: Season,
    /// MW per bus per hour.
    pub demand: Vec<Vec<T>>,
    /// MW per variable generator per hour, keyed by generator name.
    #[serde(default)]
    pub availability: BTreeMap<String, Vec<T>>,
    /// MW thermal per gas node per hour.
    #[serde(default)]
    pub gas_demand: Vec<Vec<T>>,
}

impl<T: Scalar> DayProfile<T> {
    pub fn hours(&self) -> usize {
        self.demand.first().map_or(0, Vec::len)
    }
}

/// Joint power and gas system for one representative day.
#[derive(Debug, Clone, PartialEq)]
pub struct ComInstance<T> {
    pub power: PowerSystem<T>,
    pub gas: Option<GasSystem<T>>,
    pub policy: OperationalPolicy<T>,
    pub day: DayProfile<T>,
}

/// On-disk system description holding every representative day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SystemFile<T> {
    pub power: PowerSystem<T>,
    #[serde(default)]
    pub gas: Option<GasSystem<T>>,
    pub policy: OperationalPolicy<T>,
    pub days: Vec<DayProfile<T>>,
}

impl<T: Scalar + for<'de> Deserialize<'de>> SystemFile<T> {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

impl<T: Scalar> SystemFile<T> {
    pub fn instances(&self) -> Vec<ComInstance<T>> {
        self.days
            .iter()
            .map(|d| ComInstance {
                power: self.power.clone(),
                gas: self.gas.clone(),
                policy: self.policy.clone(),
                day: d.clone(),
            })
            .collect()
    }
}

impl<T: Scalar> ComInstance<T> {
    pub fn hours(&self) -> usize {
        self.day.hours()
    }

    /// Renewable availability of generator `g` at hour `t`.
    pub fn availability(&self, g: usize, t: usize) -> T {
        let gen = &self.power.generators[g];
        if gen.kind.is_variable() {
            self.day.availability.get(&gen.name).map_or(T::zero(), |s| s[t])
        } else {
            gen.pmax
        }
    }

    pub fn bus_demand(&self, t: usize) -> T {
        self.day.demand.iter().map(|d| d[t]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let ps = &self.power;
        let nb = ps.buses.len();
        let hours = self.hours();
        if nb == 0 {
            return Err(Error::Build("power system has no buses".into()));
        }
        if !(ps.base_mva > T::zero()) {
            return Err(Error::validation("base_mva must be positive"));
        }
        self.policy.validate()?;
        if self.day.demand.len() != nb || self.day.demand.iter().any(|d| d.len() != hours) {
            return Err(Error::validation(format!(
                "day {}: demand must have one series per bus of equal length",
                self.day.name
            )));
        }
        if self.day.demand.iter().flatten().any(|&d| !(d >= T::zero())) {
            return Err(Error::validation(format!("day {}: demand must be >= 0", self.day.name)));
        }
        if !(self.day.weight >= T::zero()) {
            return Err(Error::validation("day weight must be >= 0"));
        }
        for (i, l) in ps.lines.iter().enumerate() {
            if l.from >= nb || l.to >= nb || l.from == l.to {
                return Err(Error::Build(format!("line {i}: bad endpoints")));
            }
            if !(l.reactance_pu > T::zero()) || !(l.rating_mw > T::zero()) {
                return Err(Error::validation(format!(
                    "line {i}: reactance and rating must be positive"
                )));
            }
        }
        for g in &ps.generators {
            if g.bus >= nb {
                return Err(Error::Build(format!("generator {}: unknown bus {}", g.name, g.bus)));
            }
            if !(g.pmin >= T::zero() && g.pmin <= g.pmax) {
                return Err(Error::validation(format!(
                    "generator {}: need 0 <= pmin <= pmax",
                    g.name
                )));
            }
            if g.min_up < 1 || g.min_down < 1 {
                return Err(Error::validation(format!(
                    "generator {}: min up/down must be >= 1 h",
                    g.name
                )));
            }
            if g.kind.is_committable() {
                let width: T = g.segments.iter().map(|s| s.width_mw).sum();
                if (width - (g.pmax - g.pmin)).abs() > T::lit(1e-6) * (T::one() + g.pmax) {
                    return Err(Error::validation(format!(
                        "generator {}: cost segments must span pmax - pmin",
                        g.name
                    )));
                }
            }
            if g.segments.windows(2).any(|w| w[1].price < w[0].price) {
                return Err(Error::validation(format!(
                    "generator {}: cost curve must be convex",
                    g.name
                )));
            }
            if g.kind.is_variable() {
                let series = self.day.availability.get(&g.name).ok_or_else(|| {
                    Error::validation(format!("day {}: no availability for {}", self.day.name, g.name))
                })?;
                if series.len() != hours || series.iter().any(|&a| !(a >= T::zero())) {
                    return Err(Error::validation(format!("availability of {} is malformed", g.name)));
                }
            }
            if let Some(e) = &g.electrolyser {
                if g.kind != GenType::OffshoreWind {
                    return Err(Error::validation(format!(
                        "generator {}: electrolysers sit on offshore wind",
                        g.name
                    )));
                }
                if !(e.capacity_mw >= T::zero() && e.efficiency > T::zero() && e.efficiency <= T::one()) {
                    return Err(Error::validation(format!("generator {}: electrolyser data", g.name)));
                }
            }
        }
        match &self.gas {
            Some(gs) => {
                gs.validate()?;
                if self.day.gas_demand.len() != gs.nodes.len()
                    || self
                        .day
                        .gas_demand
                        .iter()
                        .any(|d| d.len() != hours || d.iter().any(|&v| !(v >= T::zero())))
                {
                    return Err(Error::validation(format!(
                        "day {}: gas demand must have one non-negative series per gas node",
                        self.day.name
                    )));
                }
                for g in &ps.generators {
                    if matches!(g.gas_node, Some(n) if n >= gs.nodes.len()) {
                        return Err(Error::Build(format!("generator {}: unknown gas node", g.name)));
                    }
                }
            }
            None => {
                if ps.generators.iter().any(|g| g.gas_node.is_some()) {
                    return Err(Error::Build("gas-fired unit refers to a missing gas network".into()));
                }
            }
        }
        self.check_connectivity()
    }

    fn check_connectivity(&self) -> Result<()> {
        let nb = self.power.buses.len();
        let mut parent: Vec<usize> = (0..nb).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for l in &self.power.lines {
            let (a, b) = (find(&mut parent, l.from), find(&mut parent, l.to));
            parent[a] = b;
        }
        let mut supplied = vec![false; nb];
        for g in &self.power.generators {
            if g.pmax > T::zero() {
                let r = find(&mut parent, g.bus);
                supplied[r] = true;
            }
        }
        for b in 0..nb {
            let r = find(&mut parent, b);
            if !supplied[r] && self.day.demand[b].iter().any(|&d| d > T::zero()) {
                return Err(Error::Build(format!(
                    "bus {} has demand but is disconnected from every generator",
                    self.power.buses[b].name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchStatus {
    Converged,
    IterationLimit,
    Infeasible,
}

/// Hourly operating state of one representative day.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DispatchResult<T> {
    pub day: String,
    pub status: Option<DispatchStatus>,
    /// Hours of the year each modelled hour stands for.
    pub hour_weight: T,
    pub hours: usize,
    /// `[g][t]`
    pub commitment: Vec<Vec<bool>>,
    pub generation: Vec<Vec<T>>,
    /// Interconnector exports, `[g][t]`.
    pub exports: Vec<Vec<T>>,
    pub line_flow: Vec<Vec<T>>,
    pub angle: Vec<Vec<T>>,
    pub demand: Vec<T>,
    pub nonsync_generation: Vec<T>,
    pub wind_available: Vec<T>,
    /// Wind taken by the grid and by electrolysers.
    pub wind_used: Vec<T>,
    /// Electrolyser input feeding gas-grid injection, MW.
    pub electrolyser_inject: Vec<T>,
    /// Electrolyser input feeding hydrogen exports, MW.
    pub electrolyser_export: Vec<T>,
    /// Signed total flow per pipeline `[p][t]`, kcm/h, positive from→to.
    pub gas_flow: Vec<Vec<T>>,
    /// Signed hydrogen component of `gas_flow`.
    pub gas_flow_h2: Vec<Vec<T>>,
    pub pressure: Vec<Vec<T>>,
    /// Hydrogen volume fraction of gas leaving each node, `[n][t]`.
    pub blend: Vec<Vec<T>>,
    /// Hydrogen and methane entering each node, `[n][t]`.
    pub node_inflow: Vec<Vec<(T, T)>>,
    pub cost: T,
    pub iterations: usize,
    /// Largest normalised Weymouth residual.
    pub max_residual: T,
    pub max_blend_residual: T,
}

/// Quantities entering the non-synchronous penetration ratio for an hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourDispatch<T> {
    pub nonsync_generation: T,
    pub imports: T,
    pub demand: T,
    pub exports: T,
}

impl<T: Scalar> DispatchResult<T> {
    pub fn is_converged(&self) -> bool {
        self.status == Some(DispatchStatus::Converged)
    }

    /// Non-synchronous generation here already includes imports.
    pub fn hour(&self, t: usize) -> HourDispatch<T> {
        HourDispatch {
            nonsync_generation: self.nonsync_generation[t],
            imports: T::zero(),
            demand: self.demand[t],
            exports: self.exports.iter().map(|e| e[t]).sum(),
        }
    }
}

pub fn snsp<T: Scalar>(hour: &HourDispatch<T>) -> Result<T> {
    let denom = hour.demand + hour.exports;
    if !(denom > T::zero()) {
        return Err(Error::validation("SNSP undefined with zero demand and exports"));
    }
    Ok((hour.nonsync_generation + hour.imports) / denom)
}

/// Share of available wind energy left unused.
pub fn curtailment_rate<T: Scalar>(result: &DispatchResult<T>) -> T {
    annual_curtailment_rate(std::slice::from_ref(result))
}

/// Curtailment over several weighted representative days.
pub fn annual_curtailment_rate<T: Scalar>(results: &[DispatchResult<T>]) -> T {
    let mut avail = T::zero();
    let mut used = T::zero();
    for r in results {
        avail += r.hour_weight * r.wind_available.iter().copied().sum::<T>();
        used += r.hour_weight * r.wind_used.iter().copied().sum::<T>();
    }
    if !(avail > T::zero()) {
        return T::zero();
    }
    (T::one() - used / avail).max(T::zero()).min(T::one())
}

/// Exportable hydrogen, MWh/year, from electrolyser input set aside for
/// export on each weighted day.
pub fn export_potential<T: Scalar>(results: &[DispatchResult<T>], efficiency: T) -> T {
    results
        .iter()
        .map(|r| r.hour_weight * r.electrolyser_export.iter().copied().sum::<T>() * efficiency)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaySummary {
    pub day: String,
    pub status: Option<DispatchStatus>,
    pub iterations: usize,
    pub cost: f64,
    pub curtailment_rate: f64,
    pub max_weymouth_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSummary {
    /// Weighted annual operating cost, €.
    pub annual_cost: f64,
    pub curtailment_rate: f64,
    pub export_potential_mwh: f64,
    pub all_converged: bool,
    pub days: Vec<DaySummary>,
}

pub fn summarise<T: Scalar>(results: &[DispatchResult<T>], efficiency: T) -> DispatchSummary {
    let days: Vec<DaySummary> = results
        .iter()
        .map(|r| DaySummary {
            day: r.day.clone(),
            status: r.status,
            iterations: r.iterations,
            cost: r.cost.as_f64(),
            curtailment_rate: curtailment_rate(r).as_f64(),
            max_weymouth_residual: r.max_residual.as_f64(),
        })
        .collect();
    DispatchSummary {
        annual_cost: results.iter().map(|r| (r.cost * r.hour_weight).as_f64()).sum(),
        curtailment_rate: annual_curtailment_rate(results).as_f64(),
        export_potential_mwh: export_potential(results, efficiency).as_f64(),
        all_converged: results.iter().all(DispatchResult::is_converged),
        days,
    }
}

/// Long-format hourly table `day,hour,series,name,value`.
pub fn write_dispatch_csv<T: Scalar, W: Write>(
    out: W,
    system: &SystemFile<T>,
    results: &[DispatchResult<T>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::validation(format!("writing dispatch table: {e}"));
    w.write_record(["day", "hour", "series", "name", "value"])
        .map_err(err)?;
    for r in results {
        // days without a solution carry no series
        if r.wind_available.len() < r.hours {
            continue;
        }
        for t in 0..r.hours {
            let mut row = |series: &str, name: &str, v: String| {
                w.write_record([r.day.as_str(), &t.to_string(), series, name, &v])
            };
            for (g, gen) in system.power.generators.iter().enumerate() {
                row("generation", &gen.name, r.generation[g][t].to_string()).map_err(err)?;
                row("commitment", &gen.name, u8::from(r.commitment[g][t]).to_string()).map_err(err)?;
            }
            for (l, flow) in r.line_flow.iter().enumerate() {
                row("line_flow", &l.to_string(), flow[t].to_string()).map_err(err)?;
            }
            row("wind_available", "total", r.wind_available[t].to_string()).map_err(err)?;
            row("wind_used", "total", r.wind_used[t].to_string()).map_err(err)?;
            row("electrolyser_inject", "total", r.electrolyser_inject[t].to_string()).map_err(err)?;
            row("electrolyser_export", "total", r.electrolyser_export[t].to_string()).map_err(err)?;
            if let Some(gs) = &system.gas {
                for (p, flow) in r.gas_flow.iter().enumerate() {
                    row("gas_flow", &p.to_string(), flow[t].to_string()).map_err(err)?;
                }
                for (n, node) in gs.nodes.iter().enumerate() {
                    row("pressure", &node.name, r.pressure[n][t].to_string()).map_err(err)?;
                    row("blend", &node.name, r.blend[n][t].to_string()).map_err(err)?;
                }
            }
        }
    }
    w.flush()
        .map_err(|e| Error::validation(format!("writing dispatch table: {e}")))?;
    Ok(())
}
