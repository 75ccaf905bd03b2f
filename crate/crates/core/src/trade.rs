//! International hydrogen trade over national supply curves.
//!
//! Quantities are TWh/year and prices €/MWh, so `TWh × €/MWh` is M€. The
//! MILP objective is kept in M€ for conditioning; reported plan costs are €.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcoh::{CurveBasis, Scenario, SupplyCurve};
use crate::num::Scalar;
use crate::solver::{branch_and_bound, LinearProgram, MilpProblem, ObjectiveSense, RowSense, Status};

/// Name of the international import backstop in flows and plots.
pub const BACKSTOP: &str = "ITN";

const MEGA: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct CountrySupply<T> {
    pub country: String,
    pub year: u16,
    /// Cumulative TWh/year against €/MWh.
    pub curve: SupplyCurve<T>,
    pub export_cap: T,
    /// Served first from the national curve, before any export.
    pub domestic_demand_priority: T,
}

impl<T: Scalar> CountrySupply<T> {
    pub fn validate(&self) -> Result<()> {
        self.curve.validate()?;
        if self.curve.basis != CurveBasis::EnergyTwh {
            return Err(Error::validation(format!(
                "supply curve for {} must be in TWh",
                self.country
            )));
        }
        if !(self.export_cap >= T::zero()) || !(self.domestic_demand_priority >= T::zero()) {
            return Err(Error::validation(format!(
                "export cap and domestic demand for {} must be non-negative",
                self.country
            )));
        }
        if self.domestic_demand_priority > self.curve.total() {
            return Err(Error::validation(format!(
                "domestic demand of {} exceeds its supply curve",
                self.country
            )));
        }
        Ok(())
    }
}

fn default_true() -> bool {
    true
}

fn zero<T: Scalar>() -> T {
    T::zero()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Route<T> {
    pub from: String,
    pub to: String,
    /// Port to port, km.
    pub distance_km: T,
    /// TWh/year one ship can carry on this route.
    pub ship_capacity_twh: T,
    pub ship_annualised_cost: T,
    /// €/TWh/km.
    pub fuel_cost: T,
    /// `false` models a pipeline: no ships, cost per TWh only.
    #[serde(default = "default_true")]
    pub shipped: bool,
    #[serde(default = "zero")]
    pub tariff_per_twh: T,
}

impl<T: Scalar> Route<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::validation(format!("route {} -> {}: {what}", self.from, self.to)));
        if !(self.distance_km > T::zero()) {
            return bad("distance must be positive");
        }
        if self.shipped && !(self.ship_capacity_twh > T::zero() && self.ship_annualised_cost > T::zero()) {
            return bad("ship capacity and cost must be positive");
        }
        if !(self.fuel_cost >= T::zero()) || !(self.tariff_per_twh >= T::zero()) {
            return bad("costs must be non-negative");
        }
        Ok(())
    }

    /// € per TWh moved, excluding ship investment.
    fn unit_cost(&self) -> T {
        self.distance_km * self.fuel_cost + self.tariff_per_twh
    }
}

/// Annual cost of moving `quantity` TWh and the ships it takes.
pub fn shipping_cost<T: Scalar>(route: &Route<T>, quantity: T) -> (T, u32) {
    if !(quantity > T::zero()) {
        return (T::zero(), 0);
    }
    let ships = if route.shipped {
        (quantity / route.ship_capacity_twh).ceil().to_u32().unwrap_or(u32::MAX)
    } else {
        0
    };
    let fleet = T::from_u32(ships).unwrap_or_else(T::infinity) * route.ship_annualised_cost;
    (fleet + quantity * route.unit_cost(), ships)
}

/// Variables of one SOS2 cost encoding.
#[derive(Debug, Clone)]
pub struct PiecewiseVars {
    /// Quantity, TWh.
    pub quantity: usize,
    /// Cost in objective units.
    pub cost: usize,
    pub weights: Vec<usize>,
    pub segments: Vec<usize>,
}

/// Encodes `cost(q)` of a step supply curve with breakpoint weights whose
/// support is limited to two neighbours by segment binaries.
///
/// Cost is exact on breakpoints and linear in between, which for a step
/// curve is the exact integral everywhere. The cost variable carries
/// `scale` per unit in the objective.
pub fn piecewise_cost<T: Scalar>(
    milp: &mut MilpProblem<T>,
    curve: &SupplyCurve<T>,
    name: &str,
    scale: T,
) -> Result<PiecewiseVars> {
    curve.validate()?;
    let mut points = vec![(T::zero(), T::zero())];
    for &(q, _) in &curve.breakpoints {
        points.push((q, curve.cost(q)));
    }
    let total = curve.total();
    let top = points.last().map_or(T::zero(), |p| p.1);
    let quantity = milp.add_var(format!("{name}_q"), T::zero(), total, T::zero(), false);
    let cost = milp.add_var(format!("{name}_cost"), T::zero(), top, scale, false);
    let weights: Vec<usize> = (0..points.len())
        .map(|i| milp.add_var(format!("{name}_w{i}"), T::zero(), T::one(), T::zero(), false))
        .collect();
    let segments: Vec<usize> = (1..points.len())
        .map(|s| milp.add_var(format!("{name}_z{s}"), T::zero(), T::one(), T::zero(), true))
        .collect();

    milp.add_row(
        format!("{name}_convexity"),
        weights.iter().map(|&w| (w, T::one())).collect(),
        RowSense::Eq,
        T::one(),
    );
    let mut q_row = vec![(quantity, T::one())];
    let mut c_row = vec![(cost, T::one())];
    for (i, &w) in weights.iter().enumerate() {
        q_row.push((w, -points[i].0));
        c_row.push((w, -points[i].1));
    }
    milp.add_row(format!("{name}_quantity"), q_row, RowSense::Eq, T::zero());
    milp.add_row(format!("{name}_cost"), c_row, RowSense::Eq, T::zero());
    if !segments.is_empty() {
        milp.add_row(
            format!("{name}_one_segment"),
            segments.iter().map(|&z| (z, T::one())).collect(),
            RowSense::Eq,
            T::one(),
        );
        for (i, &w) in weights.iter().enumerate() {
            let mut row = vec![(w, T::one())];
            if i > 0 {
                row.push((segments[i - 1], -T::one()));
            }
            if i < segments.len() {
                row.push((segments[i], -T::one()));
            }
            milp.add_row(format!("{name}_adjacent{i}"), row, RowSense::Le, T::zero());
        }
    }
    Ok(PiecewiseVars {
        quantity,
        cost,
        weights,
        segments,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeProblem<T> {
    pub year: u16,
    pub supplies: Vec<CountrySupply<T>>,
    /// Import demand per country, TWh/year.
    pub demands: BTreeMap<String, T>,
    pub routes: Vec<Route<T>>,
    /// €/MWh; `None` disables the backstop.
    pub backstop_price: Option<T>,
}

impl<T: Scalar> TradeProblem<T> {
    pub fn validate(&self) -> Result<()> {
        let mut exporters = BTreeSet::new();
        for s in &self.supplies {
            s.validate()?;
            if !exporters.insert(s.country.as_str()) {
                return Err(Error::validation(format!("duplicate supply for {}", s.country)));
            }
        }
        for (c, &d) in &self.demands {
            if !(d >= T::zero()) {
                return Err(Error::validation(format!("negative demand for {c}")));
            }
        }
        for r in &self.routes {
            r.validate()?;
            if !exporters.contains(r.from.as_str()) {
                return Err(Error::validation(format!("route from unknown exporter {}", r.from)));
            }
            if !self.demands.contains_key(&r.to) {
                return Err(Error::validation(format!("route to country without demand {}", r.to)));
            }
        }
        if let Some(p) = self.backstop_price {
            if !(p >= T::zero()) || !p.is_finite() {
                return Err(Error::validation("backstop price must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TradeIndex {
    pub production: Vec<PiecewiseVars>,
    pub flows: Vec<usize>,
    pub ships: Vec<Option<usize>>,
    /// Backstop import variable per entry of `demands`.
    pub backstop: Vec<Option<usize>>,
}

pub struct TradeModel<T> {
    pub milp: MilpProblem<T>,
    pub index: TradeIndex,
    pub problem: TradeProblem<T>,
}

/// Builds the cost-minimising trade MILP: production through each national
/// supply curve, route flows coupled to integer ship counts, and demand
/// met by imports plus the backstop.
pub fn build_trade_milp<T: Scalar>(problem: &TradeProblem<T>) -> Result<TradeModel<T>> {
    problem.validate()?;
    let mega = T::lit(MEGA);
    let mut milp = MilpProblem::new(LinearProgram::new(ObjectiveSense::Minimize));

    let mut production = Vec::with_capacity(problem.supplies.len());
    for s in &problem.supplies {
        let pw = piecewise_cost(&mut milp, &s.curve, &format!("prod_{}", s.country), T::one())?;
        production.push(pw);
    }

    let mut flows = Vec::with_capacity(problem.routes.len());
    let mut ships = Vec::with_capacity(problem.routes.len());
    for r in &problem.routes {
        let exporter = problem
            .supplies
            .iter()
            .find(|s| s.country == r.from)
            .expect("validated");
        let ub = exporter.export_cap.min(problem.demands[&r.to]);
        let tag = format!("{}_{}", r.from, r.to);
        let f = milp.add_var(format!("flow_{tag}"), T::zero(), ub, r.unit_cost() / mega, false);
        flows.push(f);
        if r.shipped {
            let n_max = (ub / r.ship_capacity_twh).ceil();
            let n = milp.add_var(
                format!("ships_{tag}"),
                T::zero(),
                n_max,
                r.ship_annualised_cost / mega,
                true,
            );
            milp.add_row(
                format!("fleet_{tag}"),
                vec![(f, T::one()), (n, -r.ship_capacity_twh)],
                RowSense::Le,
                T::zero(),
            );
            ships.push(Some(n));
        } else {
            ships.push(None);
        }
    }

    for (i, s) in problem.supplies.iter().enumerate() {
        let out: Vec<(usize, T)> = problem
            .routes
            .iter()
            .zip(&flows)
            .filter(|(r, _)| r.from == s.country)
            .map(|(_, &f)| (f, T::one()))
            .collect();
        if !out.is_empty() {
            milp.add_row(
                format!("export_cap_{}", s.country),
                out.clone(),
                RowSense::Le,
                s.export_cap,
            );
        }
        let mut balance = vec![(production[i].quantity, T::one())];
        balance.extend(out.iter().map(|&(f, _)| (f, -T::one())));
        milp.add_row(
            format!("supply_balance_{}", s.country),
            balance,
            RowSense::Eq,
            s.domestic_demand_priority,
        );
    }

    let mut backstop = Vec::with_capacity(problem.demands.len());
    for (c, &d) in &problem.demands {
        let mut row: Vec<(usize, T)> = problem
            .routes
            .iter()
            .zip(&flows)
            .filter(|(r, _)| &r.to == c)
            .map(|(_, &f)| (f, T::one()))
            .collect();
        let b = problem
            .backstop_price
            .map(|p| milp.add_var(format!("backstop_{c}"), T::zero(), d, p, false));
        if let Some(b) = b {
            row.push((b, T::one()));
        }
        backstop.push(b);
        milp.add_row(format!("demand_{c}"), row, RowSense::Eq, d);
    }

    Ok(TradeModel {
        milp,
        index: TradeIndex {
            production,
            flows,
            ships,
            backstop,
        },
        problem: problem.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flow<T> {
    pub from: String,
    pub to: String,
    pub twh: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradePlan<T> {
    pub year: u16,
    #[serde(skip)]
    pub status: Status,
    /// Positive flows only, backstop imports listed with [`BACKSTOP`] as source.
    pub flows: Vec<Flow<T>>,
    /// Ships per route, in route order.
    pub ships: Vec<(String, String, u32)>,
    /// Total production per exporter, TWh/year, domestic use included.
    pub production: BTreeMap<String, T>,
    /// €/year.
    pub objective: T,
}

impl<T: Scalar> TradePlan<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn backstop_total(&self) -> T {
        self.flows
            .iter()
            .filter(|f| f.from == BACKSTOP)
            .fold(T::zero(), |acc, f| acc + f.twh)
    }

    /// Share of all traded (non-backstop) volume leaving `country`.
    pub fn export_share(&self, country: &str) -> T {
        let traded = self
            .flows
            .iter()
            .filter(|f| f.from != BACKSTOP)
            .fold(T::zero(), |acc, f| acc + f.twh);
        if traded <= T::zero() {
            return T::zero();
        }
        let own = self
            .flows
            .iter()
            .filter(|f| f.from == country)
            .fold(T::zero(), |acc, f| acc + f.twh);
        own / traded
    }
}

/// Solves a built trade model.
pub fn solve_trade<T: Scalar>(model: &TradeModel<T>) -> Result<TradePlan<T>> {
    let sol = branch_and_bound(&model.milp)?;
    let p = &model.problem;
    let mut plan = TradePlan {
        year: p.year,
        status: sol.status,
        flows: Vec::new(),
        ships: Vec::new(),
        production: BTreeMap::new(),
        objective: T::nan(),
    };
    if sol.status != Status::Optimal {
        return Ok(plan);
    }
    let x = &sol.values;
    // flows below this are solver round-off
    let eps = T::lit(1e-9);
    for (r, (&f, n)) in p.routes.iter().zip(model.index.flows.iter().zip(&model.index.ships)) {
        if x[f] > eps {
            plan.flows.push(Flow {
                from: r.from.clone(),
                to: r.to.clone(),
                twh: x[f],
            });
        }
        let count = n.map_or(0, |n| x[n].round().to_u32().unwrap_or(0));
        plan.ships.push((r.from.clone(), r.to.clone(), count));
    }
    for (c, b) in p.demands.keys().zip(&model.index.backstop) {
        if let Some(b) = *b {
            if x[b] > eps {
                plan.flows.push(Flow {
                    from: BACKSTOP.to_string(),
                    to: c.clone(),
                    twh: x[b],
                });
            }
        }
    }
    for (s, pw) in p.supplies.iter().zip(&model.index.production) {
        plan.production.insert(s.country.clone(), x[pw.quantity].max(T::zero()));
    }
    plan.objective = sol.objective * T::lit(MEGA);
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry<T> {
    pub importer: String,
    pub exporter: String,
    pub twh: T,
    pub mt_co2: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarbonLedger<T> {
    pub year: u16,
    /// t CO₂ per MWh of hydrogen displaced.
    pub factor: T,
    pub entries: Vec<LedgerEntry<T>>,
    /// Mt CO₂/year avoided per importer.
    pub per_importer: BTreeMap<String, T>,
    pub total: T,
}

/// Carbon avoided by green imports: TWh × t/MWh gives Mt directly.
/// Backstop volumes count only when `backstop_green` is set.
pub fn carbon_reduction<T: Scalar>(plan: &TradePlan<T>, factor: T, backstop_green: bool) -> Result<CarbonLedger<T>> {
    if !(factor > T::zero()) {
        return Err(Error::validation("carbon factor must be positive"));
    }
    let mut entries = Vec::new();
    let mut per_importer = BTreeMap::new();
    for f in &plan.flows {
        if f.from == BACKSTOP && !backstop_green {
            continue;
        }
        let mt = f.twh * factor;
        entries.push(LedgerEntry {
            importer: f.to.clone(),
            exporter: f.from.clone(),
            twh: f.twh,
            mt_co2: mt,
        });
        *per_importer.entry(f.to.clone()).or_insert_with(T::zero) += mt;
    }
    let total = entries.iter().fold(T::zero(), |acc, e| acc + e.mt_co2);
    Ok(CarbonLedger {
        year: plan.year,
        factor,
        entries,
        per_importer,
        total,
    })
}

fn csv_err(what: &'static str) -> impl Fn(csv::Error) -> Error {
    move |e| Error::validation(format!("writing {what}: {e}"))
}

pub fn write_flows_csv<T: Scalar, W: Write>(out: W, plan: &TradePlan<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["from", "to", "twh"]).map_err(csv_err("flows"))?;
    for f in &plan.flows {
        w.write_record([f.from.as_str(), f.to.as_str(), &f.twh.to_string()])
            .map_err(csv_err("flows"))?;
    }
    w.flush().map_err(|e| Error::validation(format!("writing flows: {e}")))
}

pub fn write_ledger_csv<T: Scalar, W: Write>(out: W, ledger: &CarbonLedger<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["importer", "exporter", "twh", "mt_co2"])
        .map_err(csv_err("ledger"))?;
    for e in &ledger.entries {
        w.write_record([
            e.importer.as_str(),
            e.exporter.as_str(),
            &e.twh.to_string(),
            &e.mt_co2.to_string(),
        ])
        .map_err(csv_err("ledger"))?;
    }
    w.write_record(["total", "", "", &ledger.total.to_string()])
        .map_err(csv_err("ledger"))?;
    w.flush().map_err(|e| Error::validation(format!("writing ledger: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SankeyNode {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SankeyLink<T> {
    pub source: usize,
    pub target: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sankey<T> {
    pub nodes: Vec<SankeyNode>,
    pub links: Vec<SankeyLink<T>>,
}

/// Node-link structure of a plan; exporters and importers are separate
/// nodes (suffixed `_out` / `_in`) so a country can appear on both sides.
pub fn sankey<T: Scalar>(plan: &TradePlan<T>) -> Sankey<T> {
    let sources: BTreeSet<&str> = plan.flows.iter().map(|f| f.from.as_str()).collect();
    let targets: BTreeSet<&str> = plan.flows.iter().map(|f| f.to.as_str()).collect();
    let mut nodes: Vec<SankeyNode> = sources
        .iter()
        .map(|s| SankeyNode {
            name: format!("{s}_out"),
        })
        .collect();
    nodes.extend(targets.iter().map(|t| SankeyNode {
        name: format!("{t}_in"),
    }));
    let pos = |name: String| nodes.iter().position(|n| n.name == name).expect("node listed");
    let links = plan
        .flows
        .iter()
        .map(|f| SankeyLink {
            source: pos(format!("{}_out", f.from)),
            target: pos(format!("{}_in", f.to)),
            value: f.twh,
        })
        .collect();
    Sankey { nodes, links }
}

fn default_factor() -> f64 {
    0.3
}

/// National supply as written in trade input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SupplyInput<T> {
    pub country: String,
    /// `[cum_twh, price]` pairs.
    pub curve: Vec<(T, T)>,
    pub export_cap: T,
    #[serde(default = "zero")]
    pub domestic_demand: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct TradeYearInput<T> {
    pub year: u16,
    /// Empty when supplies are derived from earlier stages.
    #[serde(default)]
    pub supplies: Vec<SupplyInput<T>>,
    pub demands: BTreeMap<String, T>,
    /// Domestic use per exporter for derived supplies, TWh/year.
    #[serde(default)]
    pub domestic_demand: BTreeMap<String, T>,
    /// Export caps overriding derived ones, TWh/year.
    #[serde(default)]
    pub export_caps: BTreeMap<String, T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct TradeInput<T> {
    pub routes: Vec<Route<T>>,
    #[serde(default)]
    pub backstop_price: Option<T>,
    #[serde(default = "default_factor")]
    pub carbon_factor: f64,
    #[serde(default)]
    pub backstop_green: bool,
    pub years: Vec<TradeYearInput<T>>,
}

impl<T: Scalar + for<'de> Deserialize<'de>> TradeInput<T> {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl<T: Scalar> SupplyInput<T> {
    pub fn into_supply(&self, year: u16, scenario: Scenario) -> CountrySupply<T> {
        CountrySupply {
            country: self.country.clone(),
            year,
            curve: SupplyCurve {
                breakpoints: self.curve.clone(),
                year,
                country: self.country.clone(),
                scenario,
                basis: CurveBasis::EnergyTwh,
            },
            export_cap: self.export_cap,
            domestic_demand_priority: self.domestic_demand,
        }
    }
}

impl<T: Scalar> TradeInput<T> {
    /// Problem for one year, with supplies given explicitly in the file.
    pub fn problem(&self, year: &TradeYearInput<T>, scenario: Scenario) -> TradeProblem<T> {
        TradeProblem {
            year: year.year,
            supplies: year
                .supplies
                .iter()
                .map(|s| s.into_supply(year.year, scenario))
                .collect(),
            demands: year.demands.clone(),
            routes: self.routes.clone(),
            backstop_price: self.backstop_price,
        }
    }
}
