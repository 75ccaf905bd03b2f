//! Levelised cost of hydrogen per grid cell and national cost-supply curves.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::{GridCell, PortSet};
use crate::num::Scalar;

pub const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoundationType {
    Monopile,
    Jacket,
    Floating,
}

impl FoundationType {
    pub fn is_fixed(self) -> bool {
        !matches!(self, FoundationType::Floating)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FoundationType::Monopile => "monopile",
            FoundationType::Jacket => "jacket",
            FoundationType::Floating => "floating",
        }
    }
}

impl fmt::Display for FoundationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Monopile below 30 m, jacket from 30 m to 60 m, floating beyond.
pub fn foundation_type<T: Scalar>(depth: T) -> FoundationType {
    if depth < T::lit(30.0) {
        FoundationType::Monopile
    } else if depth <= T::lit(60.0) {
        FoundationType::Jacket
    } else {
        FoundationType::Floating
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    High,
    Median,
    Low,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(Scenario::High),
            "median" => Ok(Scenario::Median),
            "low" => Ok(Scenario::Low),
            other => Err(Error::validation(format!("unknown learning scenario `{other}`"))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::High => "high",
            Scenario::Median => "median",
            Scenario::Low => "low",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct FoundationCosts<T> {
    pub monopile: T,
    pub jacket: T,
    pub floating: T,
}

impl<T: Scalar> FoundationCosts<T> {
    pub fn get(&self, f: FoundationType) -> T {
        match f {
            FoundationType::Monopile => self.monopile,
            FoundationType::Jacket => self.jacket,
            FoundationType::Floating => self.floating,
        }
    }
}

/// Cost stack of an offshore wind-to-hydrogen farm, 2020 cost basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct CostModel<T> {
    /// € per MW
    pub devex_per_mw: T,
    pub turbine_per_mw: T,
    pub foundation_per_mw: FoundationCosts<T>,
    /// € per km of inter-array cable
    pub array_cable_per_km: T,
    /// € per km to the nearest connection point
    pub export_cable_per_km: T,
    pub platform_per_mw: T,
    /// € per MW per year
    pub opex_per_mw_year: T,
    /// € per MW per km-to-port per year
    pub opex_per_mw_km_year: T,
    pub decex_per_mw: T,
    pub discount_rate: T,
    pub lifetime_years: u32,
    /// MW per km² before vessel-density derating.
    pub power_density_mw_per_km2: T,
    /// Vessel density (vessels/km²/year) mapped to the full 50 % derating.
    pub vessel_density_cap: T,
    /// Inter-turbine spacing used for array cable length, km.
    pub turbine_spacing_km: T,
    pub turbine_rating_mw: T,
}

impl<T: Scalar> CostModel<T> {
    pub fn validate(&self) -> Result<()> {
        let terms = [
            ("devex_per_mw", self.devex_per_mw),
            ("turbine_per_mw", self.turbine_per_mw),
            ("foundation_per_mw.monopile", self.foundation_per_mw.monopile),
            ("foundation_per_mw.jacket", self.foundation_per_mw.jacket),
            ("foundation_per_mw.floating", self.foundation_per_mw.floating),
            ("array_cable_per_km", self.array_cable_per_km),
            ("export_cable_per_km", self.export_cable_per_km),
            ("platform_per_mw", self.platform_per_mw),
            ("opex_per_mw_year", self.opex_per_mw_year),
            ("opex_per_mw_km_year", self.opex_per_mw_km_year),
            ("decex_per_mw", self.decex_per_mw),
        ];
        for (name, v) in terms {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::validation(format!("cost term {name} must be finite and >= 0")));
            }
        }
        let f = &self.foundation_per_mw;
        if !(f.monopile <= f.jacket && f.jacket <= f.floating) {
            return Err(Error::validation(
                "foundation costs must satisfy monopile <= jacket <= floating",
            ));
        }
        if !(self.discount_rate >= T::zero() && self.discount_rate < T::one()) {
            return Err(Error::validation("discount rate must lie in [0, 1)"));
        }
        if self.lifetime_years < 1 {
            return Err(Error::validation("lifetime must be at least one year"));
        }
        for (name, v) in [
            ("power_density_mw_per_km2", self.power_density_mw_per_km2),
            ("vessel_density_cap", self.vessel_density_cap),
            ("turbine_spacing_km", self.turbine_spacing_km),
            ("turbine_rating_mw", self.turbine_rating_mw),
        ] {
            if !(v > T::zero()) {
                return Err(Error::validation(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct ElectrolyserSpec<T> {
    /// HHV efficiency in 2030; earlier years use the same value.
    pub efficiency_2030: T,
    pub efficiency_2050: T,
    /// € per MW
    pub capex_per_mw: T,
    /// Fraction of capex per year.
    pub opex_fraction: T,
    /// Auxiliary load (pumps, desalination, compression, storage) as a
    /// fraction of electrolyser input.
    pub aux_margin: T,
    /// Annualised capacity charge in MWh of hydrogen per MW per year
    /// traded off against output when sizing.
    pub sizing_penalty_mwh_per_mw: T,
}

impl<T: Scalar> ElectrolyserSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for e in [self.efficiency_2030, self.efficiency_2050] {
            if !(e > T::zero() && e < T::one()) {
                return Err(Error::validation("electrolyser efficiency must lie in (0, 1)"));
            }
        }
        if !(self.aux_margin >= T::zero()) || !(self.capex_per_mw >= T::zero()) || !(self.opex_fraction >= T::zero()) {
            return Err(Error::validation("electrolyser cost terms and margin must be >= 0"));
        }
        if !(self.sizing_penalty_mwh_per_mw >= T::zero()) {
            return Err(Error::validation("sizing penalty must be >= 0"));
        }
        Ok(())
    }

    /// Efficiency for a scenario year, linear between 2030 and 2050.
    pub fn efficiency(&self, year: u16) -> T {
        if year <= 2030 {
            return self.efficiency_2030;
        }
        if year >= 2050 {
            return self.efficiency_2050;
        }
        let t = T::lit(f64::from(year - 2030) / 20.0);
        self.efficiency_2030 + t * (self.efficiency_2050 - self.efficiency_2030)
    }
}

/// Hydrogen output in MWh(HHV)/year for an hourly power series (MW).
/// Auxiliaries draw `aux_margin` per unit of electrolyser input, so the
/// stack runs at `min(E, P / (1 + margin))`.
pub fn annual_hydrogen<T: Scalar>(power_mw: &[T], electrolyser_mw: T, efficiency: T, aux_margin: T) -> T {
    if power_mw.is_empty() || electrolyser_mw <= T::zero() {
        return T::zero();
    }
    let denom = T::one() + aux_margin;
    let used: T = power_mw
        .iter()
        .map(|&p| (p.max(T::zero()) / denom).min(electrolyser_mw))
        .sum();
    used * efficiency * T::lit(HOURS_PER_YEAR) / T::from_usize_lossy(power_mw.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sizing<T> {
    pub capacity_mw: T,
    /// Set when the series never produces and sizing returned zero.
    pub no_output: bool,
}

/// Electrolyser capacity maximising annual hydrogen output minus the
/// annualised capacity charge, over a 1 % grid of `(0, rated/(1+margin)]`.
pub fn size_electrolyser<T: Scalar>(
    cf: &[T],
    rated_wind: T,
    spec: &ElectrolyserSpec<T>,
    efficiency: T,
) -> Result<Sizing<T>> {
    size_electrolyser_on_grid(cf, rated_wind, spec, efficiency, 100)
}

/// Grid sweep with `steps` candidate capacities; exposed for finer checks.
pub fn size_electrolyser_on_grid<T: Scalar>(
    cf: &[T],
    rated_wind: T,
    spec: &ElectrolyserSpec<T>,
    efficiency: T,
    steps: usize,
) -> Result<Sizing<T>> {
    if cf.is_empty() {
        return Err(Error::validation("capacity factor series is empty"));
    }
    if !(rated_wind >= T::zero()) || steps == 0 {
        return Err(Error::validation("rated wind power must be >= 0"));
    }
    if cf.iter().all(|&c| c <= T::zero()) || rated_wind == T::zero() {
        warn!("capacity factor series never produces; electrolyser sized at 0 MW");
        return Ok(Sizing {
            capacity_mw: T::zero(),
            no_output: true,
        });
    }
    let power: Vec<T> = cf.iter().map(|&c| c * rated_wind).collect();
    let e_max = rated_wind / (T::one() + spec.aux_margin);
    let mut best = (T::zero(), T::neg_infinity());
    for k in 1..=steps {
        let e = e_max * T::from_usize_lossy(k) / T::from_usize_lossy(steps);
        let value = annual_hydrogen(&power, e, efficiency, spec.aux_margin) - spec.sizing_penalty_mwh_per_mw * e;
        if value > best.1 {
            best = (e, value);
        }
    }
    Ok(Sizing {
        capacity_mw: best.0,
        no_output: false,
    })
}

/// Cost stack of one farm in €.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown<T> {
    pub devex: T,
    /// Spent up front (year 0).
    pub capex: T,
    /// Uniform yearly cost, years 1..=L.
    pub opex_per_year: T,
    /// Paid at end of life.
    pub decex: T,
}

impl<T: Scalar> CostBreakdown<T> {
    pub fn scaled(&self, f: T) -> Self {
        Self {
            devex: self.devex * f,
            capex: self.capex * f,
            opex_per_year: self.opex_per_year * f,
            decex: self.decex * f,
        }
    }
}

/// Discounted lifetime cost over discounted lifetime output, €/MWh.
pub fn lcoh<T: Scalar>(costs: &CostBreakdown<T>, annual_h2: T, discount_rate: T, lifetime: u32) -> Result<T> {
    if !(annual_h2 > T::zero()) {
        return Err(Error::NonProducing(format!("annual hydrogen {annual_h2} MWh")));
    }
    if lifetime < 1 {
        return Err(Error::validation("lifetime must be at least one year"));
    }
    let growth = T::one() + discount_rate;
    let mut annuity = T::zero();
    let mut factor = T::one();
    for _ in 0..lifetime {
        factor /= growth;
        annuity += factor;
    }
    let cost = costs.devex + costs.capex + costs.opex_per_year * annuity + costs.decex * factor;
    Ok(cost / (annual_h2 * annuity))
}

/// Cost multipliers relative to 2020 by foundation class and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct LearningTable<T> {
    /// Median multipliers for 2030, 2040, 2050.
    pub fixed_median: [T; 3],
    pub floating_median: [T; 3],
    /// Added to the median multiplier in the high-cost scenario.
    pub high_offset: T,
    /// Added to the median multiplier in the low-cost scenario.
    pub low_offset: T,
}

impl<T: Scalar> Default for LearningTable<T> {
    fn default() -> Self {
        Self {
            fixed_median: [T::lit(0.79), T::lit(0.65), T::lit(0.51)],
            floating_median: [T::lit(0.98), T::lit(0.83), T::lit(0.60)],
            high_offset: T::lit(0.05),
            low_offset: T::lit(-0.05),
        }
    }
}

impl<T: Scalar> LearningTable<T> {
    pub fn multiplier(&self, year: u16, foundation: FoundationType, scenario: Scenario) -> Result<T> {
        let idx = match year {
            2020 => return Ok(T::one()),
            2030 => 0,
            2040 => 1,
            2050 => 2,
            other => return Err(Error::validation(format!("no learning rate for year {other}"))),
        };
        let median = if foundation.is_fixed() {
            self.fixed_median[idx]
        } else {
            self.floating_median[idx]
        };
        let m = match scenario {
            Scenario::Median => median,
            Scenario::High => median + self.high_offset,
            Scenario::Low => median + self.low_offset,
        };
        Ok(m.max(T::zero()))
    }
}

pub fn apply_learning<T: Scalar>(
    lcoh: T,
    year: u16,
    foundation: FoundationType,
    scenario: Scenario,
    table: &LearningTable<T>,
) -> Result<T> {
    Ok(lcoh * table.multiplier(year, foundation, scenario)?)
}

/// Installable capacity falls linearly with normalised vessel density, by
/// at most half.
pub fn derate_density<T: Scalar>(base_mw: T, vessel_density: T) -> T {
    let d = vessel_density.max(T::zero()).min(T::one());
    base_mw * (T::one() - T::lit(0.5) * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcohResult<T> {
    pub cell_id: u32,
    pub country: String,
    pub lat: T,
    pub lon: T,
    pub foundation: FoundationType,
    /// €/MWh(H₂), 2020 cost basis.
    pub lcoh: T,
    pub annual_h2: T,
    pub installable_mw: T,
    pub electrolyser_mw: T,
    pub capacity_factor: T,
}

/// Farm cost stack for a cell hosting `installable_mw` of wind and an
/// electrolyser of `electrolyser_mw`.
pub fn cell_costs<T: Scalar>(
    cell: &GridCell<T>,
    installable_mw: T,
    electrolyser_mw: T,
    costs: &CostModel<T>,
    electrolyser: &ElectrolyserSpec<T>,
    ports: &PortSet,
) -> CostBreakdown<T> {
    let foundation = foundation_type(cell.depth);
    let to_port = ports.nearest_port_km(cell.position());
    let to_grid = ports.nearest_connection_km(cell.position());
    let turbines = installable_mw / costs.turbine_rating_mw;
    let array_km = turbines * costs.turbine_spacing_km;
    let e_capex = electrolyser.capex_per_mw * electrolyser_mw;
    CostBreakdown {
        devex: costs.devex_per_mw * installable_mw,
        capex: installable_mw
            * (costs.turbine_per_mw + costs.foundation_per_mw.get(foundation) + costs.platform_per_mw)
            + costs.array_cable_per_km * array_km
            + costs.export_cable_per_km * to_grid
            + e_capex,
        opex_per_year: installable_mw * (costs.opex_per_mw_year + costs.opex_per_mw_km_year * to_port)
            + electrolyser.opex_fraction * e_capex,
        decex: costs.decex_per_mw * installable_mw,
    }
}

/// LCOH of one non-excluded cell given its per-unit hourly farm output.
/// Returns `Ok(None)` for cells without production.
pub fn evaluate_cell<T: Scalar>(
    cell: &GridCell<T>,
    cf_series: &[T],
    costs: &CostModel<T>,
    electrolyser: &ElectrolyserSpec<T>,
    ports: &PortSet,
    year: u16,
) -> Result<Option<LcohResult<T>>> {
    if cell.excluded {
        return Err(Error::validation(format!("cell {} is excluded", cell.id)));
    }
    let base = costs.power_density_mw_per_km2 * cell.area;
    let installable = derate_density(base, cell.vessel_density / costs.vessel_density_cap);
    let efficiency = electrolyser.efficiency(year);
    let sizing = size_electrolyser(cf_series, installable, electrolyser, efficiency)?;
    if sizing.no_output {
        return Ok(None);
    }
    let power: Vec<T> = cf_series.iter().map(|&c| c * installable).collect();
    let annual = annual_hydrogen(&power, sizing.capacity_mw, efficiency, electrolyser.aux_margin);
    if !(annual > T::zero()) {
        return Ok(None);
    }
    let stack = cell_costs(cell, installable, sizing.capacity_mw, costs, electrolyser, ports);
    let value = lcoh(&stack, annual, costs.discount_rate, costs.lifetime_years)?;
    let cf = if cf_series.is_empty() {
        T::zero()
    } else {
        cf_series.iter().copied().sum::<T>() / T::from_usize_lossy(cf_series.len())
    };
    Ok(Some(LcohResult {
        cell_id: cell.id,
        country: cell.country.clone(),
        lat: cell.lat,
        lon: cell.lon,
        foundation: foundation_type(cell.depth),
        lcoh: value,
        annual_h2: annual,
        installable_mw: installable,
        electrolyser_mw: sizing.capacity_mw,
        capacity_factor: cf,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveBasis {
    /// Cumulative installable capacity, GW.
    CapacityGw,
    /// Cumulative hydrogen output, TWh/year.
    EnergyTwh,
}

/// Step supply curve: the segment ending at `breakpoints[i].0` is
/// available at `breakpoints[i].1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyCurve<T> {
    pub breakpoints: Vec<(T, T)>,
    pub year: u16,
    pub country: String,
    pub scenario: Scenario,
    pub basis: CurveBasis,
}

impl<T: Scalar> SupplyCurve<T> {
    pub fn total(&self) -> T {
        self.breakpoints.last().map_or(T::zero(), |b| b.0)
    }

    /// Checks strictly increasing quantities and non-decreasing prices.
    pub fn validate(&self) -> Result<()> {
        let mut prev = (T::zero(), T::neg_infinity());
        for &(q, p) in &self.breakpoints {
            if !(q > prev.0) {
                return Err(Error::validation(format!(
                    "supply curve for {} has non-increasing quantity {q}",
                    self.country
                )));
            }
            if !(p >= prev.1) || !p.is_finite() {
                return Err(Error::validation(format!(
                    "supply curve for {} is not monotone at price {p}",
                    self.country
                )));
            }
            prev = (q, p);
        }
        Ok(())
    }

    /// Cost of supplying `q` (integral of the step curve).
    pub fn cost(&self, q: T) -> T {
        let mut left = T::zero();
        let mut total = T::zero();
        for &(right, price) in &self.breakpoints {
            if q <= left {
                break;
            }
            total += (q.min(right) - left) * price;
            left = right;
        }
        total
    }
}

fn build_curve<T: Scalar>(
    results: &[LcohResult<T>],
    year: u16,
    scenario: Scenario,
    table: &LearningTable<T>,
    basis: CurveBasis,
) -> Result<SupplyCurve<T>> {
    let mut priced = Vec::with_capacity(results.len());
    for r in results {
        let quantity = match basis {
            CurveBasis::CapacityGw => r.installable_mw / T::lit(1e3),
            CurveBasis::EnergyTwh => r.annual_h2 / T::lit(1e6),
        };
        if quantity > T::zero() {
            let price = apply_learning(r.lcoh, year, r.foundation, scenario, table)?;
            priced.push((price, r.cell_id, quantity));
        }
    }
    priced.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let mut cum = T::zero();
    let breakpoints = priced
        .into_iter()
        .map(|(price, _, q)| {
            cum += q;
            (cum, price)
        })
        .collect();
    let country = results.first().map(|r| r.country.clone()).unwrap_or_default();
    Ok(SupplyCurve {
        breakpoints,
        year,
        country,
        scenario,
        basis,
    })
}

/// Capacity supply curve (GW vs learning-adjusted €/MWh) for one country.
pub fn supply_curve<T: Scalar>(
    results: &[LcohResult<T>],
    year: u16,
    scenario: Scenario,
    table: &LearningTable<T>,
) -> Result<SupplyCurve<T>> {
    build_curve(results, year, scenario, table, CurveBasis::CapacityGw)
}

/// Same ordering as [`supply_curve`] with cumulative TWh/year of hydrogen
/// on the quantity axis; this is the form the trade model consumes.
pub fn energy_supply_curve<T: Scalar>(
    results: &[LcohResult<T>],
    year: u16,
    scenario: Scenario,
    table: &LearningTable<T>,
) -> Result<SupplyCurve<T>> {
    build_curve(results, year, scenario, table, CurveBasis::EnergyTwh)
}

/// `cell_id,lat,lon,foundation,lcoh,installable_mw`
pub fn write_lcoh_map<T: Scalar, W: Write>(out: W, results: &[LcohResult<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::validation(format!("writing LCOH map: {e}"));
    w.write_record(["cell_id", "lat", "lon", "foundation", "lcoh", "installable_mw"])
        .map_err(io)?;
    for r in results {
        w.write_record([
            r.cell_id.to_string(),
            r.lat.to_string(),
            r.lon.to_string(),
            r.foundation.to_string(),
            r.lcoh.to_string(),
            r.installable_mw.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::validation(format!("writing LCOH map: {e}")))?;
    Ok(())
}

/// `cum_gw,lcoh`
pub fn write_supply_curve<T: Scalar, W: Write>(out: W, curve: &SupplyCurve<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::validation(format!("writing supply curve: {e}"));
    let header = match curve.basis {
        CurveBasis::CapacityGw => "cum_gw",
        CurveBasis::EnergyTwh => "cum_twh",
    };
    w.write_record([header, "lcoh"]).map_err(io)?;
    for &(q, p) in &curve.breakpoints {
        w.write_record([q.to_string(), p.to_string()]).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::validation(format!("writing supply curve: {e}")))?;
    Ok(())
}
