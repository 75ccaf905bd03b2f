//! Stage drivers behind the `offshore-h2` binary.
//!
//! Every stage reads its inputs from a [`RunConfig`], writes plot-ready
//! CSV/JSON files into the output directory (each file via a temporary
//! file renamed into place) and returns the in-memory results so later
//! stages and tests can compose them.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use offshore_h2::geodata::{apply_exclusions, load_grid, load_zones, synth_wind, GridCell, PortSet};
use offshore_h2::lcoh::{
    energy_supply_curve, evaluate_cell, supply_curve, write_lcoh_map, write_supply_curve, LcohResult, LearningTable,
    SupplyCurve,
};
use offshore_h2::powergas::{
    dispatch_days, summarise, write_dispatch_csv, DispatchResult, DispatchStatus, DispatchSummary, ScpOptions,
    SystemFile,
};
use offshore_h2::trade::{
    build_trade_milp, carbon_reduction, sankey, solve_trade, write_flows_csv, write_ledger_csv, CarbonLedger,
    CountrySupply, TradeInput, TradePlan, TradeProblem, TradeYearInput,
};
use offshore_h2::wake::{capacity_factor, farm_power, Layout, PowerCurve};
use offshore_h2::Error;
use serde::Serialize;

pub use config::{CostsFile, RunConfig};

/// Failure of a run, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Missing or malformed input, exit code 2.
    #[error(transparent)]
    Input(#[from] Error),
    /// Infeasible or non-converged model, exit code 1.
    #[error("{0}")]
    Model(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => 2,
            RunError::Model(_) => 1,
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Writes `path` through a sibling temporary file so readers never see a
/// partial file.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), Error>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Error>,
{
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), Error> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        writeln!(w).map_err(|e| Error::io(path, e))
    })
}

/// Hourly per-unit farm output at one grid cell.
#[derive(Debug, Clone)]
pub struct CellWind {
    pub cell: GridCell<f64>,
    pub cf_series: Vec<f64>,
    pub capacity_factor: f64,
}

#[derive(Debug, Clone)]
pub struct WakeStage {
    /// Every grid cell, with exclusions applied.
    pub cells: Vec<GridCell<f64>>,
    /// Non-excluded cells only, in grid order.
    pub wind: Vec<CellWind>,
}

/// Synthetic wind and wake-corrected output for every non-excluded cell.
pub fn run_wake(cfg: &RunConfig) -> RunResult<WakeStage> {
    cfg.validate()?;
    let mut cells = load_grid::<f64>(&cfg.grid)?;
    if let Some(zones) = &cfg.zones {
        cells = apply_exclusions(&cells, &load_zones(zones)?);
    }
    let curve = PowerCurve::load(&cfg.turbine, cfg.rotor_diameter_m)?;
    let spacing = cfg.farm.spacing_diameters * cfg.rotor_diameter_m;
    let layout = Layout::grid(cfg.farm.rows, cfg.farm.cols, spacing, curve)?;
    let rated = layout.rated_power();
    let settings = cfg.wake.into();

    let mut wind = Vec::new();
    for cell in cells.iter().filter(|c| !c.excluded) {
        let w = cfg.wind.countries.get(&cell.country).ok_or_else(|| {
            Error::validation(format!(
                "{}: no wind parameters for country {} (cell {})",
                cfg.grid.display(),
                cell.country,
                cell.id
            ))
        })?;
        let series = synth_wind(cfg.cell_seed(cell.id), w.shape, w.scale, cfg.wind.hours)?;
        let power = farm_power(&layout, &series, &settings)?;
        let cf = capacity_factor(&power, rated)?;
        wind.push(CellWind {
            cell: cell.clone(),
            cf_series: power.iter().map(|p| p / rated).collect(),
            capacity_factor: cf,
        });
    }
    info!("wake: {} of {} cells evaluated", wind.len(), cells.len());
    Ok(WakeStage { cells, wind })
}

pub fn write_wake(cfg: &RunConfig, stage: &WakeStage) -> RunResult<()> {
    let path = cfg.out.join("capacity_factors.csv");
    write_atomic(&path, |w| {
        let mut out = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::validation(format!("{}: {e}", path.display()));
        out.write_record(["cell_id", "country", "lat", "lon", "capacity_factor"])
            .map_err(err)?;
        for c in &stage.wind {
            out.write_record([
                c.cell.id.to_string(),
                c.cell.country.clone(),
                c.cell.lat.to_string(),
                c.cell.lon.to_string(),
                c.capacity_factor.to_string(),
            ])
            .map_err(err)?;
        }
        out.flush().map_err(|e| Error::io(&path, e))
    })?;
    Ok(())
}

pub fn cmd_wake(cfg: &RunConfig) -> RunResult<WakeStage> {
    let stage = run_wake(cfg)?;
    write_wake(cfg, &stage)?;
    Ok(stage)
}

#[derive(Debug, Clone)]
pub struct LcohStage {
    pub year: u16,
    pub results: Vec<LcohResult<f64>>,
    /// GW against €/MWh per country.
    pub capacity_curves: BTreeMap<String, SupplyCurve<f64>>,
    /// TWh/year against €/MWh per country.
    pub energy_curves: BTreeMap<String, SupplyCurve<f64>>,
}

impl LcohStage {
    /// Capacity-weighted mean LCOH of a country's producing cells.
    pub fn mean_lcoh(&self, country: &str) -> Option<f64> {
        let (num, den) = self
            .results
            .iter()
            .filter(|r| r.country == country)
            .fold((0.0, 0.0), |(n, d), r| (n + r.lcoh * r.annual_h2, d + r.annual_h2));
        (den > 0.0).then(|| num / den)
    }
}

pub fn run_lcoh(cfg: &RunConfig, wake: &WakeStage, year: u16) -> RunResult<LcohStage> {
    let costs = CostsFile::load(&cfg.costs)?;
    let ports = PortSet::load(&cfg.ports)?;
    let mut results = Vec::new();
    for c in &wake.wind {
        if let Some(r) = evaluate_cell(
            &c.cell,
            &c.cf_series,
            &costs.cost_model,
            &costs.electrolyser,
            &ports,
            year,
        )? {
            results.push(r);
        }
    }
    if results.is_empty() {
        warn!("lcoh: no producing cells for {year}");
    }
    let table = LearningTable::default();
    let mut by_country: BTreeMap<String, Vec<LcohResult<f64>>> = BTreeMap::new();
    for r in &results {
        by_country.entry(r.country.clone()).or_default().push(r.clone());
    }
    let mut capacity_curves = BTreeMap::new();
    let mut energy_curves = BTreeMap::new();
    for (country, rs) in &by_country {
        capacity_curves.insert(country.clone(), supply_curve(rs, year, cfg.scenario, &table)?);
        energy_curves.insert(country.clone(), energy_supply_curve(rs, year, cfg.scenario, &table)?);
    }
    Ok(LcohStage {
        year,
        results,
        capacity_curves,
        energy_curves,
    })
}

pub fn write_lcoh(cfg: &RunConfig, stage: &LcohStage) -> RunResult<()> {
    write_atomic(&cfg.out.join("lcoh_map.csv"), |w| write_lcoh_map(w, &stage.results))?;
    for (country, curve) in &stage.capacity_curves {
        write_atomic(&cfg.out.join(format!("supply_curve_{country}.csv")), |w| {
            write_supply_curve(w, curve)
        })?;
    }
    for (country, curve) in &stage.energy_curves {
        write_atomic(&cfg.out.join(format!("supply_curve_{country}_twh.csv")), |w| {
            write_supply_curve(w, curve)
        })?;
    }
    Ok(())
}

pub fn cmd_lcoh(cfg: &RunConfig, wake: &WakeStage) -> RunResult<LcohStage> {
    let stage = run_lcoh(cfg, wake, cfg.year)?;
    write_lcoh(cfg, &stage)?;
    Ok(stage)
}

#[derive(Debug, Clone)]
pub struct DispatchStage {
    pub blend_cap: f64,
    pub system: SystemFile<f64>,
    pub results: Vec<DispatchResult<f64>>,
    pub summary: DispatchSummary,
}

impl DispatchStage {
    pub fn export_potential_twh(&self) -> f64 {
        self.summary.export_potential_mwh / 1e6
    }

    fn check(&self) -> RunResult<()> {
        for r in &self.results {
            if r.status != Some(DispatchStatus::Converged) {
                return Err(RunError::Model(format!(
                    "dispatch day {} ended {:?}",
                    r.day,
                    r.status.unwrap_or(DispatchStatus::Infeasible)
                )));
            }
        }
        Ok(())
    }
}

/// Electrolyser efficiency used to turn exported power into hydrogen.
fn export_efficiency(system: &SystemFile<f64>) -> f64 {
    system
        .power
        .generators
        .iter()
        .find_map(|g| g.electrolyser.as_ref().map(|e| e.efficiency))
        .unwrap_or(1.0)
}

pub fn run_dispatch(cfg: &RunConfig, blend_cap: f64) -> RunResult<DispatchStage> {
    let mut system = SystemFile::<f64>::load(&cfg.system)?;
    if let Some(gas) = system.gas.as_mut() {
        gas.region = gas.region.with_cap(blend_cap);
    }
    let results = dispatch_days(&system, &ScpOptions::default())
        .map_err(|e| Error::validation(format!("{}: {e}", cfg.system.display())))?;
    let summary = summarise(&results, export_efficiency(&system));
    info!(
        "dispatch: blend cap {blend_cap}, curtailment {:.4}, export {:.1} MWh",
        summary.curtailment_rate, summary.export_potential_mwh
    );
    Ok(DispatchStage {
        blend_cap,
        system,
        results,
        summary,
    })
}

pub fn write_dispatch(cfg: &RunConfig, stage: &DispatchStage) -> RunResult<()> {
    write_atomic(&cfg.out.join("dispatch.csv"), |w| {
        write_dispatch_csv(w, &stage.system, &stage.results)
    })?;
    write_json(&cfg.out.join("dispatch_summary.json"), &stage.summary)?;
    Ok(())
}

pub fn cmd_dispatch(cfg: &RunConfig) -> RunResult<DispatchStage> {
    let stage = run_dispatch(cfg, cfg.blend_cap_for(cfg.year)?)?;
    write_dispatch(cfg, &stage)?;
    stage.check()?;
    Ok(stage)
}

#[derive(Debug, Clone)]
pub struct TradeYear {
    pub problem: TradeProblem<f64>,
    pub plan: TradePlan<f64>,
    pub ledger: CarbonLedger<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct TradeYearSummary {
    year: u16,
    objective_eur: f64,
    backstop_twh: f64,
    carbon_mt: f64,
    export_caps: BTreeMap<String, f64>,
    export_share: BTreeMap<String, f64>,
}

/// Dispatch export potential, TWh/year, cached by blending cap.
#[derive(Debug, Default)]
pub struct ExportCache {
    by_cap: BTreeMap<u64, f64>,
}

impl ExportCache {
    pub fn insert(&mut self, stage: &DispatchStage) {
        self.by_cap
            .insert(stage.blend_cap.to_bits(), stage.export_potential_twh());
    }

    fn get(&mut self, cfg: &RunConfig, cap: f64) -> RunResult<f64> {
        if let Some(&v) = self.by_cap.get(&cap.to_bits()) {
            return Ok(v);
        }
        let stage = run_dispatch(cfg, cap)?;
        stage.check()?;
        self.insert(&stage);
        Ok(stage.export_potential_twh())
    }
}

/// Trade problem of one year. Supplies listed in the trade file are used
/// as given; otherwise they come from this year's supply curves, with the
/// dispatched country's export cap taken from its dispatch export
/// potential and other caps from the file or the curve.
pub fn trade_problem(
    cfg: &RunConfig,
    input: &TradeInput<f64>,
    year: &TradeYearInput<f64>,
    wake: &WakeStage,
    exports: &mut ExportCache,
) -> RunResult<TradeProblem<f64>> {
    if !year.supplies.is_empty() {
        return Ok(input.problem(year, cfg.scenario));
    }
    let lcoh = run_lcoh(cfg, wake, year.year)?;
    let mut supplies = Vec::new();
    for (country, curve) in &lcoh.energy_curves {
        let domestic = year.domestic_demand.get(country).copied().unwrap_or(0.0);
        let cap = match year.export_caps.get(country) {
            Some(&c) => c,
            None if country == &cfg.dispatch_country => exports.get(cfg, cfg.blend_cap_for(year.year)?)?,
            None => (curve.total() - domestic).max(0.0),
        };
        supplies.push(CountrySupply {
            country: country.clone(),
            year: year.year,
            curve: curve.clone(),
            export_cap: cap,
            domestic_demand_priority: domestic,
        });
    }
    Ok(TradeProblem {
        year: year.year,
        supplies,
        demands: year.demands.clone(),
        routes: input.routes.clone(),
        backstop_price: input.backstop_price,
    })
}

pub fn solve_year(problem: TradeProblem<f64>, input: &TradeInput<f64>) -> RunResult<TradeYear> {
    let model = build_trade_milp(&problem)?;
    let plan = solve_trade(&model)?;
    if !plan.is_optimal() {
        return Err(RunError::Model(format!(
            "trade {}: solver ended {:?}",
            problem.year, plan.status
        )));
    }
    let ledger = carbon_reduction(&plan, input.carbon_factor, input.backstop_green)?;
    Ok(TradeYear { problem, plan, ledger })
}

pub fn write_trade(cfg: &RunConfig, years: &[TradeYear]) -> RunResult<()> {
    let mut summary = Vec::new();
    for y in years {
        let tag = y.plan.year;
        write_atomic(&cfg.out.join(format!("trade_{tag}_flows.csv")), |w| {
            write_flows_csv(w, &y.plan)
        })?;
        write_atomic(&cfg.out.join(format!("trade_{tag}_ledger.csv")), |w| {
            write_ledger_csv(w, &y.ledger)
        })?;
        write_json(&cfg.out.join(format!("trade_{tag}_sankey.json")), &sankey(&y.plan))?;
        summary.push(TradeYearSummary {
            year: tag,
            objective_eur: y.plan.objective,
            backstop_twh: y.plan.backstop_total(),
            carbon_mt: y.ledger.total,
            export_caps: y
                .problem
                .supplies
                .iter()
                .map(|s| (s.country.clone(), s.export_cap))
                .collect(),
            export_share: y
                .problem
                .supplies
                .iter()
                .map(|s| (s.country.clone(), y.plan.export_share(&s.country)))
                .collect(),
        });
    }
    write_json(&cfg.out.join("trade_summary.json"), &summary)?;
    Ok(())
}

pub fn cmd_trade(cfg: &RunConfig, wake: &WakeStage, exports: &mut ExportCache) -> RunResult<Vec<TradeYear>> {
    let input = TradeInput::<f64>::load(&cfg.trade)?;
    let mut years = Vec::new();
    for y in &input.years {
        let problem = trade_problem(cfg, &input, y, wake, exports)?;
        years.push(solve_year(problem, &input)?);
    }
    write_trade(cfg, &years)?;
    Ok(years)
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub wake: WakeStage,
    pub lcoh: LcohStage,
    pub dispatch: DispatchStage,
    pub trade: Vec<TradeYear>,
}

/// All stages in dependency order.
pub fn cmd_pipeline(cfg: &RunConfig) -> RunResult<PipelineOutput> {
    let wake = cmd_wake(cfg)?;
    let lcoh = cmd_lcoh(cfg, &wake)?;
    let dispatch = cmd_dispatch(cfg)?;
    let mut exports = ExportCache::default();
    exports.insert(&dispatch);
    let trade = cmd_trade(cfg, &wake, &mut exports)?;
    Ok(PipelineOutput {
        wake,
        lcoh,
        dispatch,
        trade,
    })
}

/// Path of the bundled demo configuration.
pub fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo/demo.json")
}
