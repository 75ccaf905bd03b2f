use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use offshore_h2::lcoh::Scenario;
use offshore_h2::powergas::blend_cap_for_year;
use offshore_h2::wake::WakeSettings;
use offshore_h2::Error;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarmLayout {
    pub rows: usize,
    pub cols: usize,
    /// Turbine spacing in rotor diameters.
    pub spacing_diameters: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weibull {
    pub shape: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindConfig {
    pub hours: usize,
    /// Weibull parameters of the synthetic wind per country.
    pub countries: BTreeMap<String, Weibull>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WakeConfig {
    pub decay: f64,
    pub influence_cutoff: f64,
    pub bin_width: f64,
}

impl Default for WakeConfig {
    fn default() -> Self {
        let s = WakeSettings::<f64>::default();
        Self {
            decay: s.decay,
            influence_cutoff: s.influence_cutoff,
            bin_width: s.bin_width,
        }
    }
}

impl From<WakeConfig> for WakeSettings<f64> {
    fn from(c: WakeConfig) -> Self {
        WakeSettings {
            decay: c.decay,
            influence_cutoff: c.influence_cutoff,
            bin_width: c.bin_width,
        }
    }
}

/// One run of the chain. Relative paths resolve against the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub year: u16,
    pub scenario: Scenario,
    /// Overrides the blending cap implied by `year`.
    #[serde(default)]
    pub blend_cap: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    pub grid: PathBuf,
    #[serde(default)]
    pub zones: Option<PathBuf>,
    pub ports: PathBuf,
    pub costs: PathBuf,
    pub turbine: PathBuf,
    pub rotor_diameter_m: f64,
    pub farm: FarmLayout,
    pub wind: WindConfig,
    #[serde(default)]
    pub wake: WakeConfig,
    pub system: PathBuf,
    /// Country whose export cap comes from the dispatch stage.
    pub dispatch_country: String,
    pub trade: PathBuf,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.grid);
        if let Some(z) = self.zones.as_mut() {
            fix(z);
        }
        fix(&mut self.ports);
        fix(&mut self.costs);
        fix(&mut self.turbine);
        fix(&mut self.system);
        fix(&mut self.trade);
        fix(&mut self.out);
    }

    pub fn validate(&self) -> Result<(), Error> {
        blend_cap_for_year::<f64>(self.year)?;
        if let Some(c) = self.blend_cap {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::validation(format!("blend cap {c} outside [0, 1]")));
            }
        }
        if self.farm.rows == 0 || self.farm.cols == 0 || !(self.farm.spacing_diameters > 0.0) {
            return Err(Error::validation("farm layout needs rows, cols and a positive spacing"));
        }
        if self.wind.hours == 0 {
            return Err(Error::validation("wind.hours must be positive"));
        }
        if !(self.rotor_diameter_m > 0.0) {
            return Err(Error::validation("rotor diameter must be positive"));
        }
        Ok(())
    }

    /// Blending cap for `year`, honouring an explicit override.
    pub fn blend_cap_for(&self, year: u16) -> Result<f64, Error> {
        match self.blend_cap {
            Some(c) => Ok(c),
            None => blend_cap_for_year(year),
        }
    }

    /// Seed of the synthetic wind at one cell.
    pub fn cell_seed(&self, cell_id: u32) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(cell_id)
    }
}

/// Cost inputs file: farm cost model plus electrolyser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostsFile {
    pub cost_model: offshore_h2::lcoh::CostModel<f64>,
    pub electrolyser: offshore_h2::lcoh::ElectrolyserSpec<f64>,
}

impl CostsFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let costs: CostsFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let named = |e: Error| Error::validation(format!("{}: {e}", path.display()));
        costs.cost_model.validate().map_err(named)?;
        costs.electrolyser.validate().map_err(named)?;
        Ok(costs)
    }
}
