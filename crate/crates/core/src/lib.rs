//! Offshore wind to hydrogen modelling chain.
//!
//! The crate is organised along the stages of the chain:
//!
//! * [`geodata`] grid cells, exclusion zones, distances and synthetic wind,
//! * [`wake`] wake-corrected farm output and capacity factors,
//! * [`lcoh`] levelised cost of hydrogen per cell and national supply curves,
//! * [`powergas`] coordinated hourly power and gas dispatch with blending,
//! * [`trade`] international hydrogen trade and carbon accounting,
//! * [`solver`] the LP/MILP engine behind dispatch and trade.
//!
//! Numeric modules are generic over [`num::Scalar`]; the aliases below fix
//! the scalar to `f64` (and `f32` where single precision is useful).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geodata;
pub mod lcoh;
pub mod num;
pub mod powergas;
pub mod solver;
pub mod trade;
pub mod wake;

pub use error::{Error, Result};
pub use num::Scalar;

pub type LinearProgram = solver::LinearProgram<f64>;
pub type LinearProgramF32 = solver::LinearProgram<f32>;
pub type MilpProblem = solver::MilpProblem<f64>;
pub type Solution = solver::Solution<f64>;

pub type CountrySupply = trade::CountrySupply<f64>;
pub type Route = trade::Route<f64>;
pub type TradePlan = trade::TradePlan<f64>;
pub type CarbonLedger = trade::CarbonLedger<f64>;
pub type SupplyCurve = lcoh::SupplyCurve<f64>;
pub type LcohResult = lcoh::LcohResult<f64>;
pub type CostModel = lcoh::CostModel<f64>;
pub type ComInstance = powergas::ComInstance<f64>;
pub type DispatchResult = powergas::DispatchResult<f64>;
pub type GasComposition = powergas::GasComposition<f64>;
