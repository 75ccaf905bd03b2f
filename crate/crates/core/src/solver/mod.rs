//! Dense LP/MILP engine: bounded primal simplex, best-bound branch and
//! bound, and outer-approximation cuts for smooth convex constraints.

mod bnb;
mod cuts;
mod lpformat;
mod simplex;

pub use bnb::{branch_and_bound, branch_and_bound_with, BranchOptions};
pub use cuts::{oa_cut, tangent_cut, ConvexConstraint, CutOutcome};
pub use lpformat::write_lp;
pub use simplex::{simplex_solve, simplex_solve_with, SimplexOptions};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Absolute primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Distance from an integer below which a value counts as integral.
pub const INT_TOL: f64 = 1e-6;
/// Minimum violation before a convex constraint produces a cut.
pub const CUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    pub name: String,
    pub coeffs: Vec<(usize, T)>,
    pub sense: RowSense,
    pub rhs: T,
}

impl<T: Scalar> Row<T> {
    pub fn activity(&self, x: &[T]) -> T {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Signed amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[T]) -> T {
        let act = self.activity(x);
        match self.sense {
            RowSense::Le => (act - self.rhs).max(T::zero()),
            RowSense::Ge => (self.rhs - act).max(T::zero()),
            RowSense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// `min/max cᵀx + c₀` subject to rows and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub sense: ObjectiveSense,
    pub objective: Vec<T>,
    pub objective_offset: T,
    pub rows: Vec<Row<T>>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub names: Vec<String>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(sense: ObjectiveSense) -> Self {
        Self {
            sense,
            objective: Vec::new(),
            objective_offset: T::zero(),
            rows: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: T, upper: T, cost: T) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(name.into());
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(usize, T)>, sense: RowSense, rhs: T) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective_offset + self.objective.iter().zip(x).map(|(&c, &v)| c * v).sum::<T>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            worst = worst.max(row.violation(x));
        }
        worst
    }

    /// Checks dimensions, bound ordering and finiteness of the data.
    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n || self.names.len() != n {
            return Err(Error::validation("variable arrays have inconsistent lengths"));
        }
        if !self.objective_offset.is_finite() {
            return Err(Error::validation("objective offset is not finite"));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(Error::validation(format!(
                    "objective coefficient of {} is not finite",
                    self.names[j]
                )));
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(Error::validation(format!("bound of {} is NaN", self.names[j])));
            }
            if self.lower[j] > self.upper[j] {
                return Err(Error::validation(format!(
                    "bounds of {} are crossed ({} > {})",
                    self.names[j], self.lower[j], self.upper[j]
                )));
            }
            if self.lower[j] == T::infinity() || self.upper[j] == T::neg_infinity() {
                return Err(Error::validation(format!("bound of {} is unattainable", self.names[j])));
            }
        }
        for row in &self.rows {
            if !row.rhs.is_finite() {
                return Err(Error::validation(format!("rhs of row {} is not finite", row.name)));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::validation(format!(
                        "row {} references variable {j} out of range",
                        row.name
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::validation(format!(
                        "coefficient in row {} is not finite",
                        row.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Linear program plus integrality mask and convex constraints that are
/// enforced lazily through outer-approximation cuts.
pub struct MilpProblem<T> {
    pub lp: LinearProgram<T>,
    pub integer: Vec<bool>,
    pub convex: Vec<Box<dyn ConvexConstraint<T>>>,
}

impl<T: Scalar> MilpProblem<T> {
    pub fn new(lp: LinearProgram<T>) -> Self {
        let n = lp.num_vars();
        Self {
            lp,
            integer: vec![false; n],
            convex: Vec::new(),
        }
    }

    /// Adds a variable, keeping the integrality mask in step.
    pub fn add_var(&mut self, name: impl Into<String>, lower: T, upper: T, cost: T, integer: bool) -> usize {
        let j = self.lp.add_var(name, lower, upper, cost);
        self.integer.push(integer);
        j
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(usize, T)>, sense: RowSense, rhs: T) -> usize {
        self.lp.add_row(name, coeffs, sense, rhs)
    }

    pub fn register_convex(&mut self, c: Box<dyn ConvexConstraint<T>>) {
        self.convex.push(c);
    }

    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        if self.integer.len() != self.lp.num_vars() {
            return Err(Error::validation(format!(
                "integrality mask has {} entries for {} variables",
                self.integer.len(),
                self.lp.num_vars()
            )));
        }
        Ok(())
    }
}

impl<T: Scalar> std::fmt::Debug for MilpProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MilpProblem")
            .field("vars", &self.lp.num_vars())
            .field("rows", &self.lp.rows.len())
            .field("integers", &self.integer.iter().filter(|&&b| b).count())
            .field("convex", &self.convex.len())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub status: Status,
    pub values: Vec<T>,
    pub objective: T,
    /// Shadow price of each row (d objective / d rhs); empty for MILPs.
    pub row_duals: Vec<T>,
    pub iterations: usize,
    pub nodes: usize,
}

impl<T: Scalar> Solution<T> {
    pub(crate) fn without_point(status: Status, iterations: usize) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: T::nan(),
            row_duals: Vec::new(),
            iterations,
            nodes: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}
