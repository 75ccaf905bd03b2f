//! Sequential convex programming over the coupled power and gas model.

use log::{debug, warn};

use super::uc::{build_com, extract, gas_residuals, GasLinearisation, UcModel};
use super::{ComInstance, DispatchResult, DispatchStatus, GasSystem, SystemFile};
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::solver::{branch_and_bound_with, BranchOptions, Solution, Status};

#[derive(Debug, Clone, Copy)]
pub struct ScpOptions {
    /// Normalised Weymouth residual and blend mismatch accepted at convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// Step towards the new linearisation point after an oscillating step.
    pub damping: f64,
    /// Initial cost per unit of normalised Weymouth slack, grown each pass.
    pub penalty: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub branch: BranchOptions,
}

impl Default for ScpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 30,
            damping: 0.5,
            penalty: 1e4,
            penalty_growth: 10.0,
            penalty_max: 1e9,
            branch: BranchOptions::default(),
        }
    }
}

fn solve<T: Scalar>(model: &UcModel<T>, opts: &ScpOptions) -> Result<Solution<T>> {
    let sol = branch_and_bound_with(&model.milp, &opts.branch)?;
    if sol.status == Status::Unbounded {
        return Err(Error::Build("dispatch model is unbounded".into()));
    }
    Ok(sol)
}

fn unsolved<T: Scalar>(inst: &ComInstance<T>, status: DispatchStatus, iterations: usize) -> DispatchResult<T> {
    DispatchResult {
        day: inst.day.name.clone(),
        status: Some(status),
        hours: inst.hours(),
        iterations,
        ..DispatchResult::default()
    }
}

/// Solves one representative day.
///
/// A first mixed-integer pass without pressures fixes commitment, flow
/// directions and blend estimates. Each following pass solves the convex
/// model with Weymouth cones (cut-separated), the concave side linearised
/// with a penalised slack and McCormick envelopes on shrinking fraction
/// boxes, then moves the linearisation points to the new solution.
pub fn sequential_convex_solve<T: Scalar>(inst: &ComInstance<T>, opts: &ScpOptions) -> Result<DispatchResult<T>> {
    let hours = inst.hours();
    let model = build_com(inst, hours, None)?;
    let sol = solve(&model, opts)?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(unsolved(inst, DispatchStatus::Infeasible, 0)),
        _ => return Ok(unsolved(inst, DispatchStatus::IterationLimit, 0)),
    }
    let mut result = extract(inst, &model, &sol.values);
    let Some(gs) = &inst.gas else {
        result.status = Some(DispatchStatus::Converged);
        result.iterations = 1;
        return Ok(result);
    };

    let integer = model.milp.integer.clone();
    let mut fixed = sol.values.clone();
    let cap = gs.region.h2_fraction_cap;
    let np = gs.pipelines.len();
    let nn = gs.nodes.len();
    let mut directions = vec![vec![1i8; hours]; np];
    let mut points = vec![vec![T::zero(); hours]; np];
    let mut trust = cap;
    let mut penalty = opts.penalty;
    let mut last_residual = f64::INFINITY;
    let tol = T::lit(opts.tol);

    for iter in 1..=opts.max_iter {
        for p in 0..np {
            for t in 0..hours {
                let f = result.gas_flow[p][t];
                if f > T::zero() {
                    directions[p][t] = 1;
                } else if f < T::zero() {
                    directions[p][t] = -1;
                }
                let target = f.abs();
                points[p][t] = if iter > 1 && last_residual.is_finite() && result.max_residual.as_f64() > last_residual
                {
                    points[p][t] + T::lit(opts.damping) * (target - points[p][t])
                } else {
                    target
                };
            }
        }
        let centre = mixed_fractions(gs, &result);
        if iter > 1 {
            last_residual = result.max_residual.as_f64();
        }
        let (model, sol) = loop {
            let lin = GasLinearisation {
                directions: Some(directions.clone()),
                flow_points: points.clone(),
                fraction_lo: (0..nn)
                    .map(|n| (0..hours).map(|t| centre[n][t] - trust).collect())
                    .collect(),
                fraction_hi: (0..nn)
                    .map(|n| (0..hours).map(|t| centre[n][t] + trust).collect())
                    .collect(),
                penalty: T::lit(penalty),
            };
            let mut model = build_com(inst, hours, Some(&lin))?;
            let (lower, upper) = (model.milp.lp.lower.clone(), model.milp.lp.upper.clone());
            for (j, &is_int) in integer.iter().enumerate() {
                if is_int {
                    let v = fixed[j].round();
                    model.milp.lp.lower[j] = v;
                    model.milp.lp.upper[j] = v;
                }
            }
            let mut sol = solve(&model, opts)?;
            if sol.status == Status::Infeasible {
                debug!(
                    "day {}: pass {iter} infeasible with fixed commitment, reopening",
                    inst.day.name
                );
                for (j, &is_int) in integer.iter().enumerate() {
                    if is_int {
                        model.milp.lp.lower[j] = lower[j];
                        model.milp.lp.upper[j] = upper[j];
                    }
                }
                sol = solve(&model, opts)?;
            }
            if sol.status == Status::Infeasible && trust < cap {
                // the blend box excluded every consistent point; widen it
                trust = (trust * T::lit(4.0)).max(T::lit(1e-3)).min(cap);
                debug!("day {}: pass {iter} widening blend box to {trust}", inst.day.name);
                continue;
            }
            break (model, sol);
        };
        if sol.status != Status::Optimal {
            if iter == 1 && sol.status == Status::Infeasible {
                return Ok(unsolved(inst, DispatchStatus::Infeasible, iter));
            }
            warn!("day {}: pass {iter} ended with {:?}", inst.day.name, sol.status);
            result.status = Some(DispatchStatus::IterationLimit);
            return Ok(result);
        }
        fixed.clone_from(&sol.values);
        let mut next = extract(inst, &model, &sol.values);
        let (weymouth, blend) = gas_residuals(inst, &model, &sol.values, &next);
        next.max_residual = weymouth;
        next.max_blend_residual = blend;
        next.iterations = iter;
        debug!(
            "day {}: pass {iter} cost {} weymouth {} blend {}",
            inst.day.name, next.cost, weymouth, blend
        );
        if weymouth <= tol && blend <= tol {
            next.status = Some(DispatchStatus::Converged);
            return Ok(next);
        }
        trust = (trust * T::lit(0.5)).min(blend * T::lit(10.0)).max(T::lit(1e-9));
        penalty = (penalty * opts.penalty_growth).min(opts.penalty_max);
        result = next;
    }
    warn!("day {}: no convergence in {} passes", inst.day.name, opts.max_iter);
    result.status = Some(DispatchStatus::IterationLimit);
    Ok(result)
}

/// Node fractions implied by mixing the previous pass's flows: each node
/// takes the inflow composition, with arcs carrying their source node's
/// fraction rather than the (relaxed) species split of the pass.
fn mixed_fractions<T: Scalar>(gs: &GasSystem<T>, r: &DispatchResult<T>) -> Vec<Vec<T>> {
    let nn = gs.nodes.len();
    let mut x = r.blend.clone();
    let tiny = T::lit(1e-9);
    for t in 0..r.hours {
        // local sources: node inflow minus what arrived through pipes
        let mut local = (0..nn).map(|n| r.node_inflow[n][t]).collect::<Vec<_>>();
        let mut arcs = Vec::new();
        for (p, pipe) in gs.pipelines.iter().enumerate() {
            let (f, h) = (r.gas_flow[p][t], r.gas_flow_h2[p][t]);
            let (src, dst) = if f >= T::zero() {
                (pipe.from, pipe.to)
            } else {
                (pipe.to, pipe.from)
            };
            let (f, h) = (f.abs(), h.abs());
            if f > tiny {
                local[dst].0 -= h;
                local[dst].1 -= f - h;
                arcs.push((src, dst, f));
            }
        }
        for _ in 0..=nn {
            for n in 0..nn {
                let (mut h, mut c) = (local[n].0.max(T::zero()), local[n].1.max(T::zero()));
                for &(src, _, f) in arcs.iter().filter(|a| a.1 == n) {
                    h += x[src][t] * f;
                    c += (T::one() - x[src][t]) * f;
                }
                if h + c > tiny {
                    x[n][t] = h / (h + c);
                }
            }
        }
    }
    x
}

/// Solves every representative day of a system, one thread per day.
pub fn dispatch_days<T: Scalar>(system: &SystemFile<T>, opts: &ScpOptions) -> Result<Vec<DispatchResult<T>>> {
    let instances = system.instances();
    std::thread::scope(|s| {
        let handles: Vec<_> = instances
            .iter()
            .map(|inst| s.spawn(move || sequential_convex_solve(inst, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Build("dispatch worker panicked".into())))
            })
            .collect()
    })
}
