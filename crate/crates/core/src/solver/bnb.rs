use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::debug;

use super::cuts::{oa_cut, CutOutcome};
use super::simplex::{simplex_solve_with, SimplexOptions};
use super::{LinearProgram, MilpProblem, ObjectiveSense, Solution, Status, INT_TOL};
use crate::error::Result;
use crate::num::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct BranchOptions {
    pub node_limit: usize,
    /// Outer-approximation rounds allowed per node LP.
    pub cut_rounds: usize,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub simplex: SimplexOptions,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            node_limit: 100_000,
            cut_rounds: 200,
            gap_abs: 1e-9,
            gap_rel: 1e-9,
            simplex: SimplexOptions::default(),
        }
    }
}

struct Node<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    /// Parent relaxation value in minimisation form.
    bound: f64,
    depth: usize,
    id: usize,
}

impl<T> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Node<T> {}

impl<T> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Node<T> {
    // max-heap: smallest bound first, then deepest, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

enum NodeLp<T> {
    Optimal(Solution<T>),
    Infeasible,
    Unbounded,
    Limit,
}

pub fn branch_and_bound<T: Scalar>(milp: &MilpProblem<T>) -> Result<Solution<T>> {
    branch_and_bound_with(milp, &BranchOptions::default())
}

/// Best-bound branch and bound with most-fractional branching. Convex
/// constraints registered on the problem are separated at every node LP
/// optimum; their cuts are globally valid and kept for the rest of the
/// search.
pub fn branch_and_bound_with<T: Scalar>(milp: &MilpProblem<T>, opts: &BranchOptions) -> Result<Solution<T>> {
    milp.validate()?;
    let sign = match milp.lp.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let mut work = milp.lp.clone();
    let mut iterations = 0usize;
    let mut incumbent: Option<(Vec<T>, f64)> = None;
    let mut root_duals: Option<Vec<T>> = None;
    let mut nodes = 0usize;
    let mut next_id = 1usize;

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        lower: milp.lp.lower.clone(),
        upper: milp.lp.upper.clone(),
        bound: f64::NEG_INFINITY,
        depth: 0,
        id: 0,
    });

    while let Some(node) = heap.pop() {
        if let Some((_, best)) = &incumbent {
            if node.bound >= best - gap(opts, *best) {
                continue;
            }
        }
        if nodes >= opts.node_limit {
            debug!("node limit {} reached", opts.node_limit);
            return Ok(finish(milp, incumbent, Status::IterationLimit, iterations, nodes));
        }
        nodes += 1;
        work.lower.clone_from(&node.lower);
        work.upper.clone_from(&node.upper);
        let sol = match solve_node(milp, &mut work, opts, &mut iterations)? {
            NodeLp::Optimal(sol) => sol,
            NodeLp::Infeasible => continue,
            NodeLp::Unbounded => {
                if node.id == 0 {
                    return Ok(Solution::without_point(Status::Unbounded, iterations));
                }
                continue;
            }
            NodeLp::Limit => {
                return Ok(finish(milp, incumbent, Status::IterationLimit, iterations, nodes));
            }
        };
        let value = sign * sol.objective.as_f64();
        if let Some((_, best)) = &incumbent {
            if value >= best - gap(opts, *best) {
                continue;
            }
        }

        match most_fractional(&milp.integer, &sol.values) {
            None => {
                if node.id == 0 {
                    root_duals = Some(sol.row_duals.clone());
                }
                incumbent = Some((sol.values, value));
            }
            Some(j) => {
                let v = sol.values[j];
                let mut down = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    bound: value,
                    depth: node.depth + 1,
                    id: next_id,
                };
                down.upper[j] = v.floor();
                let mut up = Node {
                    lower: node.lower,
                    upper: node.upper,
                    bound: value,
                    depth: node.depth + 1,
                    id: next_id + 1,
                };
                up.lower[j] = v.ceil();
                next_id += 2;
                heap.push(down);
                heap.push(up);
            }
        }
    }

    let status = if incumbent.is_some() {
        Status::Optimal
    } else {
        Status::Infeasible
    };
    let mut out = finish(milp, incumbent, status, iterations, nodes);
    if nodes == 1 {
        if let Some(duals) = root_duals {
            // integral root: report the LP answer unchanged, duals included
            out.row_duals = duals.into_iter().take(milp.lp.rows.len()).collect();
        }
    }
    Ok(out)
}

fn gap(opts: &BranchOptions, best: f64) -> f64 {
    opts.gap_abs.max(opts.gap_rel * best.abs())
}

fn solve_node<T: Scalar>(
    milp: &MilpProblem<T>,
    work: &mut LinearProgram<T>,
    opts: &BranchOptions,
    iterations: &mut usize,
) -> Result<NodeLp<T>> {
    let mut rounds = 0usize;
    loop {
        let sol = simplex_solve_with(work, &opts.simplex)?;
        *iterations += sol.iterations;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => return Ok(NodeLp::Infeasible),
            Status::Unbounded => return Ok(NodeLp::Unbounded),
            Status::IterationLimit => return Ok(NodeLp::Limit),
        }
        if milp.convex.is_empty() || rounds >= opts.cut_rounds {
            return Ok(NodeLp::Optimal(sol));
        }
        let mut added = 0usize;
        for c in &milp.convex {
            if let CutOutcome::Cut(row) = oa_cut(c.as_ref(), &sol.values) {
                work.rows.push(row);
                added += 1;
            }
        }
        if added == 0 {
            return Ok(NodeLp::Optimal(sol));
        }
        rounds += 1;
    }
}

/// Index of the integer variable farthest from integrality; ties go to
/// the lowest index.
fn most_fractional<T: Scalar>(integer: &[bool], x: &[T]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (&is_int, &v)) in integer.iter().zip(x).enumerate() {
        if !is_int {
            continue;
        }
        let v = v.as_f64();
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist > INT_TOL && best.is_none_or(|(_, d)| dist > d) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

fn finish<T: Scalar>(
    milp: &MilpProblem<T>,
    incumbent: Option<(Vec<T>, f64)>,
    status: Status,
    iterations: usize,
    nodes: usize,
) -> Solution<T> {
    match incumbent {
        Some((mut values, _)) => {
            for (v, &is_int) in values.iter_mut().zip(&milp.integer) {
                if is_int {
                    *v = v.round();
                }
            }
            let objective = milp.lp.objective_value(&values);
            Solution {
                status,
                values,
                objective,
                row_duals: Vec::new(),
                iterations,
                nodes,
            }
        }
        None => {
            let mut s = Solution::without_point(status, iterations);
            s.nodes = nodes;
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{simplex_solve, RowSense};

    #[test]
    fn integral_relaxation_matches_simplex() {
        let mut lp = LinearProgram::new(ObjectiveSense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY, 3.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 2.0);
        lp.add_row("c1", vec![(x, 1.0), (y, 1.0)], RowSense::Le, 4.0);
        lp.add_row("c2", vec![(x, 1.0), (y, 3.0)], RowSense::Le, 6.0);
        let lp_sol = simplex_solve(&lp).unwrap();
        let mut milp = MilpProblem::new(lp);
        milp.integer = vec![true, true];
        let sol = branch_and_bound(&milp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.values, lp_sol.values);
        assert_eq!(sol.objective, lp_sol.objective);
        assert_eq!(sol.row_duals, lp_sol.row_duals);
    }

    #[test]
    fn fractional_window_is_infeasible() {
        let mut milp = MilpProblem::new(LinearProgram::new(ObjectiveSense::Minimize));
        let x = milp.add_var("x", 0.0, 1.0, 1.0, true);
        milp.add_row("lo", vec![(x, 1.0)], RowSense::Ge, 0.4);
        milp.add_row("hi", vec![(x, 1.0)], RowSense::Le, 0.6);
        assert_eq!(branch_and_bound(&milp).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn small_knapsack() {
        // capacity 6 admits {1,2} worth 20; {0,2} is only 17
        let mut milp = MilpProblem::new(LinearProgram::new(ObjectiveSense::Maximize));
        let v = [10.0, 13.0, 7.0];
        let w = [3.0, 4.0, 2.0];
        let xs: Vec<usize> = (0..3)
            .map(|i| milp.add_var(format!("x{i}"), 0.0, 1.0, v[i], true))
            .collect();
        milp.add_row("cap", xs.iter().map(|&j| (j, w[j])).collect(), RowSense::Le, 6.0);
        let sol = branch_and_bound(&milp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.objective, 20.0);
        assert_eq!(sol.values, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn node_limit_reports_iteration_limit() {
        let mut milp = MilpProblem::new(LinearProgram::new(ObjectiveSense::Maximize));
        let xs: Vec<usize> = (0..8)
            .map(|i| milp.add_var(format!("x{i}"), 0.0, 1.0, 1.0 + i as f64 * 0.1, true))
            .collect();
        milp.add_row("cap", xs.iter().map(|&j| (j, 2.0)).collect(), RowSense::Le, 7.0);
        let opts = BranchOptions {
            node_limit: 1,
            ..BranchOptions::default()
        };
        let sol = branch_and_bound_with(&milp, &opts).unwrap();
        assert_eq!(sol.status, Status::IterationLimit);
    }
}
