//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every row `i` gets a slack `s_i` with `A_i x + s_i = b_i`; the slack
//! bounds encode the row sense. Rows whose slack cannot absorb the initial
//! residual receive an artificial column and are repaired in phase one.
//! The slack block of the tableau always equals `B⁻¹`, which is used for
//! periodic recomputation of the basic values and for the row duals.

use super::{LinearProgram, ObjectiveSense, RowSense, Solution, Status, FEAS_TOL};
use crate::error::Result;
use crate::num::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub pivot_tol: f64,
    pub optimality_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
    /// Basic values and reduced costs are recomputed from `B⁻¹` this often.
    pub refresh_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            pivot_tol: 1e-9,
            optimality_tol: 1e-9,
            degenerate_limit: 50,
            refresh_every: 64,
        }
    }
}

pub fn simplex_solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<Solution<T>> {
    simplex_solve_with(lp, &SimplexOptions::default())
}

pub fn simplex_solve_with<T: Scalar>(lp: &LinearProgram<T>, opts: &SimplexOptions) -> Result<Solution<T>> {
    lp.validate()?;
    let mut tab = Tableau::build(lp, opts);

    if tab.num_art > 0 {
        let phase1: Vec<T> = (0..tab.ncols)
            .map(|j| if j >= tab.art_start { T::one() } else { T::zero() })
            .collect();
        tab.set_costs(phase1);
        match tab.run() {
            Outcome::Optimal => {}
            // the phase one objective is bounded below by zero
            Outcome::Unbounded => {}
            Outcome::IterationLimit => {
                return Ok(Solution::without_point(Status::IterationLimit, tab.iterations));
            }
        }
        tab.refresh();
        let infeas: T = (tab.art_start..tab.ncols).map(|j| tab.x[j]).sum();
        let scale = T::one() + tab.b_scale;
        if infeas > T::lit(FEAS_TOL) * scale {
            return Ok(Solution::without_point(Status::Infeasible, tab.iterations));
        }
        tab.retire_artificials();
    }

    let sign = match lp.sense {
        ObjectiveSense::Minimize => T::one(),
        ObjectiveSense::Maximize => -T::one(),
    };
    let mut phase2 = vec![T::zero(); tab.ncols];
    for (j, &c) in lp.objective.iter().enumerate() {
        phase2[j] = sign * c;
    }
    tab.set_costs(phase2);
    let mut outcome = tab.run();
    // one cleanup pass from freshly recomputed values
    if outcome == Outcome::Optimal {
        tab.refresh();
        tab.clamp_basics();
        outcome = tab.run();
    }
    let total_iters = tab.iterations;
    match outcome {
        Outcome::Optimal => {}
        Outcome::Unbounded => {
            return Ok(Solution::without_point(Status::Unbounded, total_iters));
        }
        Outcome::IterationLimit => {
            return Ok(Solution::without_point(Status::IterationLimit, total_iters));
        }
    }

    let values: Vec<T> = tab.x[..tab.n].to_vec();
    let objective = lp.objective_value(&values);
    let y = tab.duals();
    let row_duals = y.into_iter().map(|v| sign * v).collect();
    Ok(Solution {
        status: Status::Optimal,
        values,
        objective,
        row_duals,
        iterations: total_iters,
        nodes: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Basic,
    Lower,
    Upper,
    /// Free variable parked at zero.
    Zero,
}

struct Tableau<T> {
    m: usize,
    n: usize,
    ncols: usize,
    art_start: usize,
    num_art: usize,
    /// Row-major `m × ncols`.
    a: Vec<T>,
    lo: Vec<T>,
    up: Vec<T>,
    x: Vec<T>,
    place: Vec<Place>,
    basis: Vec<usize>,
    cost: Vec<T>,
    d: Vec<T>,
    /// Original sparse structural columns.
    cols: Vec<Vec<(usize, T)>>,
    art_row: Vec<usize>,
    art_sign: Vec<T>,
    b: Vec<T>,
    b_scale: T,
    opts: SimplexOptions,
    iterations: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>, opts: &SimplexOptions) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars();
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != T::zero() {
                    cols[j].push((i, a));
                }
            }
        }
        // merge duplicate entries so the dense and sparse views agree
        for col in cols.iter_mut() {
            col.sort_by_key(|&(i, _)| i);
            col.dedup_by(|next, prev| {
                if next.0 == prev.0 {
                    prev.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }

        let mut x = vec![T::zero(); n];
        let mut place = vec![Place::Zero; n];
        for j in 0..n {
            let (lo, up) = (lp.lower[j], lp.upper[j]);
            if lo.is_finite() {
                x[j] = lo;
                place[j] = Place::Lower;
            } else if up.is_finite() {
                x[j] = up;
                place[j] = Place::Upper;
            }
        }

        let b: Vec<T> = lp.rows.iter().map(|r| r.rhs).collect();
        let b_scale = b.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let mut residual = b.clone();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != T::zero() {
                for &(i, a) in col {
                    residual[i] -= a * x[j];
                }
            }
        }

        let tol = T::lit(FEAS_TOL);
        let mut art_row = Vec::new();
        let mut art_sign = Vec::new();
        let mut slack_basic = vec![true; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let r = residual[i];
            let ok = match row.sense {
                RowSense::Le => r >= -tol,
                RowSense::Ge => r <= tol,
                RowSense::Eq => r.abs() <= tol,
            };
            if !ok {
                slack_basic[i] = false;
                art_row.push(i);
                art_sign.push(if r >= T::zero() { T::one() } else { -T::one() });
            }
        }
        let num_art = art_row.len();
        let art_start = n + m;
        let ncols = n + m + num_art;

        let mut lo = Vec::with_capacity(ncols);
        let mut up = Vec::with_capacity(ncols);
        lo.extend_from_slice(&lp.lower);
        up.extend_from_slice(&lp.upper);
        for row in &lp.rows {
            let (l, u) = match row.sense {
                RowSense::Le => (T::zero(), T::infinity()),
                RowSense::Ge => (T::neg_infinity(), T::zero()),
                RowSense::Eq => (T::zero(), T::zero()),
            };
            lo.push(l);
            up.push(u);
        }
        for _ in 0..num_art {
            lo.push(T::zero());
            up.push(T::infinity());
        }

        let mut xs = x;
        xs.resize(ncols, T::zero());
        place.resize(ncols, Place::Lower);

        let mut a = vec![T::zero(); m * ncols];
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                a[i * ncols + j] = v;
            }
        }
        for i in 0..m {
            a[i * ncols + n + i] = T::one();
        }
        let mut basis = vec![0; m];
        let mut k_of_row = vec![usize::MAX; m];
        for (k, &i) in art_row.iter().enumerate() {
            k_of_row[i] = k;
        }
        for i in 0..m {
            if slack_basic[i] {
                basis[i] = n + i;
                place[n + i] = Place::Basic;
                xs[n + i] = residual[i];
            } else {
                let k = k_of_row[i];
                let s = art_sign[k];
                // row i is scaled by the artificial sign so the basic entry is +1
                let row = &mut a[i * ncols..(i + 1) * ncols];
                for v in row.iter_mut() {
                    *v *= s;
                }
                row[art_start + k] = T::one();
                basis[i] = art_start + k;
                place[art_start + k] = Place::Basic;
                xs[art_start + k] = residual[i].abs();
                // slack parks at its only finite bound, zero
                place[n + i] = if lo[n + i].is_finite() {
                    Place::Lower
                } else {
                    Place::Upper
                };
                xs[n + i] = T::zero();
            }
        }

        Self {
            m,
            n,
            ncols,
            art_start,
            num_art,
            a,
            lo,
            up,
            x: xs,
            place,
            basis,
            cost: vec![T::zero(); ncols],
            d: vec![T::zero(); ncols],
            cols,
            art_row,
            art_sign,
            b,
            b_scale,
            opts: *opts,
            iterations: 0,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.a[i * self.ncols + j]
    }

    fn set_costs(&mut self, cost: Vec<T>) {
        self.cost = cost;
        self.recompute_reduced_costs();
    }

    /// `y = c_Bᵀ B⁻¹`, read off the slack block.
    fn duals(&self) -> Vec<T> {
        let mut y = vec![T::zero(); self.m];
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb == T::zero() {
                continue;
            }
            let row = &self.a[i * self.ncols + self.n..i * self.ncols + self.n + self.m];
            for (k, &v) in row.iter().enumerate() {
                y[k] += cb * v;
            }
        }
        y
    }

    fn recompute_reduced_costs(&mut self) {
        let y = self.duals();
        for j in 0..self.ncols {
            if self.place[j] == Place::Basic {
                self.d[j] = T::zero();
                continue;
            }
            let ya = if j < self.n {
                self.cols[j].iter().map(|&(i, a)| y[i] * a).sum()
            } else if j < self.art_start {
                y[j - self.n]
            } else {
                let k = j - self.art_start;
                y[self.art_row[k]] * self.art_sign[k]
            };
            self.d[j] = self.cost[j] - ya;
        }
    }

    /// Recomputes basic values as `B⁻¹ (b − N x_N)` and the reduced costs.
    fn refresh(&mut self) {
        let mut r = self.b.clone();
        for j in 0..self.ncols {
            if self.place[j] == Place::Basic {
                continue;
            }
            let v = self.x[j];
            if v == T::zero() {
                continue;
            }
            if j < self.n {
                for &(i, a) in &self.cols[j] {
                    r[i] -= a * v;
                }
            } else if j < self.art_start {
                r[j - self.n] -= v;
            } else {
                let k = j - self.art_start;
                r[self.art_row[k]] -= self.art_sign[k] * v;
            }
        }
        for i in 0..self.m {
            let row = &self.a[i * self.ncols + self.n..i * self.ncols + self.n + self.m];
            let v: T = row.iter().zip(&r).map(|(&bi, &ri)| bi * ri).sum();
            self.x[self.basis[i]] = v;
        }
        self.recompute_reduced_costs();
    }

    /// Snaps basic values that drifted marginally outside their bounds.
    fn clamp_basics(&mut self) {
        let tol = T::lit(FEAS_TOL);
        for i in 0..self.m {
            let j = self.basis[i];
            let v = self.x[j];
            if v < self.lo[j] && v > self.lo[j] - tol {
                self.x[j] = self.lo[j];
            } else if v > self.up[j] && v < self.up[j] + tol {
                self.x[j] = self.up[j];
            }
        }
    }

    /// Fixes artificials at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        for j in self.art_start..self.ncols {
            self.up[j] = T::zero();
            if self.place[j] != Place::Basic {
                self.x[j] = T::zero();
                self.place[j] = Place::Lower;
            }
        }
        let tol = T::lit(1e-7);
        for r in 0..self.m {
            let bj = self.basis[r];
            if bj < self.art_start {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for j in 0..self.art_start {
                if self.place[j] == Place::Basic {
                    continue;
                }
                let v = self.at(r, j).abs();
                if v > tol && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            if let Some((q, _)) = best {
                // degenerate exchange; entering keeps its current value
                self.pivot(r, q);
                self.x[bj] = T::zero();
                self.place[bj] = Place::Lower;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.a[r * nc + q];
        let inv = T::one() / piv;
        for v in self.a[r * nc..(r + 1) * nc].iter_mut() {
            *v *= inv;
        }
        let pivot_row: Vec<T> = self.a[r * nc..(r + 1) * nc].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * nc + q];
            if f == T::zero() {
                continue;
            }
            let row = &mut self.a[i * nc..(i + 1) * nc];
            for (v, &p) in row.iter_mut().zip(&pivot_row) {
                if p != T::zero() {
                    *v -= f * p;
                }
            }
            row[q] = T::zero();
        }
        let f = self.d[q];
        if f != T::zero() {
            for (v, &p) in self.d.iter_mut().zip(&pivot_row) {
                if p != T::zero() {
                    *v -= f * p;
                }
            }
            self.d[q] = T::zero();
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.place[q] = Place::Basic;
        // caller fixes the leaving variable's place
        if self.place[leaving] == Place::Basic {
            self.place[leaving] = Place::Lower;
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, T)> {
        let tol =
            T::lit(self.opts.optimality_tol) * (T::one() + self.cost.iter().fold(T::zero(), |a, c| a.max(c.abs())));
        let mut best: Option<(usize, T, T)> = None;
        for j in 0..self.ncols {
            if self.lo[j] == self.up[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = match self.place[j] {
                Place::Basic => continue,
                Place::Lower if dj < -tol => T::one(),
                Place::Upper if dj > tol => -T::one(),
                Place::Zero if dj.abs() > tol => -dj.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = dj.abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn run(&mut self) -> Outcome {
        let ptol = T::lit(self.opts.pivot_tol);
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut since_refresh = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Outcome::IterationLimit;
            }
            let Some((q, dir)) = self.choose_entering(bland) else {
                return Outcome::Optimal;
            };
            self.iterations += 1;

            // ratio test: basic i moves at rate -dir * a[i][q]
            let mut theta = T::infinity();
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = T::zero();
            let span = self.up[q] - self.lo[q];
            if span.is_finite() {
                theta = span;
            }
            for i in 0..self.m {
                let alpha = self.at(i, q);
                if alpha.abs() <= ptol {
                    continue;
                }
                let rate = -dir * alpha;
                let bj = self.basis[i];
                let (limit, to_upper) = if rate < T::zero() {
                    if !self.lo[bj].is_finite() {
                        continue;
                    }
                    (((self.x[bj] - self.lo[bj]) / -rate).max(T::zero()), false)
                } else {
                    if !self.up[bj].is_finite() {
                        continue;
                    }
                    (((self.up[bj] - self.x[bj]) / rate).max(T::zero()), true)
                };
                let better = match leave {
                    None => limit < theta,
                    Some((li, _)) => {
                        let eps = T::lit(1e-12) * (T::one() + theta.abs());
                        if limit < theta - eps {
                            true
                        } else if limit <= theta + eps {
                            if bland {
                                bj < self.basis[li]
                            } else {
                                alpha.abs() > leave_alpha
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = limit;
                    leave = Some((i, to_upper));
                    leave_alpha = alpha.abs();
                }
            }

            if !theta.is_finite() {
                return Outcome::Unbounded;
            }
            if theta <= T::lit(1e-12) {
                degenerate += 1;
                if degenerate > self.opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            let step = dir * theta;
            if step != T::zero() {
                for i in 0..self.m {
                    let alpha = self.at(i, q);
                    if alpha != T::zero() {
                        let bj = self.basis[i];
                        self.x[bj] -= alpha * step;
                    }
                }
                self.x[q] += step;
            }

            match leave {
                None => {
                    // bound flip of the entering variable
                    if dir > T::zero() {
                        self.x[q] = self.up[q];
                        self.place[q] = Place::Upper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.place[q] = Place::Lower;
                    }
                }
                Some((r, to_upper)) => {
                    let leaving = self.basis[r];
                    self.pivot(r, q);
                    if to_upper {
                        self.x[leaving] = self.up[leaving];
                        self.place[leaving] = Place::Upper;
                    } else {
                        self.x[leaving] = self.lo[leaving];
                        self.place[leaving] = Place::Lower;
                    }
                }
            }

            since_refresh += 1;
            if since_refresh >= self.opts.refresh_every {
                since_refresh = 0;
                self.refresh();
            }
        }
    }
}
