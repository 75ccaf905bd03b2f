//! Mixed-integer model of one representative day.

use super::gas::{mccormick, soc_relax, GasConstants, Species};
use super::{ComInstance, DispatchResult, GenType};
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::solver::{LinearProgram, MilpProblem, ObjectiveSense, RowSense};

/// Linearisation state of the gas network for one convex subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct GasLinearisation<T> {
    /// Flow direction per pipeline and hour (+1 from→to, −1 reverse).
    /// `None` leaves both directions open and omits pressures.
    pub directions: Option<Vec<Vec<i8>>>,
    /// Flow magnitude the concave half of the Weymouth equation is
    /// linearised at, `[p][t]`.
    pub flow_points: Vec<Vec<T>>,
    /// Trust region for each node's hydrogen fraction, `[n][t]`.
    pub fraction_lo: Vec<Vec<T>>,
    pub fraction_hi: Vec<Vec<T>>,
    /// Cost per unit of normalised Weymouth slack.
    pub penalty: T,
}

impl<T: Scalar> GasLinearisation<T> {
    /// Both directions open, no pressures, full fraction box.
    pub fn loose(inst: &ComInstance<T>, horizon: usize) -> Self {
        let (np, nn, cap) = match &inst.gas {
            Some(g) => (g.pipelines.len(), g.nodes.len(), g.region.h2_fraction_cap),
            None => (0, 0, T::zero()),
        };
        Self {
            directions: None,
            flow_points: vec![vec![T::zero(); horizon]; np],
            fraction_lo: vec![vec![T::zero(); horizon]; nn],
            fraction_hi: vec![vec![cap; horizon]; nn],
            penalty: T::zero(),
        }
    }
}

/// Species flows on one directed arc of a pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub dir: i8,
    pub h2: usize,
    pub ch4: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GasIndex {
    pub supply: Vec<Vec<usize>>,
    /// Consumption `[n][t]` as (hydrogen, methane).
    pub consumption: Vec<Vec<(usize, usize)>>,
    pub arcs: Vec<Vec<Vec<Arc>>>,
    pub pressure_sq: Vec<Vec<Option<usize>>>,
    pub slack: Vec<Vec<Option<usize>>>,
    pub fraction: Vec<Vec<usize>>,
    pub injection: Vec<Vec<usize>>,
    pub store: Vec<Vec<Option<(usize, usize)>>>,
}

/// Variable positions of a built model, `[unit][hour]` unless noted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UcIndex {
    pub hours: usize,
    pub p: Vec<Vec<usize>>,
    pub u: Vec<Vec<Option<usize>>>,
    pub v: Vec<Vec<Option<usize>>>,
    pub w: Vec<Vec<Option<usize>>>,
    pub export: Vec<Vec<Option<usize>>>,
    pub elec_inject: Vec<Vec<Option<usize>>>,
    pub elec_export: Vec<Vec<Option<usize>>>,
    /// `[bus][hour]`
    pub theta: Vec<Vec<usize>>,
    /// `[line][hour]`
    pub flow: Vec<Vec<usize>>,
    pub gas: Option<GasIndex>,
}

pub struct UcModel<T> {
    pub milp: MilpProblem<T>,
    pub index: UcIndex,
}

/// Unit commitment with the gas network in its loosest linear form.
pub fn build_uc<T: Scalar>(inst: &ComInstance<T>, horizon: usize) -> Result<MilpProblem<T>> {
    Ok(build_com(inst, horizon, None)?.milp)
}

pub fn build_com<T: Scalar>(
    inst: &ComInstance<T>,
    horizon: usize,
    lin: Option<&GasLinearisation<T>>,
) -> Result<UcModel<T>> {
    inst.validate()?;
    if horizon == 0 || horizon > inst.hours() {
        return Err(Error::Build(format!(
            "horizon {horizon} outside the {} hours of day {}",
            inst.hours(),
            inst.day.name
        )));
    }
    let loose;
    let lin = match lin {
        Some(l) => l,
        None => {
            loose = GasLinearisation::loose(inst, horizon);
            &loose
        }
    };
    let mut b = Builder {
        inst,
        hours: horizon,
        m: MilpProblem::new(LinearProgram::new(ObjectiveSense::Minimize)),
        ix: UcIndex {
            hours: horizon,
            ..UcIndex::default()
        },
    };
    b.generators();
    b.network()?;
    b.system_rows();
    b.gas(lin)?;
    Ok(UcModel { milp: b.m, index: b.ix })
}

struct Builder<'a, T: Scalar> {
    inst: &'a ComInstance<T>,
    hours: usize,
    m: MilpProblem<T>,
    ix: UcIndex,
}

impl<T: Scalar> Builder<'_, T> {
    fn var(&mut self, name: String, lo: T, hi: T, cost: T) -> usize {
        self.m.add_var(name, lo, hi, cost, false)
    }

    fn generators(&mut self) {
        let inst = self.inst;
        let pol = &inst.policy;
        let eps = pol.curtailment_penalty;
        for (g, gen) in inst.power.generators.iter().enumerate() {
            let mut p_row = Vec::with_capacity(self.hours);
            let mut u_row = vec![None; self.hours];
            let mut v_row = vec![None; self.hours];
            let mut w_row = vec![None; self.hours];
            let mut x_row = vec![None; self.hours];
            let mut inj_row = vec![None; self.hours];
            let mut exp_row = vec![None; self.hours];
            for t in 0..self.hours {
                let tag = format!("{}_{t}", gen.name);
                if gen.kind.is_committable() {
                    let lo = if gen.must_run { T::one() } else { T::zero() };
                    let u = self.m.add_var(format!("u_{tag}"), lo, T::one(), gen.no_load_cost, true);
                    let v = self
                        .m
                        .add_var(format!("v_{tag}"), T::zero(), T::one(), gen.start_cost, true);
                    let w = self.var(format!("w_{tag}"), T::zero(), T::one(), T::zero());
                    let p = self.var(format!("p_{tag}"), T::zero(), gen.pmax, T::zero());
                    let mut def = vec![(p, T::one()), (u, -gen.pmin)];
                    for (s, seg) in gen.segments.iter().enumerate() {
                        let q = self.var(format!("q{s}_{tag}"), T::zero(), seg.width_mw, seg.price);
                        def.push((q, -T::one()));
                        self.m.add_row(
                            format!("seg{s}_{tag}"),
                            vec![(q, T::one()), (u, -seg.width_mw)],
                            RowSense::Le,
                            T::zero(),
                        );
                    }
                    self.m.add_row(format!("pdef_{tag}"), def, RowSense::Eq, T::zero());
                    u_row[t] = Some(u);
                    v_row[t] = Some(v);
                    w_row[t] = Some(w);
                    p_row.push(p);
                } else if gen.kind == GenType::Interconnector {
                    let p = self.var(format!("imp_{tag}"), T::zero(), gen.pmax, T::zero());
                    if !gen.segments.is_empty() {
                        let mut def = vec![(p, T::one())];
                        for (s, seg) in gen.segments.iter().enumerate() {
                            let q = self.var(format!("q{s}_{tag}"), T::zero(), seg.width_mw, seg.price);
                            def.push((q, -T::one()));
                        }
                        self.m.add_row(format!("pdef_{tag}"), def, RowSense::Eq, T::zero());
                    }
                    let x = self.var(format!("exp_{tag}"), T::zero(), gen.export_max, -gen.export_price);
                    x_row[t] = Some(x);
                    p_row.push(p);
                } else {
                    let avail = inst.availability(g, t);
                    let cost = if gen.kind.is_wind() { -eps } else { T::zero() };
                    if gen.kind.is_wind() {
                        self.m.lp.objective_offset += eps * avail;
                    }
                    let p = self.var(format!("p_{tag}"), T::zero(), avail.min(gen.pmax), cost);
                    if let Some(e) = &gen.electrolyser {
                        let inj_cap = if inst.gas.as_ref().is_some_and(|gs| !gs.injections.is_empty()) {
                            e.capacity_mw
                        } else {
                            T::zero()
                        };
                        let exp_cap = if pol.export_enabled { e.capacity_mw } else { T::zero() };
                        let inj = self.var(format!("einj_{tag}"), T::zero(), inj_cap, -eps);
                        let exp = self.var(
                            format!("eexp_{tag}"),
                            T::zero(),
                            exp_cap,
                            -eps - pol.hydrogen_export_price * e.efficiency,
                        );
                        self.m.add_row(
                            format!("wind_{tag}"),
                            vec![(p, T::one()), (inj, T::one()), (exp, T::one())],
                            RowSense::Le,
                            avail,
                        );
                        self.m.add_row(
                            format!("elec_{tag}"),
                            vec![(inj, T::one()), (exp, T::one())],
                            RowSense::Le,
                            e.capacity_mw,
                        );
                        inj_row[t] = Some(inj);
                        exp_row[t] = Some(exp);
                    }
                    p_row.push(p);
                }
            }
            self.ix.p.push(p_row);
            self.ix.u.push(u_row);
            self.ix.v.push(v_row);
            self.ix.w.push(w_row);
            self.ix.export.push(x_row);
            self.ix.elec_inject.push(inj_row);
            self.ix.elec_export.push(exp_row);
            if gen.kind.is_committable() {
                self.commitment_logic(g);
            }
        }
    }

    fn commitment_logic(&mut self, g: usize) {
        let gen = &self.inst.power.generators[g];
        let init_u = if gen.initial_on { T::one() } else { T::zero() };
        let init_p = if gen.initial_on { gen.pmin } else { T::zero() };
        for t in 0..self.hours {
            let tag = format!("{}_{t}", gen.name);
            let (u, v, w, p) = (
                self.ix.u[g][t].unwrap(),
                self.ix.v[g][t].unwrap(),
                self.ix.w[g][t].unwrap(),
                self.ix.p[g][t],
            );
            // u_t − u_{t−1} = v_t − w_t
            let mut logic = vec![(u, T::one()), (v, -T::one()), (w, T::one())];
            let mut rhs = T::zero();
            if t == 0 {
                rhs = init_u;
            } else {
                logic.push((self.ix.u[g][t - 1].unwrap(), -T::one()));
            }
            self.m.add_row(format!("logic_{tag}"), logic, RowSense::Eq, rhs);

            let up_from = (t + 1).saturating_sub(gen.min_up as usize);
            let mut up: Vec<(usize, T)> = (up_from..=t).map(|k| (self.ix.v[g][k].unwrap(), T::one())).collect();
            if up.len() > 1 {
                up.push((u, -T::one()));
                self.m.add_row(format!("minup_{tag}"), up, RowSense::Le, T::zero());
            }
            let down_from = (t + 1).saturating_sub(gen.min_down as usize);
            let mut down: Vec<(usize, T)> = (down_from..=t).map(|k| (self.ix.w[g][k].unwrap(), T::one())).collect();
            if down.len() > 1 {
                down.push((u, T::one()));
                self.m.add_row(format!("mindown_{tag}"), down, RowSense::Le, T::one());
            }

            if let Some(r) = gen.ramp {
                let (prev, prev_rhs) = if t == 0 {
                    (None, init_p)
                } else {
                    (Some(self.ix.p[g][t - 1]), T::zero())
                };
                let mut upr = vec![(p, T::one()), (v, -gen.pmax)];
                let mut dnr = vec![(p, -T::one()), (w, -gen.pmax)];
                if let Some(q) = prev {
                    upr.push((q, -T::one()));
                    dnr.push((q, T::one()));
                }
                self.m.add_row(format!("rampup_{tag}"), upr, RowSense::Le, r + prev_rhs);
                self.m.add_row(format!("rampdn_{tag}"), dnr, RowSense::Le, r - prev_rhs);
            }
        }
    }

    fn network(&mut self) -> Result<()> {
        let inst = self.inst;
        let ps = &inst.power;
        let season = inst.day.season;
        for b in 0..ps.buses.len() {
            let row = (0..self.hours)
                .map(|t| {
                    let (lo, hi) = if b == 0 {
                        (T::zero(), T::zero())
                    } else {
                        (T::neg_infinity(), T::infinity())
                    };
                    self.var(format!("theta_{b}_{t}"), lo, hi, T::zero())
                })
                .collect();
            self.ix.theta.push(row);
        }
        for (l, line) in ps.lines.iter().enumerate() {
            let rating = line.rating(season);
            let susceptance = ps.base_mva / line.reactance_pu;
            let mut row = Vec::with_capacity(self.hours);
            for t in 0..self.hours {
                let f = self.var(format!("flow_{l}_{t}"), -rating, rating, T::zero());
                let (a, b) = (self.ix.theta[line.from][t], self.ix.theta[line.to][t]);
                self.m.add_row(
                    format!("dcflow_{l}_{t}"),
                    vec![(f, T::one()), (a, -susceptance), (b, susceptance)],
                    RowSense::Eq,
                    T::zero(),
                );
                row.push(f);
            }
            self.ix.flow.push(row);
        }
        for t in 0..self.hours {
            for b in 0..ps.buses.len() {
                let mut coeffs = Vec::new();
                for (g, gen) in ps.generators.iter().enumerate() {
                    if gen.bus == b {
                        coeffs.push((self.ix.p[g][t], T::one()));
                        if let Some(x) = self.ix.export[g][t] {
                            coeffs.push((x, -T::one()));
                        }
                    }
                }
                for (l, line) in ps.lines.iter().enumerate() {
                    if line.to == b {
                        coeffs.push((self.ix.flow[l][t], T::one()));
                    }
                    if line.from == b {
                        coeffs.push((self.ix.flow[l][t], -T::one()));
                    }
                }
                self.m.add_row(
                    format!("balance_{}_{t}", ps.buses[b].name),
                    coeffs,
                    RowSense::Eq,
                    inst.day.demand[b][t],
                );
            }
        }
        Ok(())
    }

    fn system_rows(&mut self) {
        let inst = self.inst;
        let pol = &inst.policy;
        let gens = &inst.power.generators;
        let committable: Vec<usize> = (0..gens.len()).filter(|&g| gens[g].kind.is_committable()).collect();
        let sync: Vec<usize> = committable.iter().copied().filter(|&g| gens[g].synchronous).collect();
        for t in 0..self.hours {
            let wind: T = (0..gens.len())
                .filter(|&g| gens[g].kind.is_wind())
                .map(|g| inst.availability(g, t))
                .sum();
            // headroom of committed units
            let headroom = |skip: Option<usize>, ix: &UcIndex| -> Vec<(usize, T)> {
                let mut c = Vec::new();
                for &g in &committable {
                    if Some(g) != skip {
                        c.push((ix.u[g][t].unwrap(), gens[g].pmax));
                        c.push((ix.p[g][t], -T::one()));
                    }
                }
                c
            };
            let need = pol.reserve_mw.max(pol.reserve_wind_fraction * wind);
            if need > T::zero() {
                let c = headroom(None, &self.ix);
                self.m.add_row(format!("reserve_{t}"), c, RowSense::Ge, need);
            }
            if pol.reserve_largest_unit {
                for &g in &committable {
                    let mut c = headroom(Some(g), &self.ix);
                    c.push((self.ix.p[g][t], -T::one()));
                    self.m
                        .add_row(format!("contingency_{}_{t}", gens[g].name), c, RowSense::Ge, T::zero());
                }
            }
            // Σ non-synchronous output − cap·exports ≤ cap·demand
            let mut c = Vec::new();
            for (g, gen) in gens.iter().enumerate() {
                if !gen.synchronous {
                    c.push((self.ix.p[g][t], T::one()));
                }
                if let Some(x) = self.ix.export[g][t] {
                    c.push((x, -pol.snsp_cap));
                }
            }
            if !c.is_empty() {
                self.m
                    .add_row(format!("snsp_{t}"), c, RowSense::Le, pol.snsp_cap * inst.bus_demand(t));
            }
            if pol.min_inertia_mws > T::zero() {
                let c = sync
                    .iter()
                    .map(|&g| (self.ix.u[g][t].unwrap(), gens[g].inertia_mws))
                    .collect();
                self.m
                    .add_row(format!("inertia_{t}"), c, RowSense::Ge, pol.min_inertia_mws);
            }
            if pol.min_synchronous_units > 0 {
                let c = sync.iter().map(|&g| (self.ix.u[g][t].unwrap(), T::one())).collect();
                self.m.add_row(
                    format!("sync_units_{t}"),
                    c,
                    RowSense::Ge,
                    T::from_usize_lossy(pol.min_synchronous_units as usize),
                );
            }
        }
    }

    fn gas(&mut self, lin: &GasLinearisation<T>) -> Result<()> {
        let inst = self.inst;
        let Some(gs) = &inst.gas else {
            return Ok(());
        };
        let table = GasConstants::bundled();
        let hhv_h: T = table.hhv(Species::H2);
        let hhv_c: T = table.hhv(Species::Ch4);
        let to_kcm_h = T::lit(3.6) / hhv_h;
        let cap = gs.region.h2_fraction_cap;
        let nn = gs.nodes.len();
        let np = gs.pipelines.len();
        let scale = gs.p_max() * gs.p_max();
        let gens = &inst.power.generators;
        if lin.flow_points.len() != np || lin.fraction_lo.len() != nn || lin.fraction_hi.len() != nn {
            return Err(Error::Build("gas linearisation does not match the network".into()));
        }
        let mut gi = GasIndex::default();

        for (n, node) in gs.nodes.iter().enumerate() {
            let mut supply = Vec::new();
            let mut cons = Vec::new();
            let mut frac = Vec::new();
            let mut pi = Vec::new();
            let mut store = Vec::new();
            for t in 0..self.hours {
                let price = node.supply_price * hhv_c / T::lit(3.6);
                supply.push(self.var(format!("gsup_{n}_{t}"), T::zero(), node.supply_max, price));
                let ch = self.var(format!("gcon_h2_{n}_{t}"), T::zero(), T::infinity(), T::zero());
                let cc = self.var(format!("gcon_ch4_{n}_{t}"), T::zero(), T::infinity(), T::zero());
                cons.push((ch, cc));
                let lo = lin.fraction_lo[n][t].max(T::zero()).min(cap);
                let hi = lin.fraction_hi[n][t].min(cap).max(lo);
                frac.push(self.var(format!("x_{n}_{t}"), lo, hi, T::zero()));
                pi.push(lin.directions.as_ref().map(|_| {
                    self.var(
                        format!("pi_{n}_{t}"),
                        node.pressure_min * node.pressure_min,
                        node.pressure_max * node.pressure_max,
                        T::zero(),
                    )
                }));
                store.push(node.linepack.as_ref().map(|lp| {
                    let sh = self.var(format!("lp_h2_{n}_{t}"), T::zero(), lp.max, T::zero());
                    let sc = self.var(format!("lp_ch4_{n}_{t}"), T::zero(), lp.max, T::zero());
                    self.m.add_row(
                        format!("lpmax_{n}_{t}"),
                        vec![(sh, T::one()), (sc, T::one())],
                        RowSense::Le,
                        lp.max,
                    );
                    self.m.add_row(
                        format!("lpmin_{n}_{t}"),
                        vec![(sh, T::one()), (sc, T::one())],
                        RowSense::Ge,
                        lp.min,
                    );
                    (sh, sc)
                }));
            }
            gi.supply.push(supply);
            gi.consumption.push(cons);
            gi.fraction.push(frac);
            gi.pressure_sq.push(pi);
            gi.store.push(store);
        }
        for (i, inj) in gs.injections.iter().enumerate() {
            let row = (0..self.hours)
                .map(|t| self.var(format!("h2inj_{i}_{t}"), T::zero(), inj.max_mw, T::zero()))
                .collect();
            gi.injection.push(row);
        }
        for (p, pipe) in gs.pipelines.iter().enumerate() {
            let mut arcs_t = Vec::new();
            let mut slack_t = Vec::new();
            for t in 0..self.hours {
                let dirs: Vec<i8> = match &lin.directions {
                    Some(d) => vec![if d[p][t] < 0 { -1 } else { 1 }],
                    None => vec![1, -1],
                };
                let arcs: Vec<Arc> = dirs
                    .iter()
                    .map(|&dir| Arc {
                        dir,
                        h2: self.var(format!("fh2_{p}_{t}_{dir}"), T::zero(), pipe.max_flow, T::zero()),
                        ch4: self.var(format!("fch4_{p}_{t}_{dir}"), T::zero(), pipe.max_flow, T::zero()),
                    })
                    .collect();
                for a in &arcs {
                    self.m.add_row(
                        format!("fmax_{p}_{t}_{}", a.dir),
                        vec![(a.h2, T::one()), (a.ch4, T::one())],
                        RowSense::Le,
                        pipe.max_flow,
                    );
                }
                let slack = if lin.directions.is_some() {
                    let a = arcs[0];
                    let (src, dst) = if a.dir > 0 {
                        (pipe.from, pipe.to)
                    } else {
                        (pipe.to, pipe.from)
                    };
                    let (pa, pb) = (gi.pressure_sq[src][t].unwrap(), gi.pressure_sq[dst][t].unwrap());
                    let terms = vec![(a.h2, T::one()), (a.ch4, T::one())];
                    self.m.register_convex(Box::new(soc_relax(
                        format!("weymouth_{p}_{t}"),
                        pipe.k,
                        terms,
                        pa,
                        pb,
                        gs.p_max(),
                    )));
                    // π_a − π_b ≤ K(2F̂F − F̂²) + s
                    let fh = lin.flow_points[p][t].max(T::zero());
                    let s = self.var(format!("wslack_{p}_{t}"), T::zero(), T::infinity(), lin.penalty / scale);
                    let two_kf = T::lit(2.0) * pipe.k * fh;
                    self.m.add_row(
                        format!("wcc_{p}_{t}"),
                        vec![
                            (pa, T::one()),
                            (pb, -T::one()),
                            (a.h2, -two_kf),
                            (a.ch4, -two_kf),
                            (s, -T::one()),
                        ],
                        RowSense::Le,
                        -pipe.k * fh * fh,
                    );
                    Some(s)
                } else {
                    None
                };
                arcs_t.push(arcs);
                slack_t.push(slack);
            }
            gi.arcs.push(arcs_t);
            gi.slack.push(slack_t);
        }

        for t in 0..self.hours {
            // electrolyser output routed to the injection points
            let mut link: Vec<(usize, T)> = gi.injection.iter().map(|r| (r[t], T::one())).collect();
            for (g, gen) in gens.iter().enumerate() {
                if let (Some(e), Some(v)) = (&gen.electrolyser, self.ix.elec_inject[g][t]) {
                    link.push((v, -e.efficiency));
                }
            }
            if !link.is_empty() {
                self.m.add_row(format!("h2link_{t}"), link, RowSense::Eq, T::zero());
            }

            for n in 0..nn {
                let (ch, cc) = gi.consumption[n][t];
                let mut energy = vec![(ch, hhv_h), (cc, hhv_c)];
                let mut fuel_max = T::zero();
                for (g, gen) in gens.iter().enumerate() {
                    if gen.gas_node == Some(n) && gen.heat_rate > T::zero() {
                        energy.push((self.ix.p[g][t], -T::lit(3.6) * gen.heat_rate));
                        fuel_max += gen.heat_rate * gen.pmax;
                    }
                }
                let demand = inst.day.gas_demand[n][t];
                self.m
                    .add_row(format!("genergy_{n}_{t}"), energy, RowSense::Eq, T::lit(3.6) * demand);

                // species balances
                let mut bal_h: Vec<(usize, T)> = vec![(ch, -T::one())];
                let mut bal_c: Vec<(usize, T)> = vec![(cc, -T::one()), (gi.supply[n][t], T::one())];
                for (i, inj) in gs.injections.iter().enumerate() {
                    if inj.node == n {
                        bal_h.push((gi.injection[i][t], to_kcm_h));
                    }
                }
                let mut outgoing: Vec<(Arc, T)> = Vec::new();
                for (p, pipe) in gs.pipelines.iter().enumerate() {
                    for a in &gi.arcs[p][t] {
                        let (src, dst) = if a.dir > 0 {
                            (pipe.from, pipe.to)
                        } else {
                            (pipe.to, pipe.from)
                        };
                        if dst == n {
                            bal_h.push((a.h2, T::one()));
                            bal_c.push((a.ch4, T::one()));
                        }
                        if src == n {
                            bal_h.push((a.h2, -T::one()));
                            bal_c.push((a.ch4, -T::one()));
                            outgoing.push((*a, pipe.max_flow));
                        }
                    }
                }
                let mut rhs_c = T::zero();
                if let (Some((sh, sc)), Some(lp)) = (gi.store[n][t], gs.nodes[n].linepack.as_ref()) {
                    bal_h.push((sh, -T::one()));
                    bal_c.push((sc, -T::one()));
                    if t == 0 {
                        rhs_c = -lp.initial;
                    } else {
                        let (ph, pc) = gi.store[n][t - 1].unwrap();
                        bal_h.push((ph, T::one()));
                        bal_c.push((pc, T::one()));
                    }
                    if t + 1 == self.hours {
                        self.m.add_row(
                            format!("lpend_{n}"),
                            vec![(sh, T::one()), (sc, T::one())],
                            RowSense::Ge,
                            lp.initial,
                        );
                    }
                }
                self.m
                    .add_row(format!("gbal_h2_{n}_{t}"), bal_h, RowSense::Eq, T::zero());
                self.m.add_row(format!("gbal_ch4_{n}_{t}"), bal_c, RowSense::Eq, rhs_c);

                // every stream leaving the node carries the node fraction
                let x = gi.fraction[n][t];
                let (xl, xu) = (self.m.lp.lower[x], self.m.lp.upper[x]);
                let c_max = T::lit(3.6) * (demand + fuel_max) / hhv_h;
                let mut streams: Vec<(usize, usize, T, String)> = outgoing
                    .iter()
                    .map(|(a, fmax)| (a.h2, a.ch4, *fmax, format!("mc_{n}_{t}_{}_{}", a.h2, a.dir)))
                    .collect();
                streams.push((ch, cc, c_max, format!("mc_cons_{n}_{t}")));
                for (h, c, ymax, name) in streams {
                    let cuts = mccormick((xl, xu), (T::zero(), ymax))?;
                    for (k, cut) in cuts.iter().enumerate() {
                        // cx·x + cy·(h + c) + cw·h ≤ rhs
                        self.m.add_row(
                            format!("{name}_{k}"),
                            vec![(x, cut.cx), (h, cut.cy + cut.cw), (c, cut.cy)],
                            RowSense::Le,
                            cut.rhs,
                        );
                    }
                }
            }
        }
        self.ix.gas = Some(gi);
        Ok(())
    }
}

/// Reads a solved model back into hourly quantities.
pub(crate) fn extract<T: Scalar>(inst: &ComInstance<T>, model: &UcModel<T>, x: &[T]) -> DispatchResult<T> {
    let ix = &model.index;
    let hours = ix.hours;
    let gens = &inst.power.generators;
    let val = |j: usize| x[j];
    let opt = |j: Option<usize>| j.map_or(T::zero(), |j| x[j]);
    let mut r = DispatchResult {
        day: inst.day.name.clone(),
        hours,
        hour_weight: inst.day.weight * T::lit(24.0) / T::from_usize_lossy(inst.hours()),
        commitment: ix
            .u
            .iter()
            .enumerate()
            .map(|(g, row)| {
                row.iter()
                    .enumerate()
                    .map(|(t, u)| match u {
                        Some(j) => x[*j] > T::lit(0.5),
                        None => gens[g].kind.is_variable() || x[ix.p[g][t]] > T::zero(),
                    })
                    .collect()
            })
            .collect(),
        generation: ix.p.iter().map(|row| row.iter().map(|&j| val(j)).collect()).collect(),
        exports: ix
            .export
            .iter()
            .map(|row| row.iter().map(|&j| opt(j)).collect())
            .collect(),
        line_flow: ix
            .flow
            .iter()
            .map(|row| row.iter().map(|&j| val(j)).collect())
            .collect(),
        angle: ix
            .theta
            .iter()
            .map(|row| row.iter().map(|&j| val(j)).collect())
            .collect(),
        cost: model.milp.lp.objective_value(x),
        ..DispatchResult::default()
    };
    for t in 0..hours {
        r.demand.push(inst.bus_demand(t));
        let mut nonsync = T::zero();
        let mut avail = T::zero();
        let mut used = T::zero();
        let mut inj = T::zero();
        let mut exp = T::zero();
        for (g, gen) in gens.iter().enumerate() {
            if !gen.synchronous {
                nonsync += x[ix.p[g][t]];
            }
            if gen.kind.is_wind() {
                avail += inst.availability(g, t);
                let i = opt(ix.elec_inject[g][t]);
                let e = opt(ix.elec_export[g][t]);
                used += x[ix.p[g][t]] + i + e;
                inj += i;
                exp += e;
            }
        }
        r.nonsync_generation.push(nonsync);
        r.wind_available.push(avail);
        r.wind_used.push(used.min(avail));
        r.electrolyser_inject.push(inj);
        r.electrolyser_export.push(exp);
    }
    if let (Some(gs), Some(gi)) = (&inst.gas, &ix.gas) {
        let table = GasConstants::bundled();
        let to_kcm_h = T::lit(3.6) / table.hhv::<T>(Species::H2);
        let nn = gs.nodes.len();
        r.gas_flow = vec![vec![T::zero(); hours]; gs.pipelines.len()];
        r.gas_flow_h2 = r.gas_flow.clone();
        r.node_inflow = vec![vec![(T::zero(), T::zero()); hours]; nn];
        for (p, pipe) in gs.pipelines.iter().enumerate() {
            for t in 0..hours {
                for a in &gi.arcs[p][t] {
                    let sign = if a.dir > 0 { T::one() } else { -T::one() };
                    let (h, c) = (x[a.h2], x[a.ch4]);
                    r.gas_flow[p][t] += sign * (h + c);
                    r.gas_flow_h2[p][t] += sign * h;
                    let dst = if a.dir > 0 { pipe.to } else { pipe.from };
                    let e = &mut r.node_inflow[dst][t];
                    e.0 += h;
                    e.1 += c;
                }
            }
        }
        for t in 0..hours {
            for n in 0..nn {
                r.node_inflow[n][t].1 += x[gi.supply[n][t]];
                if let Some((sh, sc)) = gi.store[n][t] {
                    let (ph, pc) = match t {
                        0 => (
                            T::zero(),
                            gs.nodes[n].linepack.as_ref().map_or(T::zero(), |l| l.initial),
                        ),
                        _ => {
                            let (a, b) = gi.store[n][t - 1].unwrap();
                            (x[a], x[b])
                        }
                    };
                    r.node_inflow[n][t].0 += (ph - x[sh]).max(T::zero());
                    r.node_inflow[n][t].1 += (pc - x[sc]).max(T::zero());
                }
            }
            for (i, inj) in gs.injections.iter().enumerate() {
                r.node_inflow[inj.node][t].0 += to_kcm_h * x[gi.injection[i][t]];
            }
        }
        r.pressure = gi
            .pressure_sq
            .iter()
            .map(|row| {
                row.iter()
                    .map(|j| j.map_or(T::zero(), |j| x[j].max(T::zero()).sqrt()))
                    .collect()
            })
            .collect();
        r.blend = (0..nn)
            .map(|n| {
                (0..hours)
                    .map(|t| {
                        let (h, c) = r.node_inflow[n][t];
                        if h + c > T::lit(1e-9) {
                            h / (h + c)
                        } else {
                            x[gi.fraction[n][t]]
                        }
                    })
                    .collect()
            })
            .collect();
    }
    r
}

/// Largest normalised Weymouth residual and largest gap between a node's
/// inflow mixture and the composition of any stream leaving it.
pub(crate) fn gas_residuals<T: Scalar>(
    inst: &ComInstance<T>,
    model: &UcModel<T>,
    x: &[T],
    r: &DispatchResult<T>,
) -> (T, T) {
    let (Some(gs), Some(gi)) = (&inst.gas, &model.index.gas) else {
        return (T::zero(), T::zero());
    };
    let scale = gs.p_max() * gs.p_max();
    let mut weymouth = T::zero();
    let mut blend = T::zero();
    let tiny = T::lit(1e-7);
    for t in 0..model.index.hours {
        for (p, pipe) in gs.pipelines.iter().enumerate() {
            let (pa, pb) = (r.pressure[pipe.from][t], r.pressure[pipe.to][t]);
            let res = super::gas::weymouth_residual(pa, pb, r.gas_flow[p][t], pipe.k).abs() / scale;
            weymouth = weymouth.max(res);
            for a in &gi.arcs[p][t] {
                let src = if a.dir > 0 { pipe.from } else { pipe.to };
                let total = x[a.h2] + x[a.ch4];
                if total > tiny {
                    blend = blend.max((x[a.h2] / total - r.blend[src][t]).abs());
                }
            }
        }
        for n in 0..gs.nodes.len() {
            let (ch, cc) = gi.consumption[n][t];
            let total = x[ch] + x[cc];
            if total > tiny {
                blend = blend.max((x[ch] / total - r.blend[n][t]).abs());
            }
        }
    }
    (weymouth, blend)
}
