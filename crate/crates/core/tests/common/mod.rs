//! Independent oracles shared by the integration and acceptance suites.
//! None of these go through the code path they are used to check.
#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

pub mod wake_oracle {
    use offshore_h2::wake::{single_wake_deficit, wind_frame, PowerCurve};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// All-pairs fixed point: every turbine sees every strictly upstream
    /// turbine, evaluated at that turbine's current waked speed. Repeating
    /// the sweep `n` times settles any chain of length `n`.
    pub fn speeds(turbines: &[[f64; 2]], curve: &PowerCurve<f64>, direction: f64, decay: f64, free: f64) -> Vec<f64> {
        let n = turbines.len();
        let mut speed = vec![free; n];
        for _ in 0..=n {
            let prev = speed.clone();
            for v in 0..n {
                let mut sum_sq = 0.0;
                for u in 0..n {
                    if u == v {
                        continue;
                    }
                    let (axial, _) = wind_frame(turbines[u], turbines[v], direction);
                    let ct = curve.thrust_at(prev[u]);
                    if axial <= 0.0 || ct == 0.0 {
                        continue;
                    }
                    let d = single_wake_deficit(turbines[u], turbines[v], direction, ct, curve.rotor_diameter, decay)
                        .unwrap();
                    sum_sq += d * d;
                }
                speed[v] = free * (1.0 - sum_sq.sqrt().min(1.0));
            }
            if speed == prev {
                break;
            }
        }
        speed
    }

    pub fn farm_power(turbines: &[[f64; 2]], curve: &PowerCurve<f64>, direction: f64, decay: f64, free: f64) -> f64 {
        speeds(turbines, curve, direction, decay, free)
            .into_iter()
            .map(|v| curve.power_at(v))
            .sum()
    }

    /// Rejection-sampled layout with at least two diameters between turbines.
    pub fn random_layout(rng: &mut ChaCha8Rng, n: usize, diameter: f64) -> Vec<[f64; 2]> {
        let side = diameter * 4.0 * (n as f64).sqrt() + 2000.0;
        let mut pts: Vec<[f64; 2]> = Vec::new();
        while pts.len() < n {
            let p = [rng.random_range(0.0..side), rng.random_range(0.0..side)];
            if pts
                .iter()
                .all(|q| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt() >= 2.0 * diameter)
            {
                pts.push(p);
            }
        }
        pts
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn reference_curve() -> PowerCurve<f64> {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../demo/turbine_15mw.csv");
        PowerCurve::load(path, 240.0).unwrap()
    }
}

pub mod uc_oracle {
    use offshore_h2::powergas::{ComInstance, SystemFile};
    use offshore_h2::solver::{simplex_solve, LinearProgram, ObjectiveSense, RowSense, Status};

    pub fn bundled(name: &str) -> ComInstance<f64> {
        let path = format!("{}/../../demo/uc/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let sys: SystemFile<f64> = SystemFile::load(path).unwrap();
        sys.instances().remove(0)
    }

    pub const BUNDLED: [&str; 3] = ["uc_3bus_a", "uc_3bus_b", "uc_2bus_c"];

    /// Cheapest operation over every on/off pattern of the committable
    /// units. Start-ups follow from the pattern; each pattern's dispatch is
    /// an angle-only DC economic dispatch. `None` when nothing is feasible.
    pub fn enumerate(inst: &ComInstance<f64>) -> Option<f64> {
        let gens = &inst.power.generators;
        let hours = inst.hours();
        let units: Vec<usize> = (0..gens.len()).filter(|&g| gens[g].kind.is_committable()).collect();
        let bits = units.len() * hours;
        assert!(bits <= 16, "enumeration only for tiny instances");
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << bits) {
            let on = |k: usize, t: usize| (mask >> (k * hours + t)) & 1 == 1;
            if let Some(cost) = pattern_cost(inst, &units, &on) {
                if best.is_none_or(|b| cost < b) {
                    best = Some(cost);
                }
            }
        }
        best
    }

    fn pattern_cost(inst: &ComInstance<f64>, units: &[usize], on: &dyn Fn(usize, usize) -> bool) -> Option<f64> {
        let gens = &inst.power.generators;
        let pol = &inst.policy;
        let hours = inst.hours();
        let mut fixed_cost = 0.0;
        let mut start = vec![vec![0.0; hours]; units.len()];
        let mut stop = vec![vec![0.0; hours]; units.len()];
        for (k, &g) in units.iter().enumerate() {
            let gen = &gens[g];
            let mut prev = gen.initial_on;
            for t in 0..hours {
                let now = on(k, t);
                if gen.must_run && !now {
                    return None;
                }
                if now && !prev {
                    start[k][t] = 1.0;
                    fixed_cost += gen.start_cost;
                }
                if prev && !now {
                    stop[k][t] = 1.0;
                }
                if now {
                    fixed_cost += gen.no_load_cost;
                }
                prev = now;
            }
            // a start within the last min_up hours keeps the unit on, a stop
            // within the last min_down hours keeps it off
            for t in 0..hours {
                let now = f64::from(u8::from(on(k, t)));
                let up: f64 = ((t + 1).saturating_sub(gen.min_up as usize)..=t)
                    .map(|s| start[k][s])
                    .sum();
                let down: f64 = ((t + 1).saturating_sub(gen.min_down as usize)..=t)
                    .map(|s| stop[k][s])
                    .sum();
                if up > now || down > 1.0 - now {
                    return None;
                }
            }
        }
        for t in 0..hours {
            let sync: Vec<usize> = (0..units.len())
                .filter(|&k| gens[units[k]].synchronous && on(k, t))
                .collect();
            let inertia: f64 = sync.iter().map(|&k| gens[units[k]].inertia_mws).sum();
            if inertia < pol.min_inertia_mws || sync.len() < pol.min_synchronous_units as usize {
                return None;
            }
        }

        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        lp.objective_offset = fixed_cost;
        let nb = inst.power.buses.len();
        // output expressions per generator and hour: (constant, terms)
        let mut out: Vec<Vec<(f64, Vec<(usize, f64)>)>> = vec![vec![(0.0, Vec::new()); hours]; gens.len()];
        for (g, gen) in gens.iter().enumerate() {
            let k = units.iter().position(|&u| u == g);
            for t in 0..hours {
                match k {
                    Some(k) => {
                        if !on(k, t) {
                            continue;
                        }
                        let mut terms = Vec::new();
                        for seg in &gen.segments {
                            terms.push((lp.add_var("q", 0.0, seg.width_mw, seg.price), 1.0));
                        }
                        out[g][t] = (gen.pmin, terms);
                    }
                    None => {
                        assert!(
                            gen.kind.is_wind() && gen.electrolyser.is_none(),
                            "oracle covers wind and thermal only"
                        );
                        let avail = inst.availability(g, t).min(gen.pmax);
                        lp.objective_offset += pol.curtailment_penalty * avail;
                        let r = lp.add_var("r", 0.0, avail, -pol.curtailment_penalty);
                        out[g][t] = (0.0, vec![(r, 1.0)]);
                    }
                }
            }
        }
        for t in 0..hours {
            let theta: Vec<Option<usize>> = (0..nb)
                .map(|b| (b > 0).then(|| lp.add_var("theta", f64::NEG_INFINITY, f64::INFINITY, 0.0)))
                .collect();
            // injection of bus b equals Σ_l B·(θ_b − θ_other)
            let mut net: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
            for line in &inst.power.lines {
                let b = inst.power.base_mva / line.reactance_pu;
                let mut flow = Vec::new();
                if let Some(j) = theta[line.from] {
                    flow.push((j, b));
                }
                if let Some(j) = theta[line.to] {
                    flow.push((j, -b));
                }
                let rating = line.rating(inst.day.season);
                lp.add_row("lim+", flow.clone(), RowSense::Le, rating);
                lp.add_row("lim-", flow.clone(), RowSense::Ge, -rating);
                net[line.from].extend(flow.iter().copied());
                net[line.to].extend(flow.iter().map(|&(j, c)| (j, -c)));
            }
            for b in 0..nb {
                let mut row = Vec::new();
                let mut rhs = inst.day.demand[b][t];
                for (g, gen) in gens.iter().enumerate() {
                    if gen.bus == b {
                        rhs -= out[g][t].0;
                        row.extend(out[g][t].1.iter().copied());
                    }
                }
                row.extend(net[b].iter().map(|&(j, c)| (j, -c)));
                lp.add_row("bal", row, RowSense::Eq, rhs);
            }
            // headroom of online units: Σ (pmax − p)
            let headroom = |skip: Option<usize>| {
                let mut konst = 0.0;
                let mut terms = Vec::new();
                for (k, &g) in units.iter().enumerate() {
                    if on(k, t) && Some(g) != skip {
                        konst += gens[g].pmax - gens[g].pmin;
                        terms.extend(out[g][t].1.iter().map(|&(j, c)| (j, -c)));
                    }
                }
                (konst, terms)
            };
            let wind: f64 = (0..gens.len())
                .filter(|&g| gens[g].kind.is_wind())
                .map(|g| inst.availability(g, t))
                .sum();
            let need = pol.reserve_mw.max(pol.reserve_wind_fraction * wind);
            if need > 0.0 {
                let (konst, terms) = headroom(None);
                lp.add_row("res", terms, RowSense::Ge, need - konst);
            }
            if pol.reserve_largest_unit {
                for (k, &g) in units.iter().enumerate() {
                    if !on(k, t) {
                        continue;
                    }
                    let (konst, mut terms) = headroom(Some(g));
                    terms.extend(out[g][t].1.iter().map(|&(j, c)| (j, -c)));
                    lp.add_row("n-1", terms, RowSense::Ge, gens[g].pmin - konst);
                }
            }
            let mut ns = Vec::new();
            for (g, gen) in gens.iter().enumerate() {
                if !gen.synchronous {
                    ns.extend(out[g][t].1.iter().copied());
                }
            }
            lp.add_row("snsp", ns, RowSense::Le, pol.snsp_cap * inst.bus_demand(t));
        }
        for (k, &g) in units.iter().enumerate() {
            let gen = &gens[g];
            let Some(r) = gen.ramp else { continue };
            let mut prev: (f64, Vec<(usize, f64)>) = (if gen.initial_on { gen.pmin } else { 0.0 }, Vec::new());
            for t in 0..hours {
                let cur = out[g][t].clone();
                // cur − prev ≤ r + pmax·start ; prev − cur ≤ r + pmax·stop
                let mut terms = cur.1.clone();
                terms.extend(prev.1.iter().map(|&(j, c)| (j, -c)));
                lp.add_row(
                    "ru",
                    terms.clone(),
                    RowSense::Le,
                    r + gen.pmax * start[k][t] - cur.0 + prev.0,
                );
                let neg: Vec<(usize, f64)> = terms.iter().map(|&(j, c)| (j, -c)).collect();
                lp.add_row("rd", neg, RowSense::Le, r + gen.pmax * stop[k][t] + cur.0 - prev.0);
                prev = cur;
            }
        }
        let sol = simplex_solve(&lp).unwrap();
        (sol.status == Status::Optimal).then_some(sol.objective)
    }
}

pub mod trade_oracle {
    use std::collections::BTreeMap;

    use offshore_h2::lcoh::{CurveBasis, Scenario, SupplyCurve};
    use offshore_h2::trade::{CountrySupply, Route, TradeProblem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub const STEP: f64 = 0.1;

    fn step_integral(pts: &[(f64, f64)], q: f64) -> f64 {
        let mut total = 0.0;
        let mut left = 0.0;
        for &(right, price) in pts {
            let take = (q.min(right) - left).max(0.0);
            total += take * price;
            left = right;
        }
        total
    }

    /// Grid optimum in €, and every grid flow vector (route order) within
    /// `1e-9` relative of it.
    pub struct GridOptimum {
        pub cost: f64,
        pub argmins: Vec<Vec<f64>>,
    }

    fn compositions(units: usize, parts: usize) -> Vec<Vec<usize>> {
        if parts == 1 {
            return vec![vec![units]];
        }
        let mut out = Vec::new();
        for first in 0..=units {
            for mut rest in compositions(units - first, parts - 1) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    /// Exhaustive search over import splits on the 0.1 TWh grid. Every
    /// importer is assumed reachable from every exporter through
    /// `problem.routes` (one route per pair) plus the backstop.
    pub fn enumerate(p: &TradeProblem<f64>) -> Option<GridOptimum> {
        let exporters: Vec<&CountrySupply<f64>> = p.supplies.iter().collect();
        let importers: Vec<(&String, usize)> = p
            .demands
            .iter()
            .map(|(c, &d)| (c, (d / STEP).round() as usize))
            .collect();
        let parts = exporters.len() + 1;
        let route_of = |e: &str, i: &str| p.routes.iter().position(|r| r.from == e && r.to == i).unwrap();
        let splits: Vec<Vec<Vec<usize>>> = importers.iter().map(|&(_, u)| compositions(u, parts)).collect();

        let mut best = f64::INFINITY;
        let mut plans: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut choice = vec![0usize; importers.len()];
        loop {
            let mut flows = vec![0.0; p.routes.len()];
            let mut backstop = 0.0;
            for (k, &(imp, _)) in importers.iter().enumerate() {
                let split = &splits[k][choice[k]];
                for (e, &units) in split[..exporters.len()].iter().enumerate() {
                    flows[route_of(&exporters[e].country, imp)] += units as f64 * STEP;
                }
                backstop += split[exporters.len()] as f64 * STEP;
            }
            let mut cost = 0.0;
            let mut ok = true;
            for e in &exporters {
                let out: f64 = p
                    .routes
                    .iter()
                    .zip(&flows)
                    .filter(|(r, _)| r.from == e.country)
                    .map(|(_, f)| f)
                    .sum();
                let q = out + e.domestic_demand_priority;
                if out > e.export_cap + 1e-9 || q > e.curve.total() + 1e-9 {
                    ok = false;
                    break;
                }
                cost += step_integral(&e.curve.breakpoints, q) * 1e6;
            }
            if ok && (backstop == 0.0 || p.backstop_price.is_some()) {
                for (r, &f) in p.routes.iter().zip(&flows) {
                    let ships = if r.shipped {
                        (f / r.ship_capacity_twh - 1e-9).ceil().max(0.0)
                    } else {
                        0.0
                    };
                    cost += ships * r.ship_annualised_cost + f * (r.distance_km * r.fuel_cost + r.tariff_per_twh);
                }
                cost += backstop * p.backstop_price.unwrap_or(0.0) * 1e6;
                if cost < best {
                    best = cost;
                }
                plans.push((cost, flows));
            }
            let mut k = 0;
            loop {
                if k == choice.len() {
                    if !best.is_finite() {
                        return None;
                    }
                    let argmins = plans
                        .into_iter()
                        .filter(|(c, _)| *c <= best * (1.0 + 1e-9) + 1e-6)
                        .map(|(_, f)| f)
                        .collect();
                    return Some(GridOptimum { cost: best, argmins });
                }
                choice[k] += 1;
                if choice[k] < splits[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            // a single importer with no split left also ends the loop above
            if choice.is_empty() {
                unreachable!();
            }
        }
    }

    fn tenth(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
        rng.random_range(lo..=hi) as f64 * STEP
    }

    /// Random instance with every number on the 0.1 TWh grid.
    pub fn random_instance(seed: u64) -> TradeProblem<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_exp = rng.random_range(1..=3);
        let n_imp = rng.random_range(1..=2);
        let exporters = ["IE", "NO", "UK"];
        let importers = ["DE", "NL"];
        let mut supplies = Vec::new();
        for &c in &exporters[..n_exp] {
            let segs = rng.random_range(1..=2);
            let mut q = 0.0;
            let mut price: f64 = rng.random_range(40.0..90.0);
            let mut pts = Vec::new();
            for _ in 0..segs {
                q += tenth(&mut rng, 3, 10);
                pts.push((q, price));
                price += rng.random_range(0.0..30.0);
            }
            supplies.push(CountrySupply {
                country: c.to_string(),
                year: 2040,
                curve: SupplyCurve {
                    breakpoints: pts,
                    year: 2040,
                    country: c.to_string(),
                    scenario: Scenario::Median,
                    basis: CurveBasis::EnergyTwh,
                },
                export_cap: tenth(&mut rng, 2, 15),
                domestic_demand_priority: 0.0,
            });
        }
        let mut demands = BTreeMap::new();
        for &c in &importers[..n_imp] {
            demands.insert(c.to_string(), tenth(&mut rng, 3, 15));
        }
        let mut routes = Vec::new();
        for &e in &exporters[..n_exp] {
            for &i in &importers[..n_imp] {
                routes.push(Route {
                    from: e.to_string(),
                    to: i.to_string(),
                    distance_km: rng.random_range(300.0..2000.0),
                    ship_capacity_twh: tenth(&mut rng, 3, 10),
                    ship_annualised_cost: rng.random_range(1e6..2e7),
                    fuel_cost: rng.random_range(100.0..500.0),
                    shipped: true,
                    tariff_per_twh: 0.0,
                });
            }
        }
        TradeProblem {
            year: 2040,
            supplies,
            demands,
            routes,
            backstop_price: Some(rng.random_range(110.0..160.0)),
        }
    }
}

pub mod gas_cases {
    use offshore_h2::powergas::{weymouth_residual, ComInstance, SystemFile};
    use serde_json::json;

    pub fn instance(v: serde_json::Value) -> ComInstance<f64> {
        let sys: SystemFile<f64> = serde_json::from_value(v).unwrap();
        sys.instances().remove(0)
    }

    pub fn thermal(name: &str, bus: usize, pmin: f64, pmax: f64, price: f64) -> serde_json::Value {
        json!({"name": name, "bus": bus, "kind": "coal", "pmin": pmin, "pmax": pmax,
               "segments": [{"width_mw": pmax - pmin, "price": price}], "synchronous": true})
    }

    pub fn region(cap: f64) -> serde_json::Value {
        json!({"wobbe_min": 45.0, "wobbe_max": 56.0, "relative_density_min": 0.3, "relative_density_max": 0.7,
               "weaver_min": 0.1, "weaver_max": 0.3, "h2_fraction_cap": cap})
    }

    pub fn two_node(demand_mw: f64) -> ComInstance<f64> {
        let mut unit = thermal("base", 0, 0.0, 300.0, 30.0);
        unit["must_run"] = json!(true);
        instance(json!({
            "power": {"buses": [{"name": "b"}], "generators": [unit]},
            "gas": {
                "nodes": [
                    {"name": "terminal", "supply_max": 500.0, "supply_price": 20.0, "pressure_min": 70.0, "pressure_max": 70.0},
                    {"name": "city", "pressure_min": 30.0, "pressure_max": 70.0}
                ],
                "pipelines": [{"from": 0, "to": 1, "k": 0.3, "max_flow": 400.0}],
                "region": region(0.0)
            },
            "policy": {"snsp_cap": 0.75},
            "days": [{"name": "d", "weight": 1, "season": "winter", "demand": [[100, 100]],
                      "gas_demand": [[0, 0], [demand_mw, demand_mw]]}]
        }))
    }

    /// Flow through one pipe found by bisection on the exact Weymouth equation.
    pub fn bisect_flow(p_from: f64, p_to: f64, k: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if weymouth_residual(p_from, p_to, mid, k) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn five_node(cap: f64) -> ComInstance<f64> {
        let mut unit = thermal("base", 0, 0.0, 300.0, 60.0);
        unit["must_run"] = json!(true);
        instance(json!({
            "power": {"buses": [{"name": "b"}], "generators": [unit,
                {"name": "farm", "bus": 0, "kind": "offshore_wind", "pmax": 500.0, "synchronous": false,
                 "electrolyser": {"capacity_mw": 300.0, "efficiency": 0.7}}]},
            "gas": {
                "nodes": [
                    {"name": "terminal", "supply_max": 800.0, "supply_price": 30.0, "pressure_min": 60.0, "pressure_max": 70.0},
                    {"name": "hub", "pressure_min": 30.0, "pressure_max": 70.0},
                    {"name": "city", "pressure_min": 30.0, "pressure_max": 70.0},
                    {"name": "junction", "pressure_min": 30.0, "pressure_max": 70.0},
                    {"name": "plant", "pressure_min": 30.0, "pressure_max": 70.0}
                ],
                "pipelines": [
                    {"from": 0, "to": 1, "k": 0.05, "max_flow": 600.0},
                    {"from": 1, "to": 2, "k": 0.1, "max_flow": 400.0},
                    {"from": 1, "to": 3, "k": 0.08, "max_flow": 400.0},
                    {"from": 3, "to": 4, "k": 0.12, "max_flow": 400.0}
                ],
                "injections": [{"node": 1, "max_mw": 400.0}],
                "region": region(cap)
            },
            "policy": {"snsp_cap": 0.5},
            "days": [{"name": "d", "weight": 1, "season": "winter", "demand": [[200, 220, 180]],
                      "availability": {"farm": [450, 300, 480]},
                      "gas_demand": [[0, 0, 0], [0, 0, 0], [600, 650, 550], [400, 380, 420], [500, 520, 450]]}]
        }))
    }
}
