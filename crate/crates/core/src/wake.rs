//! Wake-corrected wind farm output.
//!
//! A single wake is a Jensen axial decay with a Gaussian crosswind profile:
//!
//! ```text
//! δ(x, r) = (1 − √(1 − Ct)) / (1 + 2kx/D)² · exp(−r² / 2σ²),   σ = (D + 2kx) / 4
//! ```
//!
//! Farm-level deficits are combined by root-sum-of-squares over a directed
//! acyclic graph of upstream influences built once per wind-direction bin.
//! Only the geometric part of each edge depends on direction, so it is
//! cached on the edge and reused for every hour that falls in the bin.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geodata::WindSeries;
use crate::num::{interp_table, Scalar};

/// Offshore default wake decay constant.
pub const DEFAULT_WAKE_DECAY: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve<T> {
    speeds: Vec<T>,
    power: Vec<T>,
    ct: Vec<T>,
    pub cut_in: T,
    pub cut_out: T,
    pub rated_power: T,
    pub rotor_diameter: T,
}

impl<T: Scalar> PowerCurve<T> {
    /// The table spans the operating range: its first speed is the cut-in
    /// and its last the cut-out.
    pub fn new(speeds: Vec<T>, power: Vec<T>, ct: Vec<T>, rotor_diameter: T) -> Result<Self> {
        if speeds.len() < 2 || speeds.len() != power.len() || speeds.len() != ct.len() {
            return Err(Error::validation(
                "power curve needs at least two rows of speed, power and ct",
            ));
        }
        if speeds.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("power curve speeds must be strictly increasing"));
        }
        if speeds[0] < T::zero() {
            return Err(Error::validation("power curve speeds must be non-negative"));
        }
        if power.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::validation("power curve values must be non-negative"));
        }
        if ct.iter().any(|&c| !(c > T::zero() && c < T::one())) {
            return Err(Error::validation("thrust coefficients must lie in (0, 1)"));
        }
        if !(rotor_diameter > T::zero()) {
            return Err(Error::validation("rotor diameter must be positive"));
        }
        let rated_power = power.iter().copied().fold(T::zero(), T::max);
        Ok(Self {
            cut_in: speeds[0],
            cut_out: speeds[speeds.len() - 1],
            rated_power,
            rotor_diameter,
            speeds,
            power,
            ct,
        })
    }

    /// Reads a `speed,power,ct` CSV (m/s, MW, dimensionless).
    pub fn load(path: impl AsRef<Path>, rotor_diameter: T) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let mut speeds = Vec::new();
        let mut power = Vec::new();
        let mut ct = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            })?;
            let mut vals = [0.0f64; 3];
            for (c, v) in vals.iter_mut().enumerate() {
                let raw = rec.get(c).unwrap_or("");
                *v = raw.trim().parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("`{raw}` is not a number"),
                })?;
            }
            speeds.push(T::lit(vals[0]));
            power.push(T::lit(vals[1]));
            ct.push(T::lit(vals[2]));
        }
        Self::new(speeds, power, ct, rotor_diameter).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
    }

    pub fn is_operating(&self, speed: T) -> bool {
        speed >= self.cut_in && speed <= self.cut_out
    }

    /// MW at `speed`; zero outside the operating range.
    pub fn power_at(&self, speed: T) -> T {
        if !self.is_operating(speed) {
            return T::zero();
        }
        interp_table(&self.speeds, &self.power, speed)
    }

    /// Thrust coefficient at `speed`; zero while the rotor is parked.
    pub fn thrust_at(&self, speed: T) -> T {
        if !self.is_operating(speed) {
            return T::zero();
        }
        interp_table(&self.speeds, &self.ct, speed)
    }

    pub fn max_thrust(&self) -> T {
        self.ct.iter().copied().fold(T::zero(), T::max)
    }
}

/// Initial velocity deficit `1 − √(1 − Ct)` behind the rotor.
#[inline]
fn rotor_deficit<T: Scalar>(ct: T) -> T {
    T::one() - (T::one() - ct).sqrt()
}

/// Axial and crosswind offsets of `to` relative to `from` for wind blowing
/// from `direction_deg` (meteorological convention; x east, y north).
pub fn wind_frame<T: Scalar>(from: [T; 2], to: [T; 2], direction_deg: T) -> (T, T) {
    let theta = direction_deg.to_radians();
    // unit vector pointing downwind
    let (wx, wy) = (-theta.sin(), -theta.cos());
    let (dx, dy) = (to[0] - from[0], to[1] - from[1]);
    let axial = dx * wx + dy * wy;
    let cross = (dx * wy - dy * wx).abs();
    (axial, cross)
}

/// Distance decay and Gaussian shaping, i.e. the wake deficit per unit of
/// rotor deficit.
fn wake_shape<T: Scalar>(axial: T, cross: T, rotor_diameter: T, decay: T) -> T {
    if axial <= T::zero() {
        return T::zero();
    }
    let two = T::lit(2.0);
    let expansion = T::one() + two * decay * axial / rotor_diameter;
    let sigma = (rotor_diameter + two * decay * axial) / T::lit(4.0);
    (-(cross * cross) / (two * sigma * sigma)).exp() / (expansion * expansion)
}

/// Fractional speed deficit caused at `downstream` by a turbine at
/// `upstream`. Zero when `downstream` is not strictly downwind.
pub fn single_wake_deficit<T: Scalar>(
    upstream: [T; 2],
    downstream: [T; 2],
    wind_direction: T,
    ct: T,
    rotor_diameter: T,
    decay: T,
) -> Result<T> {
    if !(ct > T::zero() && ct < T::one()) {
        return Err(Error::validation(format!("thrust coefficient {ct} outside (0, 1)")));
    }
    let (axial, cross) = wind_frame(upstream, downstream, wind_direction);
    Ok(rotor_deficit(ct) * wake_shape(axial, cross, rotor_diameter, decay))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout<T> {
    turbines: Vec<[T; 2]>,
    curve: PowerCurve<T>,
}

impl<T: Scalar> Layout<T> {
    pub fn new(turbines: Vec<[T; 2]>, curve: PowerCurve<T>) -> Result<Self> {
        let d = curve.rotor_diameter;
        for i in 0..turbines.len() {
            for j in i + 1..turbines.len() {
                let (a, b) = (turbines[i], turbines[j]);
                let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                // tolerance for grids laid out at exactly one diameter
                if dist < d * (T::one() - T::lit(1e-9)) {
                    return Err(Error::validation(format!(
                        "turbines {i} and {j} are {dist} m apart, closer than one rotor diameter"
                    )));
                }
            }
        }
        Ok(Self { turbines, curve })
    }

    /// `rows × cols` grid with the given spacing, rows along y.
    pub fn grid(rows: usize, cols: usize, spacing: T, curve: PowerCurve<T>) -> Result<Self> {
        let turbines = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| [T::from_usize_lossy(c) * spacing, T::from_usize_lossy(r) * spacing]))
            .collect();
        Self::new(turbines, curve)
    }

    /// Reads an `x,y` CSV of turbine positions in metres.
    pub fn load(path: impl AsRef<Path>, curve: PowerCurve<T>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let mut turbines = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            })?;
            let mut xy = [T::zero(); 2];
            for (c, v) in xy.iter_mut().enumerate() {
                let raw = rec.get(c).unwrap_or("");
                let f: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("`{raw}` is not a number"),
                })?;
                *v = T::lit(f);
            }
            turbines.push(xy);
        }
        Self::new(turbines, curve)
    }

    pub fn turbines(&self) -> &[[T; 2]] {
        &self.turbines
    }

    pub fn curve(&self) -> &PowerCurve<T> {
        &self.curve
    }

    pub fn len(&self) -> usize {
        self.turbines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turbines.is_empty()
    }

    pub fn rated_power(&self) -> T {
        self.curve.rated_power * T::from_usize_lossy(self.turbines.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WakeEdge<T> {
    pub from: usize,
    /// Deficit per unit rotor deficit of `from`.
    pub shape: T,
}

/// Upstream influence graph for one wind direction.
#[derive(Debug, Clone, PartialEq)]
pub struct WakeGraph<T> {
    pub direction: T,
    /// Turbine indices, upstream first.
    pub order: Vec<usize>,
    /// `incoming[v]` lists the wakes reaching turbine `v`.
    pub incoming: Vec<Vec<WakeEdge<T>>>,
}

impl<T: Scalar> WakeGraph<T> {
    pub fn edge_count(&self) -> usize {
        self.incoming.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incoming
            .iter()
            .enumerate()
            .flat_map(|(v, es)| es.iter().map(move |e| (e.from, v)))
    }
}

/// Edge `u → v` is kept iff the wake of `u` at its largest thrust
/// coefficient exceeds `influence_cutoff` at `v`.
pub fn build_wake_tree<T: Scalar>(
    layout: &Layout<T>,
    wind_direction: T,
    decay: T,
    influence_cutoff: T,
) -> WakeGraph<T> {
    let n = layout.len();
    let curve = layout.curve();
    let d = curve.rotor_diameter;
    let worst = rotor_deficit(curve.max_thrust());
    let theta = wind_direction.to_radians();
    let (wx, wy) = (-theta.sin(), -theta.cos());
    let axial: Vec<T> = layout.turbines().iter().map(|p| p[0] * wx + p[1] * wy).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        axial[a]
            .partial_cmp(&axial[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut incoming = vec![Vec::new(); n];
    for (pos, &v) in order.iter().enumerate() {
        for &u in &order[..pos] {
            let (x, r) = wind_frame(layout.turbines()[u], layout.turbines()[v], wind_direction);
            let shape = wake_shape(x, r, d, decay);
            if worst * shape > influence_cutoff {
                incoming[v].push(WakeEdge { from: u, shape });
            }
        }
    }
    WakeGraph {
        direction: wind_direction,
        order,
        incoming,
    }
}

/// Waked speed at every turbine for a free-stream `free_speed`.
pub fn effective_speeds<T: Scalar>(graph: &WakeGraph<T>, curve: &PowerCurve<T>, free_speed: T) -> Vec<T> {
    let n = graph.incoming.len();
    let mut speed = vec![free_speed; n];
    let mut rotor = vec![T::zero(); n];
    for &v in &graph.order {
        let sum_sq: T = graph.incoming[v]
            .iter()
            .map(|e| {
                let dv = rotor[e.from] * e.shape;
                dv * dv
            })
            .sum();
        let deficit = sum_sq.sqrt().min(T::one());
        speed[v] = free_speed * (T::one() - deficit);
        rotor[v] = rotor_deficit(curve.thrust_at(speed[v]));
    }
    speed
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WakeSettings<T> {
    pub decay: T,
    pub influence_cutoff: T,
    /// Direction bin width in degrees for graph reuse.
    pub bin_width: T,
}

impl<T: Scalar> Default for WakeSettings<T> {
    fn default() -> Self {
        Self {
            decay: T::lit(DEFAULT_WAKE_DECAY),
            influence_cutoff: T::lit(1e-3),
            bin_width: T::one(),
        }
    }
}

/// Cache of wake graphs keyed by direction bin.
pub struct WakeCache<'a, T: Scalar> {
    layout: &'a Layout<T>,
    settings: WakeSettings<T>,
    graphs: BTreeMap<i64, WakeGraph<T>>,
}

impl<'a, T: Scalar> WakeCache<'a, T> {
    pub fn new(layout: &'a Layout<T>, settings: WakeSettings<T>) -> Self {
        Self {
            layout,
            settings,
            graphs: BTreeMap::new(),
        }
    }

    fn bins(&self) -> i64 {
        (T::lit(360.0) / self.settings.bin_width)
            .round()
            .to_i64()
            .unwrap_or(360)
            .max(1)
    }

    pub fn graph(&mut self, direction: T) -> &WakeGraph<T> {
        let nbins = self.bins();
        let width = T::lit(360.0) / T::lit(nbins as f64);
        let bin = (direction / width).round().to_i64().unwrap_or(0).rem_euclid(nbins);
        let (layout, s) = (self.layout, self.settings);
        self.graphs
            .entry(bin)
            .or_insert_with(|| build_wake_tree(layout, T::lit(bin as f64) * width, s.decay, s.influence_cutoff))
    }

    /// Farm output in MW for one hour of free-stream wind.
    pub fn farm_output(&mut self, speed: T, direction: T) -> T {
        let curve = self.layout.curve();
        if speed < curve.cut_in {
            return T::zero();
        }
        let graph = self.graph(direction);
        effective_speeds(graph, curve, speed)
            .into_iter()
            .map(|v| curve.power_at(v))
            .sum()
    }
}

/// Hourly farm output in MW.
pub fn farm_power<T: Scalar>(layout: &Layout<T>, series: &WindSeries<T>, settings: &WakeSettings<T>) -> Result<Vec<T>> {
    if series.is_empty() {
        return Err(Error::validation("wind series is empty"));
    }
    let mut cache = WakeCache::new(layout, *settings);
    Ok(series
        .speed
        .iter()
        .zip(&series.direction)
        .map(|(&v, &d)| cache.farm_output(v, d))
        .collect())
}

/// Mean output over rated power.
pub fn capacity_factor<T: Scalar>(power: &[T], rated: T) -> Result<T> {
    if !(rated > T::zero()) {
        return Err(Error::validation("rated power must be positive"));
    }
    if power.is_empty() {
        return Ok(T::zero());
    }
    let mean = power.iter().copied().sum::<T>() / T::from_usize_lossy(power.len());
    Ok((mean / rated).max(T::zero()).min(T::one()))
}

/// Smallest inline spacing (m) at which the on-axis deficit behind a rotor
/// at its largest thrust coefficient drops to `threshold`, to within 1 m.
pub fn min_spacing<T: Scalar>(curve: &PowerCurve<T>, decay: T, threshold: T) -> Result<T> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::validation("spacing threshold must lie in (0, 1)"));
    }
    let d = curve.rotor_diameter;
    let initial = rotor_deficit(curve.max_thrust());
    let on_axis = |x: T| initial * wake_shape(x, T::zero(), d, decay);
    if initial <= threshold {
        return Ok(T::zero());
    }
    let mut lo = T::zero();
    let mut hi = d;
    while on_axis(hi) > threshold {
        lo = hi;
        hi *= T::lit(2.0);
    }
    while hi - lo > T::one() {
        let mid = (lo + hi) / T::lit(2.0);
        if on_axis(mid) > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
