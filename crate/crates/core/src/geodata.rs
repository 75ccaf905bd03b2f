//! Spatial grid, exclusion zones, distances and synthetic wind.

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// 2020-01-01T00:00:00Z, the default start of synthetic series.
pub const DEFAULT_START_UNIX: i64 = 1_577_836_800;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon<T> {
    pub lat: T,
    pub lon: T,
}

impl<T: Scalar> LatLon<T> {
    pub fn new(lat: T, lon: T) -> Self {
        Self { lat, lon }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell<T> {
    pub id: u32,
    pub lat: T,
    pub lon: T,
    pub country: String,
    /// Water depth in metres, positive downwards.
    pub depth: T,
    /// Vessels per km² per year.
    pub vessel_density: T,
    pub excluded: bool,
    /// km²
    pub area: T,
    pub wind_series_ref: String,
}

impl<T: Scalar> GridCell<T> {
    pub fn position(&self) -> LatLon<T> {
        LatLon::new(self.lat, self.lon)
    }
}

fn parse_field<T: Scalar>(path: &Path, line: usize, name: &str, raw: Option<&str>) -> Result<T> {
    let raw = raw.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("missing column `{name}`"),
    })?;
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("column `{name}`: `{raw}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("column `{name}` is not finite"),
        });
    }
    Ok(T::lit(v))
}

const GRID_HEADER: [&str; 7] = ["id", "lat", "lon", "country", "depth", "vessel_density", "area"];

/// Reads a grid CSV with header `id,lat,lon,country,depth,vessel_density,area`.
pub fn load_grid<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<GridCell<T>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header = rdr.headers().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != GRID_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`", GRID_HEADER.join(",")),
        });
    }

    let mut cells = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != GRID_HEADER.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} columns, found {}", GRID_HEADER.len(), record.len()),
            });
        }
        let id: u32 = record[0].trim().parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("column `id`: `{}` is not an unsigned integer", &record[0]),
        })?;
        let cell = GridCell {
            id,
            lat: parse_field(path, line, "lat", record.get(1))?,
            lon: parse_field(path, line, "lon", record.get(2))?,
            country: record[3].trim().to_string(),
            depth: parse_field(path, line, "depth", record.get(4))?,
            vessel_density: parse_field(path, line, "vessel_density", record.get(5))?,
            excluded: false,
            area: parse_field(path, line, "area", record.get(6))?,
            wind_series_ref: format!("cell-{id}"),
        };
        if cell.depth <= T::zero() || cell.area <= T::zero() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "depth and area must be positive".into(),
            });
        }
        if cell.vessel_density < T::zero() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "vessel_density must be non-negative".into(),
            });
        }
        if !seen.insert(id) {
            return Err(Error::validation(format!(
                "{}: line {line}: duplicate cell id {id}",
                path.display()
            )));
        }
        cells.push(cell);
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T> {
    vertices: Vec<LatLon<T>>,
}

fn orient<T: Scalar>(a: LatLon<T>, b: LatLon<T>, c: LatLon<T>) -> T {
    (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)
}

fn on_segment<T: Scalar>(p: LatLon<T>, a: LatLon<T>, b: LatLon<T>) -> bool {
    let eps = T::lit(1e-12);
    orient(a, b, p).abs() <= eps * (T::one() + (b.lat - a.lat).abs() + (b.lon - a.lon).abs())
        && p.lat >= a.lat.min(b.lat) - eps
        && p.lat <= a.lat.max(b.lat) + eps
        && p.lon >= a.lon.min(b.lon) - eps
        && p.lon <= a.lon.max(b.lon) + eps
}

fn segments_intersect<T: Scalar>(p1: LatLon<T>, p2: LatLon<T>, q1: LatLon<T>, q2: LatLon<T>) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    on_segment(p1, q1, q2) || on_segment(p2, q1, q2) || on_segment(q1, p1, p2) || on_segment(q2, p1, p2)
}

impl<T: Scalar> Polygon<T> {
    /// Builds a polygon, rejecting fewer than three vertices and
    /// self-intersecting rings. A closing vertex equal to the first is dropped.
    pub fn new(mut vertices: Vec<LatLon<T>>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::validation(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.lat.is_finite() || !v.lon.is_finite()) {
            return Err(Error::validation("polygon vertex is not finite"));
        }
        let n = vertices.len();
        for i in 0..n {
            let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
            for j in i + 1..n {
                // adjacent edges share a vertex by construction
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(Error::validation(format!("polygon edges {i} and {j} intersect")));
                }
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[LatLon<T>] {
        &self.vertices
    }

    /// Ray casting containment; points on the boundary count as inside.
    pub fn contains(&self, p: LatLon<T>) -> bool {
        let vs = &self.vertices;
        let n = vs.len();
        for i in 0..n {
            if on_segment(p, vs[i], vs[(i + 1) % n]) {
                return true;
            }
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (vs[i], vs[j]);
            if (a.lat > p.lat) != (b.lat > p.lat) {
                let lon_cross = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                if p.lon < lon_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

/// Reads exclusion zones: a JSON array of polygons, each `[[lat, lon], ...]`.
pub fn load_zones<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<Polygon<T>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_reader(file).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    raw.into_iter()
        .enumerate()
        .map(|(k, ring)| {
            let vs = ring
                .into_iter()
                .map(|[lat, lon]| LatLon::new(T::lit(lat), T::lit(lon)))
                .collect();
            Polygon::new(vs).map_err(|e| Error::validation(format!("{}: zone {k}: {e}", path.display())))
        })
        .collect()
}

/// Marks each cell excluded iff its centre lies in one of the zones.
pub fn apply_exclusions<T: Scalar>(cells: &[GridCell<T>], zones: &[Polygon<T>]) -> Vec<GridCell<T>> {
    cells
        .iter()
        .map(|c| {
            let mut c = c.clone();
            let p = c.position();
            c.excluded = zones.iter().any(|z| z.contains(p));
            c
        })
        .collect()
}

/// Great-circle distance on a sphere of radius 6371 km.
pub fn haversine_km<T: Scalar>(a: LatLon<T>, b: LatLon<T>) -> T {
    let rad = T::PI() / T::lit(180.0);
    let (phi1, phi2) = (a.lat * rad, b.lat * rad);
    let dphi = (b.lat - a.lat) * rad;
    let dlambda = (b.lon - a.lon) * rad;
    let half = T::lit(0.5);
    let s = (dphi * half).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda * half).sin().powi(2);
    let s = s.min(T::one()).max(T::zero());
    T::lit(2.0 * EARTH_RADIUS_KM) * s.sqrt().asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortSet {
    pub ports: Vec<Site>,
    pub connection_points: Vec<Site>,
}

impl PortSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let set: PortSet = serde_json::from_reader(file).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        set.validate()
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ports.is_empty() || self.connection_points.is_empty() {
            return Err(Error::validation(
                "port set needs at least one port and one connection point",
            ));
        }
        Ok(())
    }

    pub fn nearest_port_km<T: Scalar>(&self, p: LatLon<T>) -> T {
        nearest_km(&self.ports, p)
    }

    pub fn nearest_connection_km<T: Scalar>(&self, p: LatLon<T>) -> T {
        nearest_km(&self.connection_points, p)
    }
}

fn nearest_km<T: Scalar>(sites: &[Site], p: LatLon<T>) -> T {
    sites
        .iter()
        .map(|s| haversine_km(p, LatLon::new(T::lit(s.lat), T::lit(s.lon))))
        .fold(T::infinity(), T::min)
}

/// Hourly wind at hub height.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSeries<T> {
    pub start_unix: i64,
    /// m/s
    pub speed: Vec<T>,
    /// Degrees from north the wind blows from, in [0, 360).
    pub direction: Vec<T>,
}

impl<T: Scalar> WindSeries<T> {
    pub fn new(start_unix: i64, speed: Vec<T>, direction: Vec<T>) -> Result<Self> {
        if speed.len() != direction.len() {
            return Err(Error::validation("speed and direction lengths differ"));
        }
        if speed.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(Error::validation("wind speeds must be finite and non-negative"));
        }
        let full = T::lit(360.0);
        if direction.iter().any(|&d| !(d >= T::zero() && d < full)) {
            return Err(Error::validation("wind directions must lie in [0, 360)"));
        }
        Ok(Self {
            start_unix,
            speed,
            direction,
        })
    }

    pub fn len(&self) -> usize {
        self.speed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speed.is_empty()
    }

    pub fn timestamp(&self, hour: usize) -> i64 {
        self.start_unix + 3600 * hour as i64
    }
}

/// Deterministic Weibull(`shape`, `scale`) speeds with independent uniform
/// directions.
pub fn synth_wind<T: Scalar>(seed: u64, shape: T, scale: T, hours: usize) -> Result<WindSeries<T>> {
    if !(shape > T::zero()) || !(scale > T::zero()) {
        return Err(Error::validation("Weibull shape and scale must be positive"));
    }
    if hours == 0 {
        return Err(Error::validation("synthetic wind needs at least one hour"));
    }
    let dist = Weibull::new(scale.as_f64(), shape.as_f64())
        .map_err(|e| Error::validation(format!("Weibull parameters: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut speed = Vec::with_capacity(hours);
    let mut direction = Vec::with_capacity(hours);
    for _ in 0..hours {
        speed.push(T::lit(dist.sample(&mut rng)));
        let d: f64 = rng.random_range(0.0..360.0);
        // guard against rounding up to 360 in lower precision
        let d = T::lit(d);
        direction.push(if d >= T::lit(360.0) { T::zero() } else { d });
    }
    WindSeries::new(DEFAULT_START_UNIX, speed, direction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, prop_assert_eq, proptest};
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "id,lat,lon,country,depth,vessel_density,area\n";

    #[test]
    fn load_two_rows() {
        let f = write_tmp(&format!(
            "{HEADER}7,53.1,-5.9,IE,25,0.1,100\n9,53.6,-5.8,IE,70,0.0,95.5\n"
        ));
        let cells = load_grid::<f64>(f.path()).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].id, 7);
        assert_eq!(cells[1].id, 9);
        assert!(!cells[0].excluded);
        assert_eq!(cells[1].area, 95.5);
    }

    #[test]
    fn malformed_depth_names_line() {
        let f = write_tmp(&format!(
            "{HEADER}1,53.1,-5.9,IE,25,0.1,100\n2,53.2,-5.9,IE,abc,0.1,100\n"
        ));
        match load_grid::<f64>(f.path()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("depth"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        let f = write_tmp(HEADER);
        assert!(load_grid::<f64>(f.path()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_rejected() {
        let f = write_tmp(&format!(
            "{HEADER}1,53.1,-5.9,IE,25,0.1,100\n1,53.2,-5.9,IE,25,0.1,100\n"
        ));
        assert!(matches!(load_grid::<f64>(f.path()), Err(Error::Validation(_))));
    }

    fn square(lat0: f64, lon0: f64, side: f64) -> Polygon<f64> {
        Polygon::new(vec![
            LatLon::new(lat0, lon0),
            LatLon::new(lat0, lon0 + side),
            LatLon::new(lat0 + side, lon0 + side),
            LatLon::new(lat0 + side, lon0),
        ])
        .unwrap()
    }

    fn cell(id: u32, lat: f64, lon: f64) -> GridCell<f64> {
        GridCell {
            id,
            lat,
            lon,
            country: "XX".into(),
            depth: 30.0,
            vessel_density: 0.0,
            excluded: false,
            area: 1.0,
            wind_series_ref: String::new(),
        }
    }

    #[test]
    fn no_zones_excludes_nothing() {
        let cells = vec![cell(1, 0.0, 0.0), cell(2, 1.0, 1.0)];
        assert!(apply_exclusions(&cells, &[]).iter().all(|c| !c.excluded));
    }

    #[test]
    fn centroid_and_boundary_are_inside() {
        let zone = square(0.0, 0.0, 2.0);
        let cells = vec![
            cell(1, 1.0, 1.0),
            cell(2, 0.0, 1.0),
            cell(3, 2.0, 2.0),
            cell(4, 3.0, 1.0),
        ];
        let out = apply_exclusions(&cells, &[zone]);
        assert_eq!(
            out.iter().map(|c| c.excluded).collect::<Vec<_>>(),
            vec![true, true, true, false]
        );
    }

    #[test]
    fn polygon_validation() {
        assert!(Polygon::new(vec![LatLon::new(0.0, 0.0), LatLon::new(1.0, 1.0)]).is_err());
        // bow tie
        let bow = Polygon::new(vec![
            LatLon::new(0.0, 0.0),
            LatLon::new(1.0, 1.0),
            LatLon::new(1.0, 0.0),
            LatLon::new(0.0, 1.0),
        ]);
        assert!(bow.is_err());
        // explicit closing vertex is accepted
        let closed = Polygon::new(vec![
            LatLon::new(0.0, 0.0),
            LatLon::new(0.0, 1.0),
            LatLon::new(1.0, 0.0),
            LatLon::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(closed.vertices().len(), 3);
    }

    /// Winding number of the ring around `p` (boundary treated as inside).
    fn winding_contains(poly: &Polygon<f64>, p: LatLon<f64>) -> bool {
        let vs = poly.vertices();
        let n = vs.len();
        let mut wn = 0i32;
        for i in 0..n {
            let (a, b) = (vs[i], vs[(i + 1) % n]);
            let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
            let within_box = p.lat >= a.lat.min(b.lat)
                && p.lat <= a.lat.max(b.lat)
                && p.lon >= a.lon.min(b.lon)
                && p.lon <= a.lon.max(b.lon);
            if cross.abs() < 1e-12 && within_box {
                return true;
            }
            if a.lat <= p.lat {
                if b.lat > p.lat && cross > 0.0 {
                    wn += 1;
                }
            } else if b.lat <= p.lat && cross < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    #[test]
    fn ray_casting_matches_winding_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            // convex zones: random points on a circle, sorted by angle
            let zones: Vec<Polygon<f64>> = (0..3)
                .map(|_| {
                    let (clat, clon) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                    let r = rng.random_range(1.0..4.0);
                    let mut angles: Vec<f64> = (0..rng.random_range(3..8))
                        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                        .collect();
                    angles.sort_by(f64::total_cmp);
                    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
                    while angles.len() < 3 {
                        angles.push(angles.last().unwrap() + 1.0);
                    }
                    Polygon::new(
                        angles
                            .iter()
                            .map(|t| LatLon::new(clat + r * t.sin(), clon + r * t.cos()))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect();
            let cells: Vec<GridCell<f64>> = (0..10)
                .map(|i| cell(i, rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)))
                .collect();
            let out = apply_exclusions(&cells, &zones);
            for c in &out {
                let expect = zones.iter().any(|z| winding_contains(z, c.position()));
                assert_eq!(c.excluded, expect, "trial {trial} cell {}", c.id);
            }
        }
    }

    #[test]
    fn haversine_fixed_points() {
        let a = LatLon::new(53.35, -6.26);
        assert_eq!(haversine_km(a, a), 0.0);
        let d = haversine_km(LatLon::new(0.0, 0.0), LatLon::new(0.0, 180.0));
        assert!((d - std::f64::consts::PI * 6371.0).abs() < 1e-6);
        assert!((d - 20015.1).abs() < 0.1);
    }

    #[test]
    fn haversine_agrees_with_law_of_cosines() {
        let (a, b) = (LatLon::new(53.35_f64, -6.26), LatLon::new(51.51, -0.13));
        let r = std::f64::consts::PI / 180.0;
        let c =
            (a.lat * r).sin() * (b.lat * r).sin() + (a.lat * r).cos() * (b.lat * r).cos() * ((b.lon - a.lon) * r).cos();
        let oracle = 6371.0 * c.clamp(-1.0, 1.0).acos();
        assert!((haversine_km(a, b) - oracle).abs() < 0.1);
    }

    #[test]
    fn synth_wind_is_deterministic_and_validated() {
        let a = synth_wind::<f64>(42, 2.0, 10.0, 500).unwrap();
        let b = synth_wind::<f64>(42, 2.0, 10.0, 500).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synth_wind::<f64>(43, 2.0, 10.0, 500).unwrap());
        assert!(synth_wind::<f64>(1, 2.0, 10.0, 0).is_err());
        assert!(synth_wind::<f64>(1, 0.0, 10.0, 10).is_err());
        assert!(synth_wind::<f64>(1, 2.0, -1.0, 10).is_err());
        assert_eq!(a.timestamp(2) - a.timestamp(1), 3600);
    }

    #[test]
    fn synth_wind_mean_matches_weibull_mean() {
        // k = 2: Γ(1 + 1/2) = √π / 2
        let mean_oracle = 10.0 * std::f64::consts::PI.sqrt() / 2.0;
        assert!((mean_oracle - 8.862).abs() < 1e-3);
        let s = synth_wind::<f64>(7, 2.0, 10.0, 100_000).unwrap();
        let mean = s.speed.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - mean_oracle).abs() / mean_oracle < 0.01, "mean {mean}");
    }

    #[test]
    fn synth_wind_passes_ks_test() {
        let (k, lambda) = (2.3, 9.5);
        let s = synth_wind::<f64>(99, k, lambda, 20_000).unwrap();
        let mut xs = s.speed.clone();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = 1.0 - (-(x / lambda).powf(k)).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        // α = 0.01 asymptotic critical value
        assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
        assert!(s.direction.iter().all(|&d| (0.0..360.0).contains(&d)));
    }

    proptest! {
        #[test]
        fn exclusions_are_idempotent(lat in -3.0..3.0f64, lon in -3.0..3.0f64) {
            let zones = vec![square(-1.0, -1.0, 2.0), square(0.5, 0.5, 1.0)];
            let once = apply_exclusions(&[cell(1, lat, lon)], &zones);
            let twice = apply_exclusions(&once, &zones);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn haversine_symmetric_and_triangular(
            a in (-80.0..80.0f64, -180.0..180.0f64),
            b in (-80.0..80.0f64, -180.0..180.0f64),
            c in (-80.0..80.0f64, -180.0..180.0f64),
        ) {
            let (a, b, c) = (LatLon::new(a.0, a.1), LatLon::new(b.0, b.1), LatLon::new(c.0, c.1));
            prop_assert!((haversine_km(a, b) - haversine_km(b, a)).abs() < 1e-9);
            prop_assert!(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-6);
        }
    }
}
