//! Gas composition, interchangeability screening and pipeline physics.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::solver::ConvexConstraint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    H2,
    Ch4,
}

pub const SPECIES: [Species; 2] = [Species::H2, Species::Ch4];

impl Species {
    pub fn index(self) -> usize {
        match self {
            Species::H2 => 0,
            Species::Ch4 => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentConstants {
    pub species: Species,
    pub hhv_mj_per_m3: f64,
    pub specific_gravity: f64,
    pub weaver_flame_speed: f64,
    pub weaver_air_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasConstants {
    pub components: Vec<ComponentConstants>,
}

static BUNDLED: OnceLock<GasConstants> = OnceLock::new();

impl GasConstants {
    pub fn new(components: Vec<ComponentConstants>) -> Result<Self> {
        let table = Self { components };
        table.validate()?;
        Ok(table)
    }

    /// Table shipped in `data/gas_constants.json`.
    pub fn bundled() -> &'static GasConstants {
        BUNDLED.get_or_init(|| {
            let table: GasConstants = serde_json::from_str(include_str!("../../data/gas_constants.json"))
                .expect("bundled gas constants parse");
            table.validate().expect("bundled gas constants are valid");
            table
        })
    }

    pub fn validate(&self) -> Result<()> {
        for s in SPECIES {
            let n = self.components.iter().filter(|c| c.species == s).count();
            if n != 1 {
                return Err(Error::validation(format!("gas constants need exactly one {s:?} entry")));
            }
        }
        for c in &self.components {
            if !(c.hhv_mj_per_m3 > 0.0
                && c.specific_gravity > 0.0
                && c.weaver_flame_speed > 0.0
                && c.weaver_air_ratio > 0.0)
            {
                return Err(Error::validation(format!(
                    "gas constants for {:?} must be positive",
                    c.species
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, s: Species) -> &ComponentConstants {
        self.components
            .iter()
            .find(|c| c.species == s)
            .expect("validated table holds every species")
    }

    pub fn hhv<T: Scalar>(&self, s: Species) -> T {
        T::lit(self.get(s).hhv_mj_per_m3)
    }
}

/// Volume fractions; every derived property is computed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasComposition<T> {
    fractions: [T; 2],
}

impl<T: Scalar> GasComposition<T> {
    pub fn new(h2: T, ch4: T) -> Result<Self> {
        if !(h2 >= T::zero() && ch4 >= T::zero()) {
            return Err(Error::validation("gas fractions must be >= 0"));
        }
        if (h2 + ch4 - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::validation(format!("gas fractions sum to {} not 1", h2 + ch4)));
        }
        Ok(Self { fractions: [h2, ch4] })
    }

    /// Hydrogen-in-methane blend with volume fraction `h2`.
    pub fn blend(h2: T) -> Result<Self> {
        Self::new(h2, T::one() - h2)
    }

    pub fn methane() -> Self {
        Self {
            fractions: [T::zero(), T::one()],
        }
    }

    pub fn hydrogen() -> Self {
        Self {
            fractions: [T::one(), T::zero()],
        }
    }

    pub fn fraction(&self, s: Species) -> T {
        self.fractions[s.index()]
    }

    pub fn h2_fraction(&self) -> T {
        self.fraction(Species::H2)
    }

    fn weighted(&self, f: impl Fn(&ComponentConstants) -> f64, table: &GasConstants) -> T {
        SPECIES
            .iter()
            .map(|&s| self.fraction(s) * T::lit(f(table.get(s))))
            .sum()
    }

    pub fn hhv(&self, table: &GasConstants) -> T {
        self.weighted(|c| c.hhv_mj_per_m3, table)
    }

    pub fn specific_gravity(&self, table: &GasConstants) -> T {
        self.weighted(|c| c.specific_gravity, table)
    }

    pub fn wobbe(&self, table: &GasConstants) -> T {
        self.hhv(table) / self.specific_gravity(table).sqrt()
    }

    /// Weaver flame speed factor relative to pure hydrogen.
    pub fn weaver(&self, table: &GasConstants) -> T {
        let raw = |c: &GasComposition<T>| {
            c.weighted(|k| k.weaver_flame_speed, table) / (c.weighted(|k| k.weaver_air_ratio, table) + T::one())
        };
        raw(self) / raw(&GasComposition::hydrogen())
    }
}

impl<T: Scalar> fmt::Display for GasComposition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H2 {:.4} / CH4 {:.4}", self.fractions[0], self.fractions[1])
    }
}

/// Volumetric flow-weighted mixture of the inflows at a joint.
pub fn mix_at_node<T: Scalar>(inflows: &[(T, GasComposition<T>)]) -> Result<GasComposition<T>> {
    let mut total = T::zero();
    let mut h2 = T::zero();
    for &(q, c) in inflows {
        if !(q >= T::zero()) {
            return Err(Error::validation(format!("negative inflow {q} at mixing node")));
        }
        total += q;
        h2 += q * c.h2_fraction();
    }
    if !(total > T::zero()) {
        return Err(Error::validation("mixing node has no inflow; composition undefined"));
    }
    let x = (h2 / total).min(T::one()).max(T::zero());
    GasComposition::blend(x)
}

pub fn wobbe_index<T: Scalar>(c: &GasComposition<T>) -> T {
    c.wobbe(GasConstants::bundled())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct SecurityRegion<T> {
    pub wobbe_min: T,
    pub wobbe_max: T,
    pub relative_density_min: T,
    pub relative_density_max: T,
    pub weaver_min: T,
    pub weaver_max: T,
    pub h2_fraction_cap: T,
}

impl<T: Scalar> SecurityRegion<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi) in [
            ("wobbe", self.wobbe_min, self.wobbe_max),
            ("relative density", self.relative_density_min, self.relative_density_max),
            ("weaver", self.weaver_min, self.weaver_max),
        ] {
            if !(lo < hi) {
                return Err(Error::validation(format!(
                    "security region {name} bounds must satisfy min < max"
                )));
            }
        }
        if !(self.h2_fraction_cap >= T::zero() && self.h2_fraction_cap <= T::one()) {
            return Err(Error::validation("hydrogen fraction cap must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn with_cap(&self, cap: T) -> Self {
        Self {
            h2_fraction_cap: cap,
            ..self.clone()
        }
    }
}

/// Volumetric blending cap by scenario year: none in 2030, 20 % in 2040,
/// dedicated hydrogen networks in 2050.
pub fn blend_cap_for_year<T: Scalar>(year: u16) -> Result<T> {
    match year {
        2030 => Ok(T::zero()),
        2040 => Ok(T::lit(0.2)),
        2050 => Ok(T::one()),
        other => Err(Error::validation(format!("no blending regime for year {other}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecurityAxis {
    Wobbe,
    RelativeDensity,
    Weaver,
    H2Cap,
}

impl SecurityAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SecurityAxis::Wobbe => "wobbe",
            SecurityAxis::RelativeDensity => "relative_density",
            SecurityAxis::Weaver => "weaver",
            SecurityAxis::H2Cap => "h2_cap",
        }
    }
}

impl fmt::Display for SecurityAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SecurityReport {
    pub violations: Vec<SecurityAxis>,
}

impl SecurityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_security<T: Scalar>(c: &GasComposition<T>, region: &SecurityRegion<T>) -> SecurityReport {
    check_security_with(c, region, GasConstants::bundled())
}

pub fn check_security_with<T: Scalar>(
    c: &GasComposition<T>,
    region: &SecurityRegion<T>,
    table: &GasConstants,
) -> SecurityReport {
    let mut violations = Vec::new();
    let outside = |v: T, lo: T, hi: T| v < lo || v > hi;
    if outside(c.wobbe(table), region.wobbe_min, region.wobbe_max) {
        violations.push(SecurityAxis::Wobbe);
    }
    let sg = c.specific_gravity(table);
    if outside(sg, region.relative_density_min, region.relative_density_max) {
        violations.push(SecurityAxis::RelativeDensity);
    }
    if outside(c.weaver(table), region.weaver_min, region.weaver_max) {
        violations.push(SecurityAxis::Weaver);
    }
    if c.h2_fraction() > region.h2_fraction_cap {
        violations.push(SecurityAxis::H2Cap);
    }
    SecurityReport { violations }
}

/// `p_from² − p_to² − K·f·|f|`; zero on physical states.
pub fn weymouth_residual<T: Scalar>(p_from: T, p_to: T, flow: T, k: T) -> T {
    p_from * p_from - p_to * p_to - k * flow * flow.abs()
}

/// One inequality `cx·x + cy·y + cw·w ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCut<T> {
    pub cx: T,
    pub cy: T,
    pub cw: T,
    pub rhs: T,
}

impl<T: Scalar> EnvelopeCut<T> {
    pub fn holds(&self, x: T, y: T, w: T, tol: T) -> bool {
        self.cx * x + self.cy * y + self.cw * w <= self.rhs + tol
    }
}

/// Convex hull of `w = x·y` over the box, as four inequalities
/// (two under-estimators, two over-estimators).
pub fn mccormick<T: Scalar>(x_bounds: (T, T), y_bounds: (T, T)) -> Result<[EnvelopeCut<T>; 4]> {
    let (xl, xu) = x_bounds;
    let (yl, yu) = y_bounds;
    if !(xl <= xu && yl <= yu) || ![xl, xu, yl, yu].iter().all(|v| v.is_finite()) {
        return Err(Error::validation("McCormick box must be finite with lo <= hi"));
    }
    let one = T::one();
    Ok([
        EnvelopeCut {
            cx: yl,
            cy: xl,
            cw: -one,
            rhs: xl * yl,
        },
        EnvelopeCut {
            cx: yu,
            cy: xu,
            cw: -one,
            rhs: xu * yu,
        },
        EnvelopeCut {
            cx: -yl,
            cy: -xu,
            cw: one,
            rhs: -xu * yl,
        },
        EnvelopeCut {
            cx: -yu,
            cy: -xl,
            cw: one,
            rhs: -xl * yu,
        },
    ])
}

/// Interval of `w` the envelope admits at `(x, y)`.
pub fn envelope_interval<T: Scalar>(cuts: &[EnvelopeCut<T>; 4], x: T, y: T) -> (T, T) {
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for c in cuts {
        let bound = (c.rhs - c.cx * x - c.cy * y) / c.cw;
        if c.cw < T::zero() {
            lo = lo.max(bound);
        } else {
            hi = hi.min(bound);
        }
    }
    (lo, hi)
}

/// `K·F² ≤ π_from − π_to` for a pipe with fixed flow direction, where `F`
/// is a linear expression in the model variables and `π` are squared
/// pressures. Values are divided by `scale` (the squared pressure ceiling).
#[derive(Debug, Clone)]
pub struct WeymouthCone<T> {
    pub name: String,
    pub flow_terms: Vec<(usize, T)>,
    pub pi_from: usize,
    pub pi_to: usize,
    pub k: T,
    pub scale: T,
}

impl<T: Scalar> WeymouthCone<T> {
    pub fn flow(&self, x: &[T]) -> T {
        self.flow_terms.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

impl<T: Scalar> ConvexConstraint<T> for WeymouthCone<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, x: &[T]) -> T {
        let f = self.flow(x);
        (self.k * f * f - x[self.pi_from] + x[self.pi_to]) / self.scale
    }

    fn gradient(&self, x: &[T]) -> Option<Vec<(usize, T)>> {
        let f = self.flow(x);
        let mut g: Vec<(usize, T)> = self
            .flow_terms
            .iter()
            .map(|&(j, c)| (j, T::lit(2.0) * self.k * f * c / self.scale))
            .collect();
        g.push((self.pi_from, -T::one() / self.scale));
        g.push((self.pi_to, T::one() / self.scale));
        Some(g)
    }
}

pub fn soc_relax<T: Scalar>(
    name: impl Into<String>,
    k: T,
    flow_terms: Vec<(usize, T)>,
    pi_from: usize,
    pi_to: usize,
    p_max: T,
) -> WeymouthCone<T> {
    WeymouthCone {
        name: name.into(),
        flow_terms,
        pi_from,
        pi_to,
        k,
        scale: p_max * p_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{oa_cut, CutOutcome};
    use approx::assert_relative_eq;
    use proptest::{prop_assert, proptest};

    fn region() -> SecurityRegion<f64> {
        SecurityRegion {
            wobbe_min: 47.0,
            wobbe_max: 56.0,
            relative_density_min: 0.3,
            relative_density_max: 0.7,
            weaver_min: 0.1,
            weaver_max: 0.3,
            h2_fraction_cap: 0.2,
        }
    }

    #[test]
    fn bundled_table_values() {
        let t = GasConstants::bundled();
        assert_eq!(t.get(Species::Ch4).hhv_mj_per_m3, 39.8);
        assert_eq!(t.get(Species::Ch4).specific_gravity, 0.5537);
    }

    #[test]
    fn methane_wobbe() {
        let t = GasConstants::bundled();
        let expect = t.get(Species::Ch4).hhv_mj_per_m3 / t.get(Species::Ch4).specific_gravity.sqrt();
        assert_eq!(wobbe_index(&GasComposition::<f64>::methane()), expect);
        assert_relative_eq!(expect, 53.486_700_802_381_67, max_relative = 1e-12);
    }

    #[test]
    fn wobbe_scales_with_table() {
        let t = GasConstants::bundled();
        let scaled = GasConstants::new(
            t.components
                .iter()
                .map(|c| ComponentConstants {
                    hhv_mj_per_m3: 4.0 * c.hhv_mj_per_m3,
                    specific_gravity: 4.0 * c.specific_gravity,
                    ..c.clone()
                })
                .collect(),
        )
        .unwrap();
        let c = GasComposition::blend(0.3).unwrap();
        assert_relative_eq!(c.wobbe(&scaled), 2.0 * c.wobbe(t), max_relative = 1e-14);
    }

    #[test]
    fn blend_wobbe_regression() {
        // 0.2·12.75 + 0.8·39.8 over sqrt(0.2·0.0696 + 0.8·0.5537)
        let w = wobbe_index(&GasComposition::blend(0.2).unwrap());
        assert_relative_eq!(w, 34.39 / 0.45688f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn weaver_is_relative_to_hydrogen() {
        let t = GasConstants::bundled();
        assert_relative_eq!(GasComposition::<f64>::hydrogen().weaver(t), 1.0);
        let ch4 = GasComposition::<f64>::methane().weaver(t);
        assert_relative_eq!(ch4, (148.0 / 10.547) / (339.0 / 3.387), max_relative = 1e-12);
    }

    #[test]
    fn mixing() {
        let c = GasComposition::blend(0.37).unwrap();
        assert_eq!(mix_at_node(&[(5.0, c)]).unwrap(), c);
        let even = mix_at_node(&[(2.0, GasComposition::hydrogen()), (2.0, GasComposition::methane())]).unwrap();
        assert_eq!(even.h2_fraction(), 0.5);
        let m = mix_at_node(&[
            (3.0, GasComposition::blend(0.1).unwrap()),
            (1.0, GasComposition::blend(0.3).unwrap()),
        ])
        .unwrap();
        assert_relative_eq!(m.h2_fraction(), 0.15, max_relative = 1e-12);
        assert!(mix_at_node(&[(0.0, c)]).is_err());
        assert!(mix_at_node::<f64>(&[]).is_err());
        assert!(GasComposition::new(0.5, 0.6).is_err());
    }

    #[test]
    fn security_screening() {
        let r = region();
        assert!(check_security(&GasComposition::methane(), &r).passed());
        let rep = check_security(&GasComposition::blend(0.25).unwrap(), &r);
        assert!(rep.violations.contains(&SecurityAxis::H2Cap));
        assert_eq!(SecurityAxis::H2Cap.as_str(), "h2_cap");
    }

    #[test]
    fn security_edge_by_bisection() {
        // tighten the Wobbe floor so it binds before the hydrogen cap
        let mut r = region();
        r.h2_fraction_cap = 1.0;
        r.wobbe_min = 51.0;
        let ok = |x: f64| check_security(&GasComposition::blend(x).unwrap(), &r).passed();
        let (mut lo, mut hi) = (0.0, 0.6);
        assert!(ok(lo) && !ok(hi));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        assert!(ok(lo));
        let beyond = check_security(&GasComposition::blend(lo + 1e-9).unwrap(), &r);
        assert_eq!(beyond.violations, vec![SecurityAxis::Wobbe]);
    }

    #[test]
    fn region_validation() {
        let mut r = region();
        assert!(r.validate().is_ok());
        r.weaver_min = 0.5;
        assert!(r.validate().is_err());
        assert_eq!(blend_cap_for_year::<f64>(2040).unwrap(), 0.2);
        assert!(blend_cap_for_year::<f64>(2045).is_err());
    }

    #[test]
    fn weymouth_examples() {
        assert_eq!(weymouth_residual(50.0, 50.0, 0.0, 0.2), 0.0);
        let f = ((70.0f64 * 70.0 - 60.0 * 60.0) / 0.013).sqrt();
        assert_relative_eq!(f, 100_000f64.sqrt(), max_relative = 1e-12);
        assert!(weymouth_residual(70.0, 60.0, f, 0.013).abs() < 1e-9);
        let r = weymouth_residual(70.0, 60.0, 120.0, 0.013);
        assert_eq!(weymouth_residual(60.0, 70.0, -120.0, 0.013), -r);
    }

    #[test]
    fn mccormick_corners_and_midpoint() {
        let cuts = mccormick((0.0, 1.0), (0.0, 1.0)).unwrap();
        for (x, y) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            let (lo, hi) = envelope_interval(&cuts, x, y);
            assert_eq!(lo, x * y);
            assert_eq!(hi, x * y);
        }
        let (lo, hi) = envelope_interval(&cuts, 0.5, 0.5);
        assert_eq!((lo, hi), (0.0, 0.5));
        assert!(cuts.iter().all(|c| c.holds(0.5, 0.5, 0.25, 0.0)));
        assert!(mccormick((1.0, 0.0), (0.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn mccormick_shrinking_box_tightens(
            x in 0.2f64..0.8, y in 1.0f64..9.0, a in 0.0f64..0.2, b in 0.0f64..1.0
        ) {
            let outer = mccormick((0.0, 1.0), (0.0, 10.0)).unwrap();
            let inner = mccormick((x - a, x + a), (y - b, y + b)).unwrap();
            let (ol, oh) = envelope_interval(&outer, x, y);
            let (il, ih) = envelope_interval(&inner, x, y);
            prop_assert!(il >= ol - 1e-12 && ih <= oh + 1e-12);
            prop_assert!(il <= x * y + 1e-12 && x * y <= ih + 1e-12);
        }

        #[test]
        fn cone_contains_physical_points(p_to in 30.0f64..60.0, f in 0.0f64..150.0, k in 0.05f64..0.5) {
            let pf = (p_to * p_to + k * f * f).sqrt();
            let cone = soc_relax("p", k, vec![(0, 1.0)], 1, 2, 80.0);
            let x = [f, pf * pf, p_to * p_to];
            prop_assert!(cone.value(&x).abs() < 1e-9);
            prop_assert!(matches!(oa_cut(&cone, &x), CutOutcome::Satisfied));
        }
    }

    #[test]
    fn zero_flow_satisfies_cone() {
        let cone = soc_relax("p", 0.3, vec![(0, 1.0), (1, 1.0)], 2, 3, 70.0);
        assert!(cone.value(&[0.0, 0.0, 60.0 * 60.0, 40.0 * 40.0]) < 0.0);
    }
}
