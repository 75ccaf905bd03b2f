mod common;

use common::wake_oracle;
use offshore_h2::geodata::WindSeries;
use offshore_h2::wake::{build_wake_tree, effective_speeds, farm_power, Layout, WakeSettings};

const DIRECTIONS: [f64; 8] = [0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0];

#[test]
fn zero_cutoff_tree_equals_enumeration() {
    let curve = wake_oracle::reference_curve();
    let mut rng = wake_oracle::rng(2024);
    for _ in 0..5 {
        let pts = wake_oracle::random_layout(&mut rng, 12, curve.rotor_diameter);
        let layout = Layout::new(pts.clone(), curve.clone()).unwrap();
        for dir in DIRECTIONS {
            let graph = build_wake_tree(&layout, dir, 0.05, 0.0);
            for free in [5.0, 8.5, 11.0, 16.0] {
                let tree = effective_speeds(&graph, &curve, free);
                let oracle = wake_oracle::speeds(&pts, &curve, dir, 0.05, free);
                for (a, b) in tree.iter().zip(&oracle) {
                    // equal up to summation order
                    assert!((a - b).abs() <= 1e-12 * b.abs(), "dir {dir} free {free}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn pruned_tree_within_one_percent() {
    let curve = wake_oracle::reference_curve();
    let mut rng = wake_oracle::rng(7);
    for n in [4, 9, 16, 25] {
        let pts = wake_oracle::random_layout(&mut rng, n, curve.rotor_diameter);
        let layout = Layout::new(pts.clone(), curve.clone()).unwrap();
        for dir in DIRECTIONS {
            let graph = build_wake_tree(&layout, dir, 0.05, 1e-3);
            for free in [7.0, 10.0, 12.5] {
                let tree: f64 = effective_speeds(&graph, &curve, free)
                    .iter()
                    .map(|&v| curve.power_at(v))
                    .sum();
                let oracle = wake_oracle::farm_power(&pts, &curve, dir, 0.05, free);
                assert!(
                    (tree - oracle).abs() <= 0.01 * oracle,
                    "n {n} dir {dir}: {tree} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn three_by_three_grid_from_west() {
    let curve = wake_oracle::reference_curve();
    let layout = Layout::grid(3, 3, 1200.0, curve.clone()).unwrap();
    let series = WindSeries::new(0, vec![11.0; 4], vec![270.0; 4]).unwrap();
    let settings = WakeSettings {
        influence_cutoff: 0.0,
        ..WakeSettings::default()
    };
    let out = farm_power(&layout, &series, &settings).unwrap();
    let oracle = wake_oracle::farm_power(layout.turbines(), &curve, 270.0, 0.05, 11.0);
    // frozen from the enumeration oracle
    const EXPECTED_MW: f64 = 101.963_662_492_787_01;
    assert!((oracle - EXPECTED_MW).abs() < 1e-9, "oracle drifted: {oracle}");
    for p in out {
        assert!((p - EXPECTED_MW).abs() < 1e-9, "{p}");
    }
}
