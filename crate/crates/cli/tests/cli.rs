use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use offshore_h2::geodata::{load_grid, PortSet};
use offshore_h2::lcoh::evaluate_cell;
use offshore_h2_cli::{cmd_lcoh, cmd_wake, demo_config, CostsFile, RunConfig};
use serde_json::Value;

fn demo_dir() -> PathBuf {
    demo_config().parent().unwrap().to_path_buf()
}

/// Writes a copy of the demo config into `dir` with absolute input paths,
/// output under `dir/out`, and `edit` applied.
fn config_in(dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(demo_config()).unwrap()).unwrap();
    for key in ["grid", "zones", "ports", "costs", "turbine", "system", "trade"] {
        let p = demo_dir().join(v[key].as_str().unwrap());
        v[key] = Value::String(p.to_string_lossy().into_owned());
    }
    v["out"] = Value::String(dir.join("out").to_string_lossy().into_owned());
    v["wind"]["hours"] = Value::from(500);
    edit(&mut v);
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offshore-h2"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn wake_writes_one_row_per_usable_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_in(tmp.path(), |_| {});
    let out = run(&["wake"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(tmp.path(), "capacity_factors.csv");
    // 20 demo cells, one inside the exclusion zone
    assert_eq!(text.lines().count(), 1 + 19);
}

#[test]
fn missing_grid_is_input_error_naming_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_in(tmp.path(), |v| v["grid"] = Value::from("/nonexistent/grid.csv"));
    let out = run(&["wake"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/grid.csv"));
}

#[test]
fn bad_year_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_in(tmp.path(), |_| {});
    let out = run(&["wake", "--year", "2035"], &cfg);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let cfg = config_in(dir.path(), |_| {});
        assert!(run(&["lcoh", "--seed", "7"], &cfg).status.success());
    }
    for f in [
        "capacity_factors.csv",
        "lcoh_map.csv",
        "supply_curve_IE.csv",
        "supply_curve_GB_twh.csv",
    ] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let cfg = config_in(c.path(), |_| {});
    assert!(run(&["wake", "--seed", "8"], &cfg).status.success());
    assert_ne!(
        read(a.path(), "capacity_factors.csv"),
        read(c.path(), "capacity_factors.csv")
    );
}

#[test]
fn one_country_grid_gives_one_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = tmp.path().join("grid.csv");
    let text = fs::read_to_string(demo_dir().join("grid.csv")).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.contains(",GB,")).collect();
    fs::write(&grid, kept.join("\n")).unwrap();
    let cfg = config_in(tmp.path(), |v| {
        v["grid"] = Value::from(grid.to_string_lossy().into_owned())
    });
    assert!(run(&["lcoh"], &cfg).status.success());
    let curves: Vec<_> = fs::read_dir(tmp.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("supply_curve_") && !n.ends_with("_twh.csv"))
        .collect();
    assert_eq!(curves, vec!["supply_curve_IE.csv".to_string()]);
}

#[test]
fn all_cells_excluded_gives_empty_map() {
    let tmp = tempfile::tempdir().unwrap();
    let zones = tmp.path().join("zones.json");
    fs::write(&zones, "[[[40,-20],[60,-20],[60,10],[40,10]]]").unwrap();
    let cfg = config_in(tmp.path(), |v| {
        v["zones"] = Value::from(zones.to_string_lossy().into_owned())
    });
    let out = run(&["lcoh"], &cfg);
    assert!(out.status.success());
    assert_eq!(read(tmp.path(), "lcoh_map.csv").lines().count(), 1);
}

#[test]
fn lcoh_stage_equals_direct_module_calls() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig::load(&config_in(tmp.path(), |_| {})).unwrap();
    let wake = cmd_wake(&cfg).unwrap();
    let stage = cmd_lcoh(&cfg, &wake).unwrap();
    let costs = CostsFile::load(&cfg.costs).unwrap();
    let ports = PortSet::load(&cfg.ports).unwrap();
    let cells = load_grid::<f64>(&cfg.grid).unwrap();
    for w in &wake.wind {
        let cell = cells.iter().find(|c| c.id == w.cell.id).unwrap();
        let direct = evaluate_cell(
            cell,
            &w.cf_series,
            &costs.cost_model,
            &costs.electrolyser,
            &ports,
            cfg.year,
        )
        .unwrap();
        let staged = stage.results.iter().find(|r| r.cell_id == cell.id);
        assert_eq!(direct.as_ref(), staged);
    }
    let map = read(tmp.path(), "lcoh_map.csv");
    assert_eq!(map.lines().count(), 1 + stage.results.len());
}

#[test]
fn infeasible_dispatch_exits_with_model_code() {
    let tmp = tempfile::tempdir().unwrap();
    let mut system: Value = serde_json::from_str(&fs::read_to_string(demo_dir().join("system.json")).unwrap()).unwrap();
    for day in system["days"].as_array_mut().unwrap() {
        for row in day["demand"].as_array_mut().unwrap() {
            for v in row.as_array_mut().unwrap() {
                *v = Value::from(v.as_f64().unwrap() * 10.0);
            }
        }
    }
    let path = tmp.path().join("system.json");
    fs::write(&path, system.to_string()).unwrap();
    let cfg = config_in(tmp.path(), |v| {
        v["system"] = Value::from(path.to_string_lossy().into_owned())
    });
    let out = run(&["dispatch"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dispatch day"));
}

#[test]
fn pipeline_runs_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_in(tmp.path(), |_| {});
    let out = run(&["pipeline"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names = [
        "dispatch_summary.json",
        "trade_summary.json",
        "trade_2040_flows.csv",
        "trade_2040_sankey.json",
        "trade_2040_ledger.csv",
    ];
    let first: Vec<String> = names.iter().map(|n| read(tmp.path(), n)).collect();
    assert!(run(&["pipeline"], &cfg).status.success());
    for (n, text) in names.iter().zip(&first) {
        assert_eq!(&read(tmp.path(), n), text, "{n}");
    }
    let sankey: Value = serde_json::from_str(&first[3]).unwrap();
    assert!(sankey["nodes"].is_array() && sankey["links"].is_array());
    assert!(first[2].starts_with("from,to,twh"));
}

#[test]
fn failed_stage_leaves_earlier_outputs_intact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_in(tmp.path(), |_| {});
    assert!(run(&["pipeline"], &cfg).status.success());
    let before = read(tmp.path(), "trade_summary.json");
    let broken = tmp.path().join("trade.json");
    fs::write(&broken, "{ not json").unwrap();
    let cfg = config_in(tmp.path(), |v| {
        v["trade"] = Value::from(broken.to_string_lossy().into_owned())
    });
    let out = run(&["pipeline"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trade.json"));
    assert_eq!(read(tmp.path(), "trade_summary.json"), before);
    let leftovers = fs::read_dir(tmp.path().join("out"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
}
