use std::path::Path;
use std::process::Command as Process;

use proptest::prelude::*;
use qwiretap_cli::config::{parse_config, Command};
use qwiretap_cli::run::{execute, load_error_matrix, run, RunError, COVERING_HEADER, REGION_HEADER};
use serde_json::Value;

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn region_run_writes_ten_columns_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("command=region\nchannel=amplitude_damping\ngamma=0.3\nmodel=both").unwrap();
    run(&cfg, dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("region.csv"));
    assert_eq!(header, REGION_HEADER);
    assert_eq!(rows.len(), 1001);
    assert!(rows.iter().all(|r| r.len() == 10));
    let s = summary(dir.path());
    assert!(s["version"].as_str().unwrap().starts_with("qwiretap "));
    assert_eq!(s["config"].as_str().unwrap(), cfg.to_text());
    let models = s["result"]["models"].as_array().unwrap();
    assert_eq!(models.len(), 2);
    for m in models {
        for key in ["frontier", "excess_extreme", "gap_report", "time_division"] {
            assert!(!m[key].is_null(), "{key}");
        }
        assert!(m["time_division"]["r_star"].is_number() && m["time_division"]["rp_star"].is_number());
    }
}

#[test]
fn frontier_points_are_covered_by_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("command=region\ngamma=0.3\nbeta_grid=uniform:201").unwrap();
    run(&cfg, dir.path()).unwrap();
    let (_, rows) = read_csv(&dir.path().join("region.csv"));
    let num: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v.parse().unwrap()).collect()).collect();
    let s = summary(dir.path());
    for m in s["result"]["models"].as_array().unwrap() {
        let (ri, rpi) = if m["model"] == "interception" { (6, 7) } else { (8, 9) };
        for p in m["frontier"].as_array().unwrap() {
            let (r, rp) = (p["r"].as_f64().unwrap(), p["r_prime"].as_f64().unwrap());
            assert!(num.iter().any(|row| r <= row[ri] && rp <= row[rpi]), "{p}");
        }
    }
}

#[test]
fn covering_run_has_one_row_per_rate_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("command=covering\ngamma=0.3\nbeta=1\nn=3\nr0_grid=0,1,2\nseeds=0..4\nkey_counts=1,full").unwrap();
    run(&cfg, dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("covering.csv"));
    assert_eq!(header, COVERING_HEADER);
    assert_eq!(rows.len(), 12);
    let pairs: Vec<(String, String)> = rows.iter().map(|r| (r[1].clone(), r[2].clone())).collect();
    let mut dedup = pairs.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(dedup.len(), 12);
    let (_, excess) = read_csv(&dir.path().join("excess.csv"));
    assert_eq!(excess.len(), 8);
    assert!(excess.iter().filter(|r| r[1] == "full").all(|r| r[3] == "0"));
    assert_eq!(summary(dir.path())["seeds"].as_array().unwrap().len(), 4);
}

#[test]
fn empty_grid_fails_before_any_computation() {
    let e = parse_config("command=region\ngamma=0.3\nbeta_grid=").unwrap_err();
    let err = RunError::from(e);
    assert_eq!(err.exit_code(), 2);
    let rec: Value = serde_json::from_str(&err.record()).unwrap();
    assert_eq!(rec["error"], "config");
    assert_eq!(rec["issues"][0]["key"], "beta_grid");
}

#[test]
fn guard_violations_map_to_exit_three() {
    let cfg = parse_config("command=covering\ngamma=0.3\nbeta=1\nn=3\nr0_grid=6\nseeds=0..1").unwrap();
    let err = execute(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn unreachable_bound_reports_numerical_failure_with_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("errors.csv");
    // one spike column at 0.2 with row means 0.04; a single permutation
    // cannot dilute it below 4 * 0.04
    let mut text = String::from("m,m_prime,e\n");
    for m in 0..4 {
        for mp in 0..5 {
            text += &format!("{m},{mp},{}\n", if mp == 0 { 0.2 } else { 0.0 });
        }
    }
    std::fs::write(&matrix, text).unwrap();
    let loaded = load_error_matrix(&matrix).unwrap();
    assert_eq!((loaded.rows(), loaded.cols()), (4, 5));
    let cfg = parse_config(&format!(
        "command=permutation\nseed=1\nlambda=0.04\nn=1\nretry_budget=5\nmatrix={}",
        matrix.display()
    ))
    .unwrap();
    let out = dir.path().join("out");
    let err = run(&cfg, &out).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    let s = summary(&out);
    let f = &s["result"]["fixtures"][0];
    assert!(f["max_error"].is_null());
    assert_eq!(f["attempts"], 5);
    assert!((f["best_failed"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let configs = [
        "command=region\ngamma=0.3\nbeta_grid=uniform:101",
        "command=sweep\ngamma_grid=0.1,0.5\nbeta_grid=uniform:21\nmodel=passive",
        "command=covering\ngamma=0.3\nbeta=1\nn=2\nr0_grid=0,1\nseeds=0..3",
        "command=permutation\nseed=5\nfixtures=3",
    ];
    for text in configs {
        let cfg = parse_config(text).unwrap();
        let a = execute(&cfg).unwrap().artifacts;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| execute(&cfg).unwrap().artifacts);
        assert_eq!(a, b, "{text}");
    }
}

#[test]
fn binary_reports_errors_as_json_with_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_qwiretap");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "gamma=1.5\nunknown=1\n").unwrap();
    let out = Process::new(exe).args(["region", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let rec: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(rec["issues"].as_array().unwrap().len(), 2);

    let guard = dir.path().join("guard.cfg");
    std::fs::write(&guard, "gamma=0.3\nbeta=1\nseeds=0..2\nn=7\n").unwrap();
    let out = Process::new(exe).args(["covering", "--config"]).arg(&guard).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let good = dir.path().join("good.cfg");
    std::fs::write(&good, "gamma=0.3\nbeta_grid=uniform:5\n").unwrap();
    let target = dir.path().join("res");
    let out = Process::new(exe)
        .args(["region", "--threads", "2", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&target)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("region.csv").exists() && target.join("summary.json").exists());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parsed_configs_round_trip(
        gamma in 0.0f64..=1.0,
        betas in proptest::collection::vec(0.0f64..=1.0, 1..6),
        r_floor in 0.0f64..1.0,
        lo in 0u64..1000,
        len in 1u64..50,
        cmd in 0usize..4,
    ) {
        let command = [Command::Region, Command::Sweep, Command::Covering, Command::Permutation][cmd];
        let grid = betas.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",");
        let text = format!(
            "command={}\ngamma={gamma}\ngamma_grid={gamma}\nbeta={}\nbeta_grid={grid}\nr_floor={r_floor}\nseeds={lo}..{}\nseed={lo}",
            command.name(), betas[0], lo + len
        );
        let c = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }
}
