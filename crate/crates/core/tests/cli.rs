use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use vlc_shaper::experiment::{load_config, pmf_report, read_pmf_report, sweep_points, ExperimentConfig, Method};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vlc-shaper"))
}

fn preset_json(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(preset(name)).unwrap()).unwrap()
}

/// The reference room with a short sweep and a small firefly population.
fn small_config(method: &str, m: usize, points: &[f64]) -> Value {
    let mut v = preset_json("paper_fig2.json");
    v["method"] = json!(method);
    v["modulation"]["m"] = json!(m);
    v["noise"]["a_over_sigma_db"] = json!(points);
    v["fa"]["population"] = json!(6);
    v["fa"]["generations"] = json!(3);
    v["quadrature"]["points_per_sigma"] = json!(8);
    v
}

fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Every output file as bytes, with the wall-clock column blanked.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(dir).unwrap().display().to_string();
            let mut bytes = fs::read(&path).unwrap();
            if rel == "sweep.csv" {
                let mut rdr = csv::Reader::from_reader(bytes.as_slice());
                let header = rdr.headers().unwrap().clone();
                let col = header.iter().position(|h| h == "wall_ms").unwrap();
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&header).unwrap();
                for r in rdr.records() {
                    let r = r.unwrap();
                    w.write_record(r.iter().enumerate().map(|(i, s)| if i == col { "" } else { s })).unwrap();
                }
                bytes = w.into_inner().unwrap();
            }
            files.push((rel, bytes));
        }
    }
    files.sort();
    files
}

#[test]
fn shipped_preset_loads_the_reference_room() {
    let cfg = load_config(&preset("paper_fig2.json")).unwrap();
    assert_eq!(cfg.room.leds.len(), 4);
    assert_eq!(cfg.room.users, vec![[1.25, -1.6, 0.5], [-2.25, -0.33, 0.5]]);
    assert_eq!(cfg.modulation.m, 8);
    assert_eq!(cfg.fa.population, 100);
    assert_eq!(cfg.fa.generations, 35);
    for name in ["paper_fig3.json", "paper_fig4.json"] {
        load_config(&preset(name)).unwrap();
    }
}

#[test]
fn missing_room_is_reported_by_name() {
    let mut v = preset_json("paper_fig2.json");
    v.as_object_mut().unwrap().remove("room");
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("room"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v = preset_json("paper_fig2.json");
    v["roooms"] = json!([]);
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("roooms"), "{err}");

    let mut v = preset_json("paper_fig2.json");
    v["fa"]["alpha"] = json!(0.5);
    assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
}

#[test]
fn validation_errors_carry_field_paths() {
    let mut v = preset_json("paper_fig2.json");
    v["noise"]["a_over_sigma_db"] = json!([]);
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("noise.a_over_sigma_db"), "{err}");

    let mut v = preset_json("paper_fig2.json");
    v["fa"]["alpha0"] = json!(1.5);
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("fa"), "{err}");
}

#[test]
fn sweeps_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for method in ["zf_ao", "fa"] {
        let cfg = write_config(tmp.path(), &small_config(method, 4, &[56.0, 60.0]));
        let a = tmp.path().join(format!("{method}_a"));
        let b = tmp.path().join(format!("{method}_b"));
        for out in [&a, &b] {
            run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        }
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        assert!(sa.iter().any(|(f, _)| f == "sweep.csv"));
        assert!(sa.iter().any(|(f, _)| f == "trace_60.csv"));
        assert!(sa.iter().any(|(f, _)| f.ends_with("pmf_2.csv")));
        assert_eq!(sa, sb, "{method} outputs differ between identical runs");
    }
}

#[test]
fn sweep_csv_has_the_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config("uniform_baseline_zf", 4, &[58.0]));
    let out = tmp.path().join("out");
    run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let mut rdr = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["method", "a_over_sigma_db", "seed", "sum_rate_bits", "rate_user_1", "rate_user_2", "wall_ms", "trace_file"]
    );
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "uniform_baseline_zf");
    let total: f64 = row[3].parse().unwrap();
    let parts: f64 = row[4].parse::<f64>().unwrap() + row[5].parse::<f64>().unwrap();
    assert!((total - parts).abs() < 1e-12);

    let mut pmf = csv::Reader::from_path(out.join("point_58").join("pmf_1.csv")).unwrap();
    assert_eq!(pmf.headers().unwrap().iter().collect::<Vec<_>>(), ["amplitude", "probability"]);
    let probs: Vec<f64> = pmf.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    let mut trace = csv::Reader::from_path(out.join("trace_58.csv")).unwrap();
    assert_eq!(
        trace.headers().unwrap().iter().collect::<Vec<_>>(),
        ["outer_iter", "inner_iter", "sum_rate_bits", "max_row_l1", "zf_residual"]
    );
}

#[test]
fn uniform_baseline_reports_zero_tv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config("uniform_baseline_zf", 8, &[60.0]));
    let out = tmp.path().join("out");
    run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report = read_pmf_report(&out, 60.0).unwrap();
    for u in &report.users {
        assert_eq!(u.tv_to_uniform, 0.0);
        assert_eq!(u.active_symbols, 8);
    }
    let text = run_ok(&["pmf-report", "--out", out.to_str().unwrap(), "--point", "60"]);
    assert!(text.contains("TV to uniform 0.0000"), "{text}");

    let missing = bin().args(["pmf-report", "--out", out.to_str().unwrap(), "--point", "61"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn binary_uniform_link_saturates_at_one_bit() {
    let mut v = small_config("uniform_baseline_zf", 2, &[90.0]);
    v["room"]["users"] = json!([[0.0, 0.0, 0.5]]);
    let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
    let result = sweep_points(&cfg).unwrap();
    let p = result.point(90.0).unwrap();
    assert!((p.sum_rate - 1.0).abs() < 1e-6, "{}", p.sum_rate);
    let report = pmf_report(&result, 90.0).unwrap();
    assert_eq!(report.users[0].tv_to_uniform, 0.0);
}

#[test]
fn cli_overrides_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config("zf_ao", 4, &[58.0]));
    let cfg = cfg.to_str().unwrap();

    let dump = run_ok(&["channel-dump", "--config", cfg]);
    assert_eq!(dump.lines().next(), Some("user,led,gain"));
    assert_eq!(dump.lines().count(), 1 + 2 * 4);

    let text = run_ok(&["optimize", "--config", cfg, "--method", "uniform_baseline_zf", "--db", "62"]);
    assert!(text.contains("uniform_baseline_zf"), "{text}");
    assert!(text.contains("62 dB"), "{text}");

    let out = tmp.path().join("seeded");
    run_ok(&["sweep", "--config", cfg, "--seed", "99", "--db-convention", "amplitude", "--out", out.to_str().unwrap()]);
    assert!(out.join("sweep.csv").exists());

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\"roooms\": 1}").unwrap();
    let status = bin().args(["sweep", "--config", bad.to_str().unwrap()]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn failed_points_give_exit_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    // a single LED cannot zero-force two users
    let mut v = small_config("zf_ao", 2, &[58.0]);
    v["room"]["leds"] = json!([[0.0, 0.0, 3.0]]);
    let cfg = write_config(tmp.path(), &v);
    let out = tmp.path().join("out");
    let run = bin().args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(out.join("failures.csv").exists());
}

#[test]
fn methods_round_trip_through_names() {
    for (m, name) in [
        (Method::Fa, "fa"),
        (Method::ZfAo, "zf_ao"),
        (Method::UniformBaselineFa, "uniform_baseline_fa"),
        (Method::UniformBaselineZf, "uniform_baseline_zf"),
    ] {
        assert_eq!(m.name(), name);
        assert_eq!(serde_json::from_value::<Method>(json!(name)).unwrap(), m);
    }
}

#[test]
fn documented_config_example_parses() {
    let readme = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let start = readme.find("```json").unwrap() + "```json".len();
    let end = start + readme[start..].find("```").unwrap();
    let cfg = ExperimentConfig::from_json(&readme[start..end]).unwrap();
    assert_eq!(cfg.method, Method::ZfAo);
    assert_eq!(cfg.ao.ccp.max_iters, 50);
    assert_eq!(cfg.quadrature.points_per_sigma, 16);
}
