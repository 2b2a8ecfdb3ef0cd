use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn risemass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risemass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

fn results(v: &Value) -> &Vec<Value> {
    v["results"].as_array().unwrap()
}

#[test]
fn boson_tower_rows() {
    let o = risemass(&["tower"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "s,mass_squared,mass,multiplicity,edge_truncated\n\
         0,4,2,1,false\n\
         1,12,3.4641,3,false\n\
         2,28,5.2915,5,false\n\
         3,52,7.2111,7,true\n"
    );
}

#[test]
fn fermion_tower_rows() {
    let o = risemass(&["tower", "--l-max", "2", "--spin-dim", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let picked: Vec<(&str, &str, &str, &str)> = rows
        .iter()
        .map(|r| (r[0].as_str(), r[1].as_str(), r[3].as_str(), r[4].as_str()))
        .collect();
    assert_eq!(
        picked,
        vec![("0.5", "7", "4", "false"), ("1.5", "19", "8", "false"), ("2.5", "39", "6", "true")]
    );
}

#[test]
fn larger_radius_halves_b_squared() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tower.csv");
    let o = risemass(&["tower", "--r0", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    // With the CSV in a file the JSON report takes stdout.
    let report = json(&o);
    assert_eq!(report["tower"][1]["s"].as_f64(), Some(1.0));
    assert_eq!(report["tower"][1]["mass_squared"].as_f64(), Some(6.0));
    assert_eq!(report["config"]["model"]["b"].as_f64(), Some(1.0));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("1,6,2.44949,3,"));
}

#[test]
fn so3_suite_passes_at_exact_tolerance() {
    let o = risemass(&["check", "so3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["summary"]["verdict"], "pass");
    for r in results(&v) {
        assert!(r["relative"].as_f64().unwrap() < 1e-12, "{r}");
        assert_eq!(r["tolerance"].as_f64(), Some(1e-12));
    }
}

#[test]
fn fw_equivalence_modes() {
    let o = risemass(&["check", "fw-equivalence", "--spin-mode", "orbital-only"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["summary"]["informational"], 0);

    // The Dirac-spin case with p ≠ 0 and b ≠ 0 is measured but never fails the run.
    let o = risemass(&["check", "fw-equivalence", "--spin-mode", "dirac-spin"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let info: Vec<_> = results(&v).iter().filter(|r| r["verdict"] == "informational").collect();
    assert!(!info.is_empty());
    assert!(info.iter().any(|r| r["relative"].as_f64().unwrap() > 1e-6));
}

#[test]
fn coarse_k13_grid_fails_with_exit_one() {
    let o = risemass(&["check", "k13", "--n", "8"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["summary"]["verdict"], "fail");
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("FAIL"), "{stderr}");
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        &["tower", "--m", "1", "--a", "2"][..],
        &["check", "k14"],
        &["tower", "--tolerance", "0"],
        &["tower", "--spin-dim", "0"],
        &["tower", "--a", "2", "--b", "0"],
        &["check", "dirac-reduce", "--spin-dim", "1"],
        &["check", "spin-project", "--spin-mode", "dirac-spin"],
        &["check", "k13", "--n", "12"],
        &["tower", "--config", "/nonexistent/risemass.toml"],
        &["tower", "--p", "1,2"],
        &["frobnicate"],
    ] {
        let o = risemass(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "[model]\nm = 1.0\nr0 = 2.0\n\n[basis]\nl_max = 2\n\n[check]\nseed = 11\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let o = risemass(&["tower", "--config", p, "--l-max", "1", "--csv", dir.path().join("t.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["config"]["basis"]["l_max"], 1);
    assert_eq!(v["config"]["check"]["seed"], 11);
    assert_eq!(v["config"]["model"]["r0"].as_f64(), Some(2.0));
    assert_eq!(v["tower"].as_array().unwrap().len(), 2);

    std::fs::write(&path, "[model]\nmass = 1.0\n").unwrap();
    assert_eq!(risemass(&["tower", "--config", p]).status.code(), Some(2));
}

#[test]
fn report_layout_is_fixed() {
    let o = risemass(&["check", "sixdim"]);
    let text = stdout(&o);
    let order = ["\"schema\"", "\"config\"", "\"results\"", "\"summary\"", "\"wall_clock_s\""];
    let pos: Vec<usize> = order.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    let v = json(&o);
    assert!(v["wall_clock_s"].is_null());
    assert_eq!(results(&v)[0].as_object().unwrap().len(), 6);
    let entry = &text[text.find("\"results\"").unwrap()..];
    let keys = ["\"name\"", "\"absolute\"", "\"relative\"", "\"tolerance\"", "\"bound\"", "\"verdict\""];
    let pos: Vec<usize> = keys.iter().map(|k| entry.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
    // 17 significant digits.
    assert!(text.contains("\"tolerance\": 9.9999999999999998e-13"));

    let v = json(&risemass(&["check", "sixdim", "--timing"]));
    assert!(v["wall_clock_s"].as_f64().unwrap() >= 0.0);
}

fn replay(path: &Path) -> Output {
    risemass(&["report", "--replay", path.to_str().unwrap()])
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fw.json");
    let o = risemass(&["check", "fw-equivalence", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let stored = std::fs::read(&path).unwrap();

    let r = replay(&path);
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(r.stdout, stored);
    assert_eq!(std::fs::read(&path).unwrap(), stored, "replay must not rewrite outputs");

    let tampered = String::from_utf8(stored).unwrap().replace("\"seed\": 1975", "\"seed\": 1976");
    std::fs::write(&path, tampered).unwrap();
    let r = replay(&path);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("differs"));

    std::fs::write(&path, "{\"schema\": 2}").unwrap();
    assert_eq!(replay(&path).status.code(), Some(2));
}
