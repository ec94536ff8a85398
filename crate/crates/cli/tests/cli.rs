use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rcorner(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcorner")).args(args).current_dir(cwd).output().expect("run rcorner")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn with_fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = rcorner(&["fixtures", "--out", "fx", "--seed", "3", "--random", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

#[test]
fn fixtures_are_written_and_reproducible() {
    let dir = with_fixtures();
    let fx = dir.path().join("fx");
    for name in ["self_intersect", "rounded_quadratic", "rounded_bezier", "discont_independent", "discont_opposite", "degenerate", "plane", "two_patch_model", "random_rounded_0", "random_rounded_1"] {
        assert!(fx.join(format!("{name}.json")).exists(), "{name}");
    }
    assert_eq!(json(&fx.join("manifest.json"))["schema_version"], 1);
    let again = rcorner(&["fixtures", "--out", "fx2", "--seed", "3", "--random", "2"], dir.path());
    assert!(again.status.success());
    for f in ["random_rounded_0.json", "random_rounded_1.json", "manifest.json"] {
        assert_eq!(fs::read(fx.join(f)).unwrap(), fs::read(dir.path().join("fx2").join(f)).unwrap(), "{f}");
    }
    let other = rcorner(&["fixtures", "--out", "fx3", "--seed", "4", "--random", "1"], dir.path());
    assert!(other.status.success());
    assert_ne!(fs::read(fx.join("random_rounded_0.json")).unwrap(), fs::read(dir.path().join("fx3/random_rounded_0.json")).unwrap());
}

#[test]
fn check_reports_kinds_and_flags() {
    let dir = with_fixtures();
    let out = rcorner(&["check", "fx/rounded_bezier.json", "--corner", "u0v0"], dir.path());
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["schema_version"], 1);
    let c = &r["corners"][0];
    assert_eq!(c["classification"]["kind"], "Rounded");
    let sc = c["spline_conditions"].as_object().unwrap();
    for flag in ["antiparallel", "coplanar", "onesided"] {
        assert_eq!(sc[flag], true, "{flag}");
    }

    let out = rcorner(&["check", "fx/discont_opposite.json", "--corner", "u0v0", "--out", "opp.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("opp.json"))["corners"][0]["classification"]["kind"], "DiscontinuousOpposite");

    for k in 0..2 {
        let out = rcorner(&["check", &format!("fx/random_rounded_{k}.json"), "--corner", "u0v0"], dir.path());
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r["corners"][0]["classification"]["kind"], "Rounded");
    }
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"degree_u": 2, "degree_v": 2, "knots_u": [0,0,0,1,1,1], "control_points": []}"#).unwrap();
    let out = rcorner(&["check", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("knots_v"), "{err}");

    fs::write(dir.path().join("typo.json"), r#"{"degree_u": 2, "degree_v": 2, "knots_u": [0,0,0,1,1,1], "knots_v": [0,0,0,1,1,1], "control_point": []}"#).unwrap();
    let out = rcorner(&["check", "typo.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("control_point"));

    assert_eq!(rcorner(&["check", "missing.json"], dir.path()).status.code(), Some(2));
    assert_eq!(rcorner(&["hemisphere", "--degree", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(rcorner(&["hemisphere", "--levels", "a..b"], dir.path()).status.code(), Some(2));
}

#[test]
fn hemisphere_sweep_writes_tables_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["hemisphere", "--degree", "2", "--levels", "1..2", "--probe-count", "5"];
    let a = rcorner(&[&args[..], &["--out", "a"]].concat(), dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = rcorner(&[&args[..], &["--out", "b"]].concat(), dir.path());
    assert!(b.status.success());
    for f in ["convergence.csv", "probes.csv", "config.json"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    let table = fs::read_to_string(dir.path().join("a/convergence.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert!(lines[0].starts_with("scheme,degree,level,max_error,max_normal_angle,eoc_error"));
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
    let eoc: f64 = lines[2].split(',').nth(5).unwrap().parse().unwrap();
    assert!(eoc > 2.5, "{eoc}");
    let probes = fs::read_to_string(dir.path().join("a/probes.csv")).unwrap();
    assert_eq!(probes.lines().count(), 1 + 2 * 2 * 4 * 5);
}

#[test]
fn hemisphere_config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"degrees": [2], "levels": [1], "schemes": ["rcc"], "probe_count": 3}"#).unwrap();
    let out = rcorner(&["hemisphere", "--config", "cfg.json", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("o/convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().nth(1).unwrap().starts_with("rcc,2,1,"));

    fs::write(dir.path().join("bad.json"), r#"{"degrees": [2], "level": [1]}"#).unwrap();
    let out = rcorner(&["hemisphere", "--config", "bad.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("level"));
}

#[test]
fn diagnose_reports_witness_rates_and_flat_fields() {
    let dir = with_fixtures();
    let out = rcorner(&["diagnose", "fx/self_intersect.json", "--corner", "u0v0", "--out", "si"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("si/report.json"));
    let inj = &r["corners"][0]["injectivity"];
    assert_eq!(inj["result"], "Witness");
    assert!(inj["projected_distance"].as_f64().unwrap() < 1e-9);

    let out = rcorner(&["diagnose", "fx/rounded_quadratic.json", "--corner", "u0v0", "--out", "rq"], dir.path());
    assert!(out.status.success());
    let r = json(&dir.path().join("rq/report.json"));
    assert!(r["corners"][0]["normal_probe"]["fitted_rate"].as_f64().unwrap() >= 0.9);
    assert!(r["corners"][0]["curvature_p3"].as_array().unwrap().len() > 3);

    let out = rcorner(&["diagnose", "fx/plane.json", "--out", "pl", "--samples", "8"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("pl/fields.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "u,v,x,y,z,nu_x,nu_y,nu_z,kappa1,kappa2,isophote");
    let mut n = 0;
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[8].abs() < 1e-12 && cells[9].abs() < 1e-12, "{line}");
        n += 1;
    }
    assert_eq!(n, 81);
}

#[test]
fn repair_two_patch_model_end_to_end() {
    let dir = with_fixtures();
    let out = rcorner(&["repair", "fx/two_patch_model.json", "--out", "rep.json", "--report", "report.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["outcomes"][0]["action"], "repaired");
    assert_eq!(report["after"]["watertight"], true);
    assert!(report["conflicts"].as_array().unwrap().is_empty());

    let model = json(&dir.path().join("rep.json"));
    fs::write(dir.path().join("a.json"), model["patches"][0].to_string()).unwrap();
    let out = rcorner(&["check", "a.json", "--corner", "u0v0"], dir.path());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["corners"][0]["classification"]["kind"], "Rounded");
    for flag in ["antiparallel", "coplanar", "onesided"] {
        assert_eq!(r["corners"][0]["spline_conditions"][flag], true);
    }

    let out = rcorner(&["repair", "rep.json", "--out", "rep2.json", "--report", "r2.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(fs::read(dir.path().join("rep.json")).unwrap(), fs::read(dir.path().join("rep2.json")).unwrap());
}

#[test]
fn repair_without_candidates_copies_input() {
    let dir = with_fixtures();
    let plane = fs::read_to_string(dir.path().join("fx/plane.json")).unwrap();
    let model = format!("{{\"patches\": [{plane}]}}");
    fs::write(dir.path().join("m.json"), &model).unwrap();
    let out = rcorner(&["repair", "m.json", "--out", "o.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("o.json")).unwrap(), model);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["outcomes"].as_array().unwrap().is_empty());
}

#[test]
fn repair_rejects_mismatched_edges() {
    let dir = with_fixtures();
    let mut model = json(&dir.path().join("fx/two_patch_model.json"));
    model["patches"][1]["knots_u"] = serde_json::json!([0.0, 0.0, 0.0, 0.6, 1.0, 1.0, 1.0]);
    fs::write(dir.path().join("bad.json"), model.to_string()).unwrap();
    let out = rcorner(&["repair", "bad.json", "--out", "o.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("edge incompatibility"));
    assert!(!dir.path().join("o.json").exists());
}
