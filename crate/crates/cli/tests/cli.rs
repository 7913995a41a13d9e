use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn massgeom(args: &[&str]) -> Output {
    massgeom_env(args, None)
}

fn massgeom_env(args: &[&str], config_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_massgeom"));
    cmd.args(args).env_remove("MASSGEOM_CONFIG_DIR");
    if let Some(d) = config_dir {
        cmd.env("MASSGEOM_CONFIG_DIR", d);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn adm_suite_passes_with_exit_zero() {
    let o = massgeom(&["run", "--suite", "adm", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["suite"], "adm");
    let ids: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["instance"].as_str().unwrap()).collect();
    for id in ["schwarzschild-m-1-n3", "schwarzschild-m1-n3", "schwarzschild-m2-n3", "flat-n3"] {
        assert!(ids.contains(&id), "{id} missing from {ids:?}");
    }
    assert!(ids.iter().all(|id| !id.ends_with("n4")));
}

#[test]
fn failing_check_exits_one() {
    let o = massgeom(&["run", "--suite", "adm", "--n", "3", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["summary"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn usage_errors_exit_two() {
    let o = massgeom(&["run", "--suite", "unknown"]);
    assert_eq!(o.status.code(), Some(2));
    let o = massgeom(&["run", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside 3..=8"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "suite = \"nope\"\n").unwrap();
    let o = massgeom(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed config"), "{}", stderr(&o));
}

#[test]
fn lam_identity_is_deterministic_and_seeded() {
    let a = massgeom(&["run", "--suite", "lam-identity", "--seed", "7"]);
    let b = massgeom(&["run", "--suite", "lam-identity", "--seed", "7"]);
    let c = massgeom(&["run", "--suite", "lam-identity", "--seed", "8"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let r = json(&a);
    let analytic = r["checks"].as_array().unwrap().iter().find(|c| c["check"] == "analytic-residual").unwrap();
    assert!(analytic["value"].as_f64().unwrap() < 1e-8);
    assert!(analytic["method"].as_str().unwrap().contains("200 seeded"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "suite = \"geodesic\"\nseed = 1\ndims = [3, 4]\n[tolerances]\ngeodesic = 0.05\n").unwrap();
    let o = massgeom(&["run", "--config", cfg.to_str().unwrap(), "--seed", "7", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(r["config"]["dims"], serde_json::json!([3]));
    assert_eq!(r["suite"], "geodesic");
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["tolerance"], 0.05);
    }
}

#[test]
fn config_directory_supplies_defaults_and_instances() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("massgeom.toml"), "suite = \"adm\"\ndims = [3]\n").unwrap();
    fs::create_dir(dir.path().join("instances")).unwrap();
    fs::write(
        dir.path().join("instances/heavy.json"),
        r#"{"id": "heavy", "family": "schwarzschild", "n": 3, "params": {"m": 3}, "expected": {"mass": 3}}"#,
    )
    .unwrap();
    let o = massgeom_env(&["run"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["suite"], "adm");
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["instance"] == "heavy"));

    fs::write(dir.path().join("instances/broken.json"), r#"{"family": "graph", "n": 3, "fields": {"f": "1 +"}}"#).unwrap();
    let o = massgeom_env(&["run"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fields.f"), "{}", stderr(&o));
}

#[test]
fn csv_and_table_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = massgeom(&["run", "--suite", "inversion", "--n", "3", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("suite,instance,check,value"));
    assert_eq!(text.lines().count(), 3);

    let o = massgeom(&["run", "--suite", "geodesic", "--format", "table"]);
    let t = stdout(&o);
    assert!(t.contains("acceleration-limit") && t.contains("PASS"));
    assert!(t.trim_end().ends_with("geodesic: 4 checks, 4 passed, 0 failed"));
}

fn describe(text: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("inst.json");
    fs::write(&p, text).unwrap();
    massgeom(&["describe", p.to_str().unwrap()])
}

fn value_after(text: &str, prefix: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("{prefix} in {text}"));
    line[prefix.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn describe_schwarzschild_flat_and_zas() {
    let o = describe(r#"{"family": "schwarzschild", "n": 3, "params": {"m": 1}}"#);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    assert_eq!(value_after(&t, "horizon radius r0:"), 0.5);
    assert!((value_after(&t, "horizon area A:") - 16.0 * std::f64::consts::PI).abs() < 1e-12);

    let t = stdout(&describe(r#"{"family": "flat", "n": 4}"#));
    assert_eq!(value_after(&t, "mass:"), 0.0);
    assert!(t.contains("horizon: none (area 0)") && t.contains("zas sphere: none"));

    let t = stdout(&describe(r#"{"family": "conformal", "n": 3, "fields": {"u": "1 - 1/(2*r)"}}"#));
    assert!((value_after(&t, "zas sphere radius:") - 0.5).abs() < 1e-12, "{t}");
}

#[test]
fn describe_reports_schema_paths() {
    let o = describe(r#"{"family": "graph", "n": 3, "fields": {"f": "sqrt(r"}}"#);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fields.f"), "{}", stderr(&o));
    let o = describe("{\"family\": \"flat\",\n \"n\": }");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn profile_csv_for_schwarzschild() {
    let o = massgeom(&["profile", "schwarzschild-m1-n3", "--quantity", "quasilocal", "--r-min", "1", "--r-max", "50", "--points", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = stdout(&o);
    let mut lines = t.lines();
    assert_eq!(lines.next(), Some("r,quasilocal_mass"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].0, 1.0);
    assert_eq!(rows[5].0, 50.0);
    assert!(rows.iter().all(|(_, v)| (v - 1.0).abs() < 1e-6));

    let o = massgeom(&["profile", "capped-schwarzschild-n3", "--r-min", "0.25", "--r-max", "4", "--points", "5"]);
    let vals: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split_once(',').unwrap().1.parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{vals:?}");
    assert!((vals[4] - 1.0).abs() < 1e-9);

    assert_eq!(massgeom(&["profile", "no-such-instance"]).status.code(), Some(2));
}

#[test]
fn list_shows_registry() {
    let t = stdout(&massgeom(&["list"]));
    assert!(t.lines().any(|l| l.starts_with("two-throat-graph\tgraph\tn=3")));
}
