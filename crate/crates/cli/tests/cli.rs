use std::path::Path;
use std::process::{Command, Output};

fn forge(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discrepancy-forge"))
        .args(args)
        .env("DISCREPANCY_FORGE_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn glp_search_writes_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.json");
    let o = forge(
        &["glp-search", "--d", "2", "--m", "101", "--X", "coordinate", "--strategy", "exhaustive", "--out"],
        dir.path(),
    );
    assert!(!o.status.success(), "missing --out value must fail");
    assert_eq!(o.status.code(), Some(3));
    let o = forge(
        &["glp-search", "--m", "101", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["kind"], "glp-search");
    let cert = &r["result"]["certificates"][0];
    assert!(cert["value"].as_f64().unwrap() <= cert["average"].as_f64().unwrap());
    assert_eq!(cert["g"].as_array().unwrap().len(), 2);
}

#[test]
fn bound_with_descriptors_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let set = r#"{"type":"ball","center":[0.5,0.5],"radius":0.25}"#;
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = forge(
            &["bound", "--set", set, "--points", "korobov:1,233:1021", "--R", "16", "--out", out.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r = report(&a);
    assert!(r["kernel"]["provenance"].as_str().unwrap().starts_with("d2-"));
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    // the table landed in the cache directory named by the environment
    let cached = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("kernel-d2-"))
        .count();
    assert_eq!(cached, 1);
}

#[test]
fn sandwich_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let set_path = dir.path().join("ball.json");
    std::fs::write(&set_path, r#"{"type":"ball","center":[0.5,0.5],"radius":0.25}"#).unwrap();
    let csv = dir.path().join("sandwich.csv");
    let o = forge(
        &["sandwich", "--set", set_path.to_str().unwrap(), "--R", "8", "--out", csv.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,x2,chi,A,B,psi_bound");
    assert_eq!(text.lines().count(), 1 + 64 * 64);
    assert!(csv.with_extension("json").exists());
}

#[test]
fn sphere_orbit_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = forge(
        &["sphere-orbit", "--k", "2", "--base", "0,0,1", "--cap", "0,0,1,0.5236", "--L", "8", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    // criterion-style checks may fail; the exit code must say which
    assert!(matches!(o.status.code(), Some(0) | Some(2)));
    let r = report(&out);
    assert_eq!(r["kind"], "sphere-orbit");
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    // (3 * 5^2 - 1) / 2 = 37 words
    assert_eq!(csv.lines().count(), 1 + 37);
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["bound", "--set", "{bad", "--points", "lattice:16", "--R", "8"],
        &["bound", "--set", r#"{"type":"ball","center":[0.5,0.5],"radius":0.25}"#, "--points", "lattice:1000", "--R", "8"],
        &["glp-search", "--m", "100"],
        &["sphere-orbit", "--k", "1", "--cap", "0,0,1"],
        &["no-such-command"],
    ];
    for args in cases {
        assert_eq!(forge(args, dir.path()).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn failed_check_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // demanding a positive slope cannot pass
    let o = forge(
        &[
            "lattice-scaling",
            "--set",
            r#"{"type":"box","lower":[0.1,0.1],"upper":[0.6,0.6]}"#,
            "--m",
            "256,1024",
            "--target-slope",
            "2.0",
            "--slope-tolerance",
            "0.1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed"));
}

#[test]
fn run_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"experiment":{"kind":"glp-search","family":{"type":"coordinate","d":2},"ms":[53],"strategy":{"type":"korobov-rank1"},"constant_tolerance":0.5},"seed":4}"#,
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let o = forge(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&out)["seed"], 4);
}
