use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_isospec");

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

#[test]
fn map_on_the_unit_circle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "map.json", r#"{"domain":{"type":"circle","r":1},"params":{"xi":0.5,"m":3}}"#);
    let (header, rows) = csv_rows(&run(&["map", "--config", cfg.to_str().unwrap()]));
    assert_eq!(header, ["bounce_index", "s", "xi", "chord_length", "x", "y"]);
    let third = std::f64::consts::TAU / 3.0;
    for (j, row) in rows.iter().enumerate() {
        assert_eq!(row[0], j as f64);
        assert!((row[1] - third * j as f64).abs() < 1e-12);
    }
    assert_eq!(rows.len(), 3);
}

#[test]
fn radon_over_ten_ellipse_circles_is_positive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "radon.json",
        r#"{"domain":{"type":"ellipse","a":2,"b":1},
            "params":{"xi":[0.8,0.82,0.84,0.86,0.88,0.9,0.91,0.92,0.93,0.94],"n_modes":32}}"#,
    );
    let (header, rows) = csv_rows(&run(&["radon", "--config", cfg.to_str().unwrap()]));
    assert_eq!(header, ["h_or_omega", "invariant_value", "quadrature_nodes", "est_error"]);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[1] > 0.0));
}

#[test]
fn cluster_on_the_shipped_disk_spectrum_passes_h1() {
    let dir = tempfile::tempdir().unwrap();
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data/disk_dirichlet.txt");
    let cfg = write_config(
        dir.path(),
        "cluster.json",
        &format!(r#"{{"params":{{"spectrum":"{data}","d":1.2,"c":1,"alpha":10,"s":0}}}}"#),
    );
    let out = run(&["cluster", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["h1"]["passed"], true);
    assert_eq!(v["columns"], serde_json::json!(["k", "a_k", "b_k", "gap_margin", "length"]));
    let two_v = v["report"]["weyl"]["two_v"].as_f64().unwrap();
    assert!((3.5..=4.5).contains(&two_v));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "hom.json",
        r#"{"seed":11,"params":{"omega":[0.6180339887498949],"random":{"degree":12,"terms":6}}}"#,
    );
    let c = cfg.to_str().unwrap();
    for fmt in ["csv", "json"] {
        let a = run(&["homological", "--config", c, "--format", fmt]);
        let b = run(&["homological", "--config", c, "--format", fmt]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
    let other = write_config(
        dir.path(),
        "hom2.json",
        r#"{"seed":12,"params":{"omega":[0.6180339887498949],"random":{"degree":12,"terms":6}}}"#,
    );
    assert_ne!(run(&["homological", "--config", c]).stdout, run(&["homological", "--config", other.to_str().unwrap()]).stdout);
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lv.json",
        r#"{"domain":{"type":"liouville","family":"ellipse","c":1,"N":1}}"#,
    );
    let target = dir.path().join("report.csv");
    let out = run(&["validate-liouville", "--config", cfg.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(target).unwrap();
    assert!(text.starts_with("condition,passed,first_violated_order,detail\n"));
    assert!(!text.contains(",false,"));
}

#[test]
fn quasimode_and_rigidity_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "q.json", r#"{"params":{"theta":0.7,"d_n":0.3,"k_min":100,"k_max":300,"order":2}}"#);
    let (header, rows) = csv_rows(&run(&["quasimode", "--config", cfg.to_str().unwrap()]));
    assert_eq!(header, ["k", "k_n", "mu0", "c0", "c1", "c2", "mu", "mu_squared"]);
    assert!(!rows.is_empty());
    for r in &rows {
        assert!((r[6] * r[6] - r[7]).abs() < 1e-9 * r[7]);
    }

    let cfg = write_config(
        dir.path(),
        "r.json",
        r#"{"domain":{"type":"liouville","family":"ellipse","c":1,"N":1},
            "params":{"j":6,"n_h":8,"coefficients":[0,0.3,0.1,0,0,0],"profile":false}}"#,
    );
    let out = run(&["rigidity", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"][0], "h");
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    assert!(v["report"]["relative_error"].as_f64().unwrap() < 1e-8);
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("machine-readable error record")
}

#[test]
fn failures_exit_with_documented_codes() {
    let dir = tempfile::tempdir().unwrap();

    let unknown = write_config(dir.path(), "u.json", r#"{"domain":{"type":"circle","r":1},"colour":"red"}"#);
    let out = run(&["map", "--config", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "Parse");

    let bad_param = write_config(dir.path(), "p.json", r#"{"domain":{"type":"circle","r":1},"params":{"xi":0.5,"m":3,"n":1}}"#);
    assert_eq!(run(&["map", "--config", bad_param.to_str().unwrap()]).status.code(), Some(2));

    let glancing = write_config(dir.path(), "g.json", r#"{"domain":{"type":"circle","r":1},"params":{"xi":1.0,"m":3}}"#);
    let out = run(&["map", "--config", glancing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "GlancingRay");

    let neg_tol = write_config(dir.path(), "t.json", r#"{"domain":{"type":"circle","r":1},"tol":-1,"params":{"xi":0.5,"m":1}}"#);
    assert_eq!(run(&["map", "--config", neg_tol.to_str().unwrap()]).status.code(), Some(2));

    // a rank cut above every singular value is a numerical failure
    let rank = write_config(
        dir.path(),
        "rank.json",
        r#"{"domain":{"type":"liouville","family":"ellipse","c":1,"N":1},
            "params":{"j":3,"n_h":4,"data":[1,1,1,1],"reg":2,"profile":false}}"#,
    );
    let out = run(&["rigidity", "--config", rank.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["kind"], "numerical");
}
