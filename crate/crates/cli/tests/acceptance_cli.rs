//! CLI acceptance: deterministic reports, the exit-code contract, and
//! the documented subcommand examples.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn hqc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hqc"))
}

fn run(args: &[&str]) -> Output {
    hqc().args(args).output().expect("failed to spawn hqc")
}

fn tree_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("read_dir") {
        let path = entry.expect("entry").path();
        let rel = path.file_name().unwrap().to_owned();
        out.insert(PathBuf::from(rel), std::fs::read(&path).expect("read"));
    }
    out
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hqc_accept_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("create temp dir");
    dir
}

#[test]
fn criterion_12_run_all_determinism() {
    let started = Instant::now();
    let out1 = temp_dir("runall1");
    let out2 = temp_dir("runall2");

    let r1 = run(&["fixtures", "run-all", "--out", out1.to_str().unwrap()]);
    assert_eq!(r1.status.code(), Some(0), "first run-all must exit 0");
    let r2 = run(&["fixtures", "run-all", "--out", out2.to_str().unwrap()]);
    assert_eq!(r2.status.code(), Some(0), "second run-all must exit 0");
    assert_eq!(
        r1.stdout, r2.stdout,
        "run-all stdout must be byte-identical across runs"
    );

    let t1 = tree_bytes(&out1);
    let t2 = tree_bytes(&out2);
    assert_eq!(
        t1.keys().collect::<Vec<_>>(),
        t2.keys().collect::<Vec<_>>(),
        "file sets differ"
    );
    for (name, bytes) in &t1 {
        assert_eq!(
            Some(bytes),
            t2.get(name),
            "{} differs between runs",
            name.display()
        );
    }
    assert!(
        t1.keys().any(|k| k.extension().is_some_and(|e| e == "json")),
        "run-all must write json reports"
    );

    let elapsed = started.elapsed().as_secs_f64();
    println!("[criterion] 12 cli determinism: PASS ({elapsed:.2} s)");
    assert!(elapsed < 600.0, "full suite exceeded 10 minutes: {elapsed:.1} s");
}

#[test]
fn bootstrap_prints_the_expected_trace() {
    let out = run(&["bootstrap", "--n", "3", "--p0", "3.3"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("bootstrap output is JSON");
    let seq: Vec<f64> = json["sequence"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(seq.len(), 4);
    let expected = [3.3, 11.0 / 3.0, 33.0 / 7.0, 11.0];
    for (got, want) in seq.iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert_eq!(json["terminated"], serde_json::Value::Bool(true));
}

#[test]
fn bootstrap_bad_start_is_input_error() {
    let out = run(&["bootstrap", "--n", "3", "--p0", "2.0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn qh_dist_ball2_example() {
    let outdir = temp_dir("qhdist");
    let out = run(&[
        "qh-dist",
        "ball2",
        "0,0",
        "0.9,0",
        "--h",
        "0.01",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(outdir.join("qh_dist_ball2.json")).unwrap(),
    )
    .unwrap();
    let exact = -(0.1f64.ln());
    for key in ["distance_coarse", "distance_fine"] {
        let d = report["aggregates"][key].as_f64().unwrap();
        assert!(
            (d - exact).abs() / exact < 0.02,
            "{key} = {d} deviates more than 2% from {exact}"
        );
    }
    // the convergence table must improve (or match) at h/2
    let dc = report["aggregates"]["distance_coarse"].as_f64().unwrap();
    let df = report["aggregates"]["distance_fine"].as_f64().unwrap();
    assert!((df - exact).abs() <= (dc - exact).abs() + 1e-9);
}

#[test]
fn analyze_shear_example_and_exit_codes() {
    let outdir = temp_dir("analyze");
    let specs = temp_dir("specs");

    // shear05: K_outer = 3 everywhere, L_hat = 1.5
    let exp = run(&["fixtures", "export", "shear05", "--out", specs.to_str().unwrap()]);
    assert_eq!(exp.status.code(), Some(0));
    let out = run(&[
        "analyze",
        specs.join("shear05.json").to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(outdir.join("shear05_analyze.json")).unwrap(),
    )
    .unwrap();
    assert!((report["aggregates"]["sup_k_outer"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((report["aggregates"]["l_hat"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    let csv = std::fs::read_to_string(outdir.join("shear05_analyze_points.csv")).unwrap();
    assert!(csv.starts_with("x1,x2,k_outer,k_inner,linear_dilatation,jacobian\n"));

    // malformed spec: parse error, exit 3
    let bad = specs.join("broken.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line"), "parse error should carry a location: {msg}");

    // sign-changing hessian: the scan aborts with the offending point,
    // exit 2
    let degenerate = serde_json::json!({
        "format_version": 1,
        "dimension": 3,
        "representation": "gradient-potential",
        "potential": {"terms": [{"exponents": [1, 1, 1], "coefficient": 1.0}]},
    });
    let path = specs.join("degenerate.json");
    std::fs::write(&path, serde_json::to_string_pretty(&degenerate).unwrap()).unwrap();
    let out = run(&["analyze", path.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qh_dist_near_boundary_is_accuracy_failure() {
    // a query within h of the boundary is rejected rather than
    // approximated; the CLI maps that onto exit code 4
    let outdir = temp_dir("qhdist4");
    let out = run(&[
        "qh-dist",
        "ball2",
        "0,0",
        "0.97,0",
        "--h",
        "0.05",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn fixtures_list_names_every_fixture() {
    let out = run(&["fixtures", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["identity2", "identity3", "shear05", "linear3", "cubic3", "poisson2"] {
        assert!(text.contains(name), "missing fixture {name}");
    }
}

#[test]
fn alpha_field_writes_csv_and_svg() {
    let outdir = temp_dir("alpha");
    let specs = temp_dir("alphaspec");
    run(&["fixtures", "export", "poisson2", "--out", specs.to_str().unwrap()]);
    let out = run(&[
        "alpha-field",
        specs.join("poisson2.json").to_str().unwrap(),
        "--grid",
        "8",
        "--nodes",
        "1024",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(outdir.join("poisson2_alpha_field.csv")).unwrap();
    assert!(csv.starts_with("x1,x2,alpha,stderr,d_ratio\n"));
    let svg = std::fs::read_to_string(outdir.join("poisson2_alpha.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("palette"));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(outdir.join("poisson2_alpha.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["per_point_csv"], "poisson2_alpha_field.csv");
}

#[test]
fn green_verify_passes() {
    let outdir = temp_dir("green");
    let out = run(&["green-verify", "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(outdir.join("green_verify.json")).unwrap(),
    )
    .unwrap();
    for v in report["verdicts"].as_array().unwrap() {
        assert_eq!(v["pass"], serde_json::Value::Bool(true), "{v}");
    }
}

#[test]
fn mapspec_round_trip_through_export() {
    let specs = temp_dir("roundtrip");
    for name in ["poisson2", "cubic3"] {
        let out = run(&["fixtures", "export", name, "--out", specs.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let text = std::fs::read_to_string(specs.join(format!("{name}.json"))).unwrap();
        let spec = hqc_core::mapspec::MapSpecFile::from_json(&text).unwrap();
        assert_eq!(spec.to_json(), text, "{name} round trip not byte exact");
    }
}
