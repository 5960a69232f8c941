use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dtc_core::harness::simulate_export;
use dtc_core::noise::DeviceNoise;

fn dtcbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtcbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn dir(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_writes_members_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dtcbench(&[
        "gen",
        "--qubits",
        "4",
        "--cycles",
        "6",
        "--seed",
        "7",
        "--out",
        dir(tmp.path()),
    ]);
    assert!(out.status.success());
    assert!(tmp.path().join("dtc_q4_seed7_n6.qasm").exists());
    assert!(tmp.path().join("manifest.json").exists());
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 8);

    let json = dtcbench(&[
        "gen", "--qubits", "4", "--cycles", "6", "--seed", "7", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(doc["rzz_angles"].as_array().unwrap().len(), 3);
    assert_eq!(doc["seed"], 7);
}

#[test]
fn gen_rejects_unknown_export_format() {
    let out = dtcbench(&["gen", "--qubits", "4", "--export-format", "quil"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn topo_summarizes_fixture() {
    let out = dtcbench(&["topo", "--map", "falcon-27", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        (doc["num_qubits"].as_u64(), doc["num_edges"].as_u64()),
        (Some(27), Some(28))
    );
    assert_eq!(
        dtcbench(&["topo", "--map", "no-such-map"]).status.code(),
        Some(2)
    );
}

#[test]
fn cover_exit_codes() {
    let ok = dtcbench(&[
        "cover",
        "--map",
        "falcon-27",
        "--chain",
        "5",
        "--format",
        "csv",
    ]);
    assert!(ok.status.success());
    assert_eq!(stdout(&ok).lines().count(), 11);
    let bad = dtcbench(&["cover", "--map", "line-3", "--chain", "5"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn run_validation_errors_exit_2() {
    let too_wide = dtcbench(&["run", "--map", "line-20", "--chain", "14"]);
    assert_eq!(too_wide.status.code(), Some(2));
    let no_shots = dtcbench(&[
        "run",
        "--map",
        "line-5",
        "--chain",
        "5",
        "--backend",
        "trajectory",
    ]);
    assert_eq!(no_shots.status.code(), Some(2));
    let bad_noise = dtcbench(&[
        "run",
        "--map",
        "line-5",
        "--chain",
        "5",
        "--noise",
        "uniform:1.5",
    ]);
    assert_eq!(bad_noise.status.code(), Some(2));
}

#[test]
fn run_analyze_report_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = tmp.path().join("bundle");
    let run = dtcbench(&[
        "run",
        "--map",
        "line-5",
        "--chain",
        "5",
        "--g",
        "1",
        "--cycles",
        "10",
        "--format",
        "json",
        "--out",
        dir(&bundle),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&stdout(&run)).unwrap();
    assert_eq!(doc["device_mean"], 10.0);
    for name in [
        "manifest.json",
        "cover.json",
        "family.json",
        "report.md",
        "plot.csv",
        "traces/layout_0.json",
    ] {
        assert!(bundle.join(name).exists(), "{name}");
    }

    let analyzed = dtcbench(&[
        "analyze",
        "--bundle",
        dir(&bundle),
        "--threshold",
        "1.9",
        "--format",
        "json",
    ]);
    assert!(analyzed.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&analyzed)).unwrap();
    assert_eq!(
        (doc["threshold"].as_f64(), doc["device_mean"].as_f64()),
        (Some(1.9), Some(10.0))
    );
    let out_of_range = dtcbench(&["analyze", "--bundle", dir(&bundle), "--threshold", "2.5"]);
    assert_eq!(out_of_range.status.code(), Some(2));

    let report = dtcbench(&["report", "--bundle", dir(&bundle), "--format", "md"]);
    assert_eq!(
        stdout(&report),
        fs::read_to_string(bundle.join("report.md")).unwrap()
    );
}

#[test]
fn repeated_runs_print_identical_reports() {
    let args = [
        "run",
        "--map",
        "falcon-27",
        "--chain",
        "4",
        "--cycles",
        "12",
        "--backend",
        "trajectory",
        "--shots",
        "200",
        "--trajectories",
        "10",
        "--noise",
        "uniform:0.03,0.01",
        "--exec-seed",
        "5",
        "--format",
        "json",
    ];
    let a = dtcbench(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let b = dtcbench(&seq);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scan_reports_faulty_qubits() {
    let tmp = tempfile::tempdir().unwrap();
    let noise = tmp.path().join("noise.json");
    fs::write(&noise, r#"{"two_qubit": {"12-13": 0.5}}"#).unwrap();
    let out = dtcbench(&[
        "scan",
        "--map",
        "falcon-27",
        "--chain",
        "5",
        "--noise",
        dir(&noise),
        "--fault-cutoff",
        "5",
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["faulty_qubits"], serde_json::json!([12, 13]));
    assert!(doc["circuits_executed"].as_u64() < doc["non_adaptive_circuits"].as_u64());
}

#[test]
fn export_then_import_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let export = tmp.path().join("export");
    let counts = tmp.path().join("counts");
    let bundle = tmp.path().join("bundle");
    let out = dtcbench(&[
        "export",
        "--map",
        "falcon-27",
        "--chain",
        "5",
        "--cycles",
        "8",
        "--out",
        dir(&export),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("10 layouts, 90 circuit files"));
    simulate_export(
        &export,
        &counts,
        &DeviceNoise::uniform(0.02, 0.0),
        300,
        10,
        3,
    )
    .unwrap();

    let imported = dtcbench(&[
        "import-counts",
        "--export",
        dir(&export),
        "--counts",
        dir(&counts),
        "--out",
        dir(&bundle),
        "--format",
        "json",
    ]);
    assert!(
        imported.status.success(),
        "{}",
        String::from_utf8_lossy(&imported.stderr)
    );
    assert!(bundle.join("report.json").exists());

    fs::write(
        counts.join("layout_3/n_4.json"),
        r#"{"n": 4, "shots": 300, "counts": {"0000": 300}}"#,
    )
    .unwrap();
    let rejected = dtcbench(&[
        "import-counts",
        "--export",
        dir(&export),
        "--counts",
        dir(&counts),
    ]);
    assert_eq!(rejected.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rejected.stderr).contains("layout_3/n_4.json"));
}

#[test]
fn run_backend_export_needs_out() {
    let out = dtcbench(&[
        "run",
        "--map",
        "line-5",
        "--chain",
        "5",
        "--backend",
        "export",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
