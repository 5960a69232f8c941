use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use dtc_core::analysis::AnalysisConfig;
use dtc_core::counts::ShotRecord;
use dtc_core::coverage::{builtin_topology, CouplingMap};
use dtc_core::dtc::DtcParams;
use dtc_core::harness::{
    counts_file_name, export_for_hardware, import_counts, load_bundle_runs, run_characterization,
    run_with_executor, scan_faulty, scan_with_executor, simulate_export, Backend, Capabilities,
    Counting, ExactExecutor, Executor, Job, RunConfig, ScanPolicy, TrajectoryExecutor,
};
use dtc_core::noise::DeviceNoise;
use dtc_core::par::Schedule;
use dtc_core::Error;

fn config(map: &str, q: usize, g: f64, horizon: usize) -> RunConfig {
    let params = DtcParams::new(q, 12345).with_g(g).with_n_max(horizon);
    RunConfig::new(params, builtin_topology(map).unwrap())
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn ideal_line_saturates_every_qubit() {
    let outcome = run_characterization(&config("line-5", 5, 1.0, 10), None).unwrap();
    assert_eq!(outcome.report.layouts.len(), 1);
    assert_eq!(outcome.report.layouts[0].n_vis, vec![10; 5]);
    assert_eq!(
        (outcome.report.device_mean, outcome.report.device_std),
        (10.0, 0.0)
    );
}

#[test]
fn uniform_noise_gives_similar_layouts() {
    let mut cfg = config("falcon-27", 5, 0.95, 80);
    cfg.noise = DeviceNoise::uniform(0.02, 0.0);
    let outcome = run_characterization(&cfg, None).unwrap();
    assert!(outcome.cover.success());
    let means: Vec<f64> = outcome.report.layouts.iter().map(|l| l.mean).collect();
    let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo <= 2.0, "layout means {means:?}");
}

#[test]
fn bundles_are_byte_identical() {
    let mut cfg = config("falcon-27", 5, 0.95, 20);
    cfg.noise = DeviceNoise::uniform(0.03, 0.02);
    cfg.backend = Backend::Trajectory;
    cfg.shots = Some(500);
    cfg.trajectories = 20;
    cfg.exec_seed = 7;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_characterization(&cfg, Some(a.path())).unwrap();
    cfg.schedule = Schedule::Sequential;
    run_characterization(&cfg, Some(b.path())).unwrap();
    let fa = files(a.path());
    assert!(fa.contains_key("manifest.json") && fa.contains_key("report.md"));
    assert!(fa.contains_key("counts/layout_0.json") && fa.contains_key("family.json"));
    assert_eq!(fa, files(b.path()));
}

#[test]
fn bundle_reloads_to_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("falcon-27", 5, 0.95, 15);
    cfg.noise = DeviceNoise::uniform(0.02, 0.0);
    let outcome = run_characterization(&cfg, Some(dir.path())).unwrap();
    let runs = load_bundle_runs(dir.path()).unwrap();
    assert_eq!(runs, outcome.runs);
}

#[test]
fn reseeded_layouts_get_their_own_families() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("ring-6", 4, 0.95, 5);
    cfg.reseed_per_layout = true;
    let outcome = run_characterization(&cfg, Some(dir.path())).unwrap();
    assert!(outcome.families.len() > 1);
    assert_ne!(outcome.families[0].phases, outcome.families[1].phases);
    assert!(dir.path().join("families/layout_1.json").exists());
    assert!(!dir.path().join("family.json").exists());
}

#[test]
fn accounting_matches_executor_calls() {
    let mut cfg = config("falcon-27", 5, 0.95, 12);
    cfg.noise = DeviceNoise::uniform(0.02, 0.0);
    cfg.shots = Some(300);
    let exec = Counting::new(ExactExecutor::new(cfg.noise.clone()));
    let outcome = run_with_executor(&cfg, &exec, None).unwrap();
    assert_eq!(outcome.circuits_executed, exec.circuits());
    assert_eq!(outcome.shots_total, exec.shots());
    assert_eq!(exec.circuits(), outcome.cover.layouts.len() as u64 * 13);

    let exec = Counting::new(TrajectoryExecutor::new(cfg.noise.clone(), 10));
    let scan = scan_with_executor(&cfg, &ScanPolicy::new(3), &exec, None).unwrap();
    assert_eq!(scan.circuits_executed, exec.circuits());
    assert_eq!(scan.shots_total, exec.shots());
}

#[test]
fn uncoverable_map_leaves_a_failed_manifest() {
    let map = CouplingMap::new("split", 6, [(0, 1), (1, 2), (2, 3), (4, 5)]).unwrap();
    let cfg = RunConfig::new(DtcParams::new(3, 1).with_n_max(4), map);
    let dir = tempfile::tempdir().unwrap();
    let err = run_characterization(&cfg, Some(dir.path())).unwrap_err();
    assert!(matches!(err, Error::Uncoverable { ref edges, .. } if edges == &[(4, 5)]));
    let manifest = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\""));
}

struct FailsOn(usize);

impl Executor for FailsOn {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            max_qubits: 8,
            supports_exact: false,
        }
    }

    fn execute(&self, job: &Job, shots: u64, seed: u64) -> dtc_core::Result<Vec<ShotRecord>> {
        if job.layout.path().contains(&self.0) {
            return Err(Error::Executor("device offline".into()));
        }
        TrajectoryExecutor::new(DeviceNoise::ideal(), 1).execute(job, shots, seed)
    }
}

#[test]
fn executor_failure_keeps_completed_layouts() {
    let mut cfg = config("falcon-27", 5, 0.95, 4);
    cfg.shots = Some(50);
    let dir = tempfile::tempdir().unwrap();
    let err = run_with_executor(&cfg, &FailsOn(26), Some(dir.path())).unwrap_err();
    assert!(matches!(err, Error::Executor(ref m) if m.contains("device offline")));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "failed");
    let done = manifest["completed_layouts"].as_u64().unwrap();
    assert!(done > 0 && done < manifest["layouts"].as_u64().unwrap());
}

#[test]
fn exact_mode_needs_an_exact_capable_executor() {
    let cfg = config("line-4", 4, 0.95, 4);
    let err = run_with_executor(
        &cfg,
        &TrajectoryExecutor::new(DeviceNoise::ideal(), 1),
        None,
    );
    assert!(matches!(err, Err(Error::Invalid { .. })));
}

#[test]
fn export_writes_one_file_per_member_and_layout() {
    let mut cfg = config("falcon-27", 5, 0.95, 80);
    cfg.backend = Backend::Export;
    let dir = tempfile::tempdir().unwrap();
    let manifest = export_for_hardware(&cfg, dir.path()).unwrap();
    assert_eq!(manifest.layouts.len(), 10);
    let all = files(dir.path());
    assert_eq!(all.len(), 811);
    let first = String::from_utf8(all["layout_0/dtc_q5_seed12345_n3.qasm"].clone()).unwrap();
    let path = &manifest.layouts[0].path;
    assert!(first.contains(&format!("q[0]->{}", path[0])));
    let top = String::from_utf8(all["manifest.json"].clone()).unwrap();
    assert!(top.contains("sequencing"));
}

#[test]
fn import_rejects_short_bitstrings() {
    let mut cfg = config("line-5", 5, 0.95, 3);
    cfg.backend = Backend::Export;
    let export = tempfile::tempdir().unwrap();
    let counts = tempfile::tempdir().unwrap();
    export_for_hardware(&cfg, export.path()).unwrap();
    simulate_export(
        export.path(),
        counts.path(),
        &DeviceNoise::ideal(),
        100,
        1,
        0,
    )
    .unwrap();
    let bad = counts.path().join(counts_file_name(0, 2));
    fs::write(&bad, r#"{"n": 2, "shots": 100, "counts": {"0101": 100}}"#).unwrap();
    let err = import_counts(
        export.path(),
        counts.path(),
        &AnalysisConfig::default(),
        None,
    )
    .unwrap_err();
    match err {
        Error::Import { file, .. } => assert_eq!(file, bad),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn import_rejects_missing_members() {
    let mut cfg = config("line-5", 5, 0.95, 3);
    cfg.backend = Backend::Export;
    let export = tempfile::tempdir().unwrap();
    let counts = tempfile::tempdir().unwrap();
    export_for_hardware(&cfg, export.path()).unwrap();
    simulate_export(
        export.path(),
        counts.path(),
        &DeviceNoise::ideal(),
        100,
        1,
        0,
    )
    .unwrap();
    fs::remove_file(counts.path().join(counts_file_name(0, 3))).unwrap();
    let err = import_counts(
        export.path(),
        counts.path(),
        &AnalysisConfig::default(),
        None,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Import { ref file, .. } if file.ends_with("layout_0/n_3.json")));
}

#[test]
fn export_import_round_trip_matches_direct_run() {
    let noise = DeviceNoise::uniform(0.02, 0.01).with_edge(12, 13, 0.08);
    let mut cfg = config("falcon-27", 5, 0.95, 25);
    cfg.noise = noise.clone();
    cfg.backend = Backend::Trajectory;
    cfg.shots = Some(400);
    cfg.trajectories = 20;
    cfg.exec_seed = 99;
    let direct = run_characterization(&cfg, None).unwrap();

    let export = tempfile::tempdir().unwrap();
    let counts = tempfile::tempdir().unwrap();
    let bundle = tempfile::tempdir().unwrap();
    cfg.backend = Backend::Export;
    export_for_hardware(&cfg, export.path()).unwrap();
    let written = simulate_export(export.path(), counts.path(), &noise, 400, 20, 99).unwrap();
    assert_eq!(written, direct.circuits_executed);
    let (runs, report) = import_counts(
        export.path(),
        counts.path(),
        &AnalysisConfig::default(),
        Some(bundle.path()),
    )
    .unwrap();
    assert_eq!(report, direct.report);
    for ((la, ta), (lb, tb)) in runs.iter().zip(&direct.runs) {
        assert_eq!(la, lb);
        assert_eq!(ta.values, tb.values);
    }
    assert_eq!(load_bundle_runs(bundle.path()).unwrap(), runs);
}

#[test]
fn ideal_scan_runs_to_the_horizon() {
    let cfg = config("falcon-27", 5, 1.0, 80);
    let scan = scan_faulty(&cfg, &ScanPolicy::new(5), None).unwrap();
    assert!(scan.faulty_qubits.is_empty());
    assert!(scan
        .layouts
        .iter()
        .all(|l| l.circuits == 81 && l.batches == 9));
    assert_eq!(scan.circuits_executed, scan.non_adaptive_circuits);
}

#[test]
fn scan_flags_the_qubits_of_a_bad_edge() {
    let mut cfg = config("falcon-27", 5, 0.95, 80);
    cfg.noise = DeviceNoise::ideal().with_edge(12, 13, 0.5);
    let dir = tempfile::tempdir().unwrap();
    let scan = scan_faulty(&cfg, &ScanPolicy::new(5), Some(dir.path())).unwrap();
    assert_eq!(scan.faulty_qubits, vec![12, 13]);
    for l in &scan.layouts {
        let has_edge = l
            .path
            .windows(2)
            .any(|w| (w[0], w[1]) == (12, 13) || (w[0], w[1]) == (13, 12));
        if has_edge {
            assert!(
                l.batches <= 2,
                "layout {} ran {} batches",
                l.layout_id,
                l.batches
            );
        }
    }
    assert!(scan.circuits_executed < scan.non_adaptive_circuits);
    assert!(dir.path().join("scan.md").exists() && dir.path().join("scan.json").exists());
}

#[test]
fn scan_agrees_with_full_run_below_the_horizon() {
    let mut cfg = config("falcon-27", 5, 0.95, 40);
    cfg.noise = DeviceNoise::uniform(0.01, 0.0).with_edge(7, 10, 0.3);
    let full = run_characterization(&cfg, None).unwrap();
    let mut policy = ScanPolicy::new(3);
    policy.stop_on_fault = false;
    let scan = scan_faulty(&cfg, &policy, None).unwrap();
    for (l, r) in scan.layouts.iter().zip(&full.report.layouts) {
        for j in 0..l.n_vis.len() {
            if r.n_vis[j] < 40 {
                assert!(l.resolved[j]);
                assert_eq!(
                    l.n_vis[j], r.n_vis[j],
                    "layout {} position {j}",
                    l.layout_id
                );
            }
        }
    }
}
