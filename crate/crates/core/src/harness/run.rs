use std::path::Path;

use serde_json::{json, Value};

use super::{observe, read_file, write_file, Executor, Job, RunConfig};
use crate::analysis::{mean_amplitude_csv, plot_csv, VisibilityReport};
use crate::counts::ShotRecord;
use crate::coverage::{greedy_cover, CoveringSet, Layout};
use crate::dtc::CircuitFamily;
use crate::error::{Error, Result};
use crate::par::map_range;
use crate::qasm::FamilyManifest;
use crate::trace::{PolarizationTrace, Shots};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub cover: CoveringSet,
    /// One family per layout (clones of one family unless reseeded).
    pub families: Vec<CircuitFamily>,
    pub runs: Vec<(Layout, PolarizationTrace)>,
    /// Raw counts per layout when shots were sampled.
    pub records: Vec<Option<Vec<ShotRecord>>>,
    pub report: VisibilityReport,
    pub circuits_executed: u64,
    pub shots_total: u64,
}

/// Runs the configured builtin backend; see [`run_with_executor`].
pub fn run_characterization(config: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    config.validate()?;
    let executor = config.executor()?;
    run_with_executor(config, executor.as_ref(), out)
}

/// Covers the map, runs every member on every layout, scores the traces and,
/// when `out` is given, writes the bundle there. Partial bundles are written
/// before an error is returned.
pub fn run_with_executor(
    config: &RunConfig,
    executor: &dyn Executor,
    out: Option<&Path>,
) -> Result<RunOutcome> {
    config.validate()?;
    if config.shots.is_none() && !executor.capabilities().supports_exact {
        return Err(Error::invalid(
            "shots",
            "this executor samples shots and cannot return exact expectations",
        ));
    }
    let cover = greedy_cover(&config.map, config.q(), &config.cover_options())?;
    if !cover.success() {
        if let Some(dir) = out {
            write_partial(dir, config, &cover, &[], &[], "uncoverable edges")?;
        }
        cover.require_complete()?;
    }

    let families = families(config, cover.layouts.len())?;
    let members: Vec<usize> = (0..=config.horizon()).collect();
    let results = map_range(config.schedule, cover.layouts.len(), |k| {
        let job = Job {
            family: &families[k],
            layout: &cover.layouts[k],
            members: &members,
        };
        observe(executor, &job, config.shots, config.layout_seed(k))
    });

    let mut runs = Vec::with_capacity(results.len());
    let mut records = Vec::with_capacity(results.len());
    let mut circuits_executed = 0;
    let mut shots_total = 0;
    let mut failure = None;
    for (k, result) in results.into_iter().enumerate() {
        match result {
            Ok((rows, recs)) => {
                circuits_executed += members.len() as u64;
                shots_total += config.shots.unwrap_or(0) * members.len() as u64;
                let (shots, seed) = match config.shots {
                    Some(s) => (Shots::Sampled(s), Some(config.layout_seed(k))),
                    None => (Shots::Exact, None),
                };
                let trace = PolarizationTrace::from_cycles(&rows, shots, seed)
                    .map_err(|e| Error::Executor(format!("layout {k}: {e}")))?;
                runs.push((cover.layouts[k].clone(), trace));
                records.push(recs);
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    if let Some(err) = failure {
        if let Some(dir) = out {
            write_partial(dir, config, &cover, &runs, &records, &err.to_string())?;
        }
        return Err(match err {
            e @ (Error::Executor(_) | Error::Io { .. }) => e,
            other => Error::Executor(other.to_string()),
        });
    }

    let report = VisibilityReport::build(&runs, &config.analysis)?;
    let outcome = RunOutcome {
        cover,
        families,
        runs,
        records,
        report,
        circuits_executed,
        shots_total,
    };
    if let Some(dir) = out {
        write_bundle(dir, config, &outcome)?;
    }
    Ok(outcome)
}

fn families(config: &RunConfig, layouts: usize) -> Result<Vec<CircuitFamily>> {
    if config.reseed_per_layout {
        (0..layouts).map(|k| config.family_for(k)).collect()
    } else {
        let shared = config.family_for(0)?;
        Ok(vec![shared; layouts])
    }
}

fn run_manifest(config: &RunConfig, status: &str, extra: Value) -> String {
    let mut manifest = config.manifest_value();
    manifest["status"] = json!(status);
    if let (Value::Object(m), Value::Object(e)) = (&mut manifest, extra) {
        m.extend(e);
    }
    serde_json::to_string_pretty(&manifest).expect("manifest serializes")
}

fn write_families(dir: &Path, config: &RunConfig, families: &[CircuitFamily]) -> Result<()> {
    if config.reseed_per_layout {
        for (k, family) in families.iter().enumerate() {
            let path = dir.join(format!("families/layout_{k}.json"));
            write_file(&path, FamilyManifest::from_family(family).to_json())?;
        }
    } else if let Some(family) = families.first() {
        write_file(
            &dir.join("family.json"),
            FamilyManifest::from_family(family).to_json(),
        )?;
    }
    Ok(())
}

pub(super) fn write_traces(
    dir: &Path,
    runs: &[(Layout, PolarizationTrace)],
    records: &[Option<Vec<ShotRecord>>],
) -> Result<()> {
    for (k, (_, trace)) in runs.iter().enumerate() {
        write_file(
            &dir.join(format!("traces/layout_{k}.json")),
            trace.to_json(),
        )?;
    }
    for (k, recs) in records.iter().enumerate() {
        if let Some(recs) = recs {
            let text = serde_json::to_string_pretty(recs).expect("counts serialize");
            write_file(&dir.join(format!("counts/layout_{k}.json")), text)?;
        }
    }
    Ok(())
}

fn write_partial(
    dir: &Path,
    config: &RunConfig,
    cover: &CoveringSet,
    runs: &[(Layout, PolarizationTrace)],
    records: &[Option<Vec<ShotRecord>>],
    error: &str,
) -> Result<()> {
    let extra = json!({
        "error": error,
        "layouts": cover.layouts.len(),
        "completed_layouts": runs.len(),
    });
    write_file(
        &dir.join("manifest.json"),
        run_manifest(config, "failed", extra),
    )?;
    write_file(&dir.join("cover.json"), cover.to_json())?;
    write_traces(dir, runs, records)
}

fn write_bundle(dir: &Path, config: &RunConfig, outcome: &RunOutcome) -> Result<()> {
    let extra = json!({
        "layouts": outcome.cover.layouts.len(),
        "circuits_executed": outcome.circuits_executed,
        "shots_total": outcome.shots_total,
    });
    write_file(
        &dir.join("manifest.json"),
        run_manifest(config, "complete", extra),
    )?;
    write_file(&dir.join("cover.json"), outcome.cover.to_json())?;
    write_families(dir, config, &outcome.families)?;
    write_traces(dir, &outcome.runs, &outcome.records)?;
    write_report(dir, &outcome.runs, &outcome.report)
}

/// Writes `report.{json,csv,md}`, `plot.csv` and `mean_amplitude.csv`.
pub fn write_report(
    dir: &Path,
    runs: &[(Layout, PolarizationTrace)],
    report: &VisibilityReport,
) -> Result<()> {
    write_file(&dir.join("report.json"), report.to_json())?;
    write_file(&dir.join("report.csv"), report.to_csv())?;
    write_file(&dir.join("report.md"), report.to_markdown())?;
    write_file(&dir.join("plot.csv"), plot_csv(runs))?;
    write_file(&dir.join("mean_amplitude.csv"), mean_amplitude_csv(runs)?)
}

/// Reads the layouts and traces of a bundle written by a run or an import.
pub fn load_bundle_runs(dir: &Path) -> Result<Vec<(Layout, PolarizationTrace)>> {
    let cover: Value = serde_json::from_str(&read_file(&dir.join("cover.json"))?)?;
    let layouts: Vec<Layout> = serde_json::from_value(cover["layouts"].clone())?;
    layouts
        .into_iter()
        .enumerate()
        .map(|(k, layout)| {
            let path = dir.join(format!("traces/layout_{k}.json"));
            let trace =
                PolarizationTrace::from_json(&read_file(&path)?).map_err(|e| Error::Import {
                    file: path.clone(),
                    reason: e.to_string(),
                })?;
            Ok((layout, trace))
        })
        .collect()
}
