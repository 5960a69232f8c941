//! File boundary to external devices: per-layout circuit export, and the
//! matching counts import that resumes at analysis.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::run::{write_report, write_traces};
use super::{read_file, write_file, RunConfig};
use crate::analysis::{AnalysisConfig, VisibilityReport};
use crate::counts::ShotRecord;
use crate::coverage::{greedy_cover, Layout};
use crate::error::{Error, Result};
use crate::noise::DeviceNoise;
use crate::par::{map_range, Schedule};
use crate::qasm::{member_file_name, member_program, parse_program, FamilyManifest, BIT_ORDER};
use crate::rng::derive_seed;
use crate::sim::{sample_program, ShotOptions};
use crate::trace::{PolarizationTrace, Shots};

pub const SEQUENCING_NOTE: &str = "circuits of a layout were meant to run back to back on the \
same calibration; file export cannot enforce on-chip sequencing, so submit each layout directory \
as one batch";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedLayout {
    pub id: usize,
    pub path: Vec<usize>,
    pub dir: String,
    pub family_seed: u64,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub family: FamilyManifest,
    pub reseed_per_layout: bool,
    pub map_name: String,
    pub chain_length: usize,
    pub horizon: usize,
    pub bit_order: String,
    pub sequencing: String,
    /// Where `import-counts` looks for member `n` of layout `k`.
    pub counts_pattern: String,
    pub layouts: Vec<ExportedLayout>,
}

impl ExportManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn load(export_dir: &Path) -> Result<Self> {
        let path = export_dir.join("manifest.json");
        Self::from_json(&read_file(&path)?).map_err(|e| Error::Import {
            file: path,
            reason: e.to_string(),
        })
    }
}

/// Counts file for member `n` of layout `k`, relative to the counts directory.
pub fn counts_file_name(layout_id: usize, n: usize) -> String {
    format!("layout_{layout_id}/n_{n}.json")
}

/// Writes `layout_{k}/dtc_q{q}_seed{s}_n{n}.qasm` for every layout and member
/// plus a top-level `manifest.json`.
pub fn export_for_hardware(config: &RunConfig, out: &Path) -> Result<ExportManifest> {
    config.validate()?;
    let cover = greedy_cover(&config.map, config.q(), &config.cover_options())?;
    cover.require_complete()?;
    let mut layouts = Vec::with_capacity(cover.layouts.len());
    for (k, layout) in cover.layouts.iter().enumerate() {
        let family = config.family_for(k)?;
        let dir = format!("layout_{k}");
        let mut members = Vec::with_capacity(config.horizon() + 1);
        for n in 0..=config.horizon() {
            let name = member_file_name(family.q(), family.params.seed, n);
            let text = member_program(&family, n, Some(layout.path()));
            write_file(&out.join(&dir).join(&name), text)?;
            members.push(name);
        }
        layouts.push(ExportedLayout {
            id: k,
            path: layout.path().to_vec(),
            dir,
            family_seed: family.params.seed,
            members,
        });
    }
    let manifest = ExportManifest {
        family: FamilyManifest::from_family(&config.family_for(0)?),
        reseed_per_layout: config.reseed_per_layout,
        map_name: config.map.name.clone(),
        chain_length: config.q(),
        horizon: config.horizon(),
        bit_order: BIT_ORDER.to_string(),
        sequencing: SEQUENCING_NOTE.to_string(),
        counts_pattern: "layout_{k}/n_{n}.json".to_string(),
        layouts,
    };
    write_file(&out.join("manifest.json"), manifest.to_json())?;
    Ok(manifest)
}

/// Plays the external device: runs every exported file through the
/// trajectory backend and writes counts where `import_counts` expects them.
/// Seeds match a direct trajectory run with the same `exec_seed`.
pub fn simulate_export(
    export_dir: &Path,
    counts_dir: &Path,
    noise: &DeviceNoise,
    shots: u64,
    trajectories: u64,
    exec_seed: u64,
) -> Result<u64> {
    let manifest = ExportManifest::load(export_dir)?;
    let mut written = 0;
    for layout in &manifest.layouts {
        let chain = noise.chain(&layout.path);
        let opts = ShotOptions::new(
            shots,
            trajectories,
            derive_seed(exec_seed, &[layout.id as u64]),
        )
        .with_schedule(Schedule::Sequential);
        let records = map_range(
            Schedule::default(),
            layout.members.len(),
            |n| -> Result<ShotRecord> {
                let file = export_dir.join(&layout.dir).join(&layout.members[n]);
                let program = parse_program(&read_file(&file)?).map_err(|e| Error::Import {
                    file: file.clone(),
                    reason: e.to_string(),
                })?;
                sample_program(&program, &chain, n, &opts)
            },
        );
        for (n, record) in records.into_iter().enumerate() {
            let path = counts_dir.join(counts_file_name(layout.id, n));
            write_file(&path, record?.to_json())?;
            written += 1;
        }
    }
    Ok(written)
}

/// Reads externally produced counts for an export, scores them and, when
/// `out` is given, writes a bundle like a direct run does.
pub fn import_counts(
    export_dir: &Path,
    counts_dir: &Path,
    analysis: &AnalysisConfig,
    out: Option<&Path>,
) -> Result<(Vec<(Layout, PolarizationTrace)>, VisibilityReport)> {
    analysis.validate()?;
    let manifest = ExportManifest::load(export_dir)?;
    let q = manifest.chain_length;
    let mut runs = Vec::with_capacity(manifest.layouts.len());
    let mut records = Vec::with_capacity(manifest.layouts.len());
    for layout in &manifest.layouts {
        if layout.members.len() != manifest.horizon + 1 {
            return Err(Error::Import {
                file: export_dir.join("manifest.json"),
                reason: format!(
                    "layout {} lists {} members, expected {}",
                    layout.id,
                    layout.members.len(),
                    manifest.horizon + 1
                ),
            });
        }
        let mut recs = Vec::with_capacity(layout.members.len());
        let mut rows = Vec::with_capacity(layout.members.len());
        for n in 0..layout.members.len() {
            let file = counts_dir.join(counts_file_name(layout.id, n));
            let reject = |reason: String| Error::Import {
                file: file.clone(),
                reason,
            };
            let text = read_file(&file).map_err(|e| reject(e.to_string()))?;
            let record = ShotRecord::from_json(&text).map_err(|e| reject(e.to_string()))?;
            record.validate(q).map_err(|e| reject(e.to_string()))?;
            if record.n != n {
                return Err(reject(format!("holds member {}, expected {n}", record.n)));
            }
            if let Some(first) = recs.first().map(|r: &ShotRecord| r.shots) {
                if record.shots != first {
                    return Err(reject(format!(
                        "{} shots, other members have {first}",
                        record.shots
                    )));
                }
            }
            rows.push(record.polarizations().map_err(|e| reject(e.to_string()))?);
            recs.push(record);
        }
        let trace = PolarizationTrace::from_cycles(&rows, Shots::Sampled(recs[0].shots), None)?;
        runs.push((Layout::new(layout.path.clone()), trace));
        records.push(Some(recs));
    }
    let report = VisibilityReport::build(&runs, analysis)?;
    if let Some(dir) = out {
        let mut doc = serde_json::to_value(&manifest)?;
        doc["status"] = json!("imported");
        doc["counts_dir"] = json!(counts_dir.display().to_string());
        doc["analysis"] = serde_json::to_value(analysis)?;
        write_file(
            &dir.join("manifest.json"),
            serde_json::to_string_pretty(&doc)?,
        )?;
        let cover = json!({
            "map_name": manifest.map_name,
            "chain_length": q,
            "layouts": manifest.layouts.iter().map(|l| &l.path).collect::<Vec<_>>(),
            "uncovered": [],
        });
        write_file(
            &dir.join("cover.json"),
            serde_json::to_string_pretty(&cover)?,
        )?;
        write_traces(dir, &runs, &records)?;
        write_report(dir, &runs, &report)?;
    }
    Ok((runs, report))
}
