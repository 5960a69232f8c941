use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{observe, write_file, Executor, Job, RunConfig};
use crate::analysis::visible_cycles_of;
use crate::coverage::greedy_cover;
use crate::error::{Error, Result};
use crate::par::map_range;

pub const DEFAULT_BATCH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScanPolicy {
    /// Cycles (circuit members) executed per batch.
    pub batch: usize,
    /// Qubits with at most this many visible cycles are reported faulty.
    pub fault_cutoff: usize,
    /// Overrides the configured horizon when smaller.
    pub horizon: Option<usize>,
    /// Also stop a layout once it holds a faulty qubit and every other qubit
    /// is known to be above the cutoff.
    pub stop_on_fault: bool,
}

impl ScanPolicy {
    pub fn new(fault_cutoff: usize) -> Self {
        ScanPolicy {
            batch: DEFAULT_BATCH,
            fault_cutoff,
            horizon: None,
            stop_on_fault: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 {
            return Err(Error::invalid("batch", "must be at least 1"));
        }
        if self.horizon == Some(0) {
            return Err(Error::invalid("horizon", "must be at least 1 cycle"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayoutScan {
    pub layout_id: usize,
    pub path: Vec<usize>,
    pub batches: usize,
    pub circuits: u64,
    /// Visible cycles when `resolved`, otherwise the lower bound observed
    /// before the layout stopped.
    pub n_vis: Vec<usize>,
    /// The threshold crossing (or the horizon) was reached.
    pub resolved: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaultyQubit {
    pub layout_id: usize,
    pub position: usize,
    pub physical_qubit: usize,
    pub n_vis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub policy: ScanPolicy,
    pub horizon: usize,
    pub threshold: f64,
    pub layouts: Vec<LayoutScan>,
    pub faulty: Vec<FaultyQubit>,
    /// Distinct physical qubits among `faulty`, ascending.
    pub faulty_qubits: Vec<usize>,
    pub circuits_executed: u64,
    /// Circuits a full run to the horizon would have executed.
    pub non_adaptive_circuits: u64,
    pub shots_total: u64,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Faulty-qubit scan\n\n");
        let _ = writeln!(
            out,
            "Batch {}, fault cutoff {}, horizon {}. Executed {} of {} circuits.\n",
            self.policy.batch,
            self.policy.fault_cutoff,
            self.horizon,
            self.circuits_executed,
            self.non_adaptive_circuits
        );
        if self.faulty_qubits.is_empty() {
            let _ = writeln!(out, "No faulty qubits.\n");
        } else {
            let list: Vec<String> = self.faulty_qubits.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "Faulty qubits: {}\n", list.join(", "));
        }
        let _ = writeln!(out, "| layout | path | batches | N_vis |");
        let _ = writeln!(out, "|---|---|---|---|");
        for l in &self.layouts {
            let n_vis: Vec<String> = l
                .n_vis
                .iter()
                .zip(&l.resolved)
                .map(|(n, &r)| if r { n.to_string() } else { format!(">={n}") })
                .collect();
            let _ = writeln!(
                out,
                "| {} | {:?} | {} | {} |",
                l.layout_id,
                l.path,
                l.batches,
                n_vis.join(" ")
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("layout_id,position,physical_qubit,n_vis,resolved,faulty\n");
        for l in &self.layouts {
            for (pos, &phys) in l.path.iter().enumerate() {
                let faulty = self
                    .faulty
                    .iter()
                    .any(|f| f.layout_id == l.layout_id && f.position == pos);
                let _ = writeln!(
                    out,
                    "{},{pos},{phys},{},{},{faulty}",
                    l.layout_id, l.n_vis[pos], l.resolved[pos]
                );
            }
        }
        out
    }
}

/// Runs the configured builtin backend; see [`scan_with_executor`].
pub fn scan_faulty(
    config: &RunConfig,
    policy: &ScanPolicy,
    out: Option<&Path>,
) -> Result<ScanReport> {
    config.validate()?;
    let executor = config.executor()?;
    scan_with_executor(config, policy, executor.as_ref(), out)
}

/// Executes members in batches of `policy.batch` per layout, stopping each
/// layout once every qubit has crossed the threshold (or, with
/// `stop_on_fault`, once its fault status is settled).
pub fn scan_with_executor(
    config: &RunConfig,
    policy: &ScanPolicy,
    executor: &dyn Executor,
    out: Option<&Path>,
) -> Result<ScanReport> {
    config.validate()?;
    policy.validate()?;
    if config.shots.is_none() && !executor.capabilities().supports_exact {
        return Err(Error::invalid(
            "shots",
            "this executor samples shots and cannot return exact expectations",
        ));
    }
    let horizon = policy
        .horizon
        .map_or(config.horizon(), |h| h.min(config.horizon()));
    let cover = greedy_cover(&config.map, config.q(), &config.cover_options())?;
    cover.require_complete()?;
    let threshold = config.analysis.threshold;

    let scans = map_range(
        config.schedule,
        cover.layouts.len(),
        |k| -> Result<LayoutScan> {
            let family = config.family_for(k)?;
            let layout = &cover.layouts[k];
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(horizon + 1);
            let mut batches = 0;
            loop {
                let start = rows.len();
                let members: Vec<usize> =
                    (start..(start + policy.batch).min(horizon + 1)).collect();
                let job = Job {
                    family: &family,
                    layout,
                    members: &members,
                };
                let (new_rows, _) = observe(executor, &job, config.shots, config.layout_seed(k))?;
                rows.extend(new_rows);
                batches += 1;
                let status = layout_status(&rows, threshold);
                let done = rows.len() == horizon + 1
                    || status.iter().all(|&(_, crossed)| crossed)
                    || (policy.stop_on_fault
                        && status
                            .iter()
                            .any(|&(n, crossed)| crossed && n <= policy.fault_cutoff)
                        && status
                            .iter()
                            .all(|&(n, crossed)| crossed || n > policy.fault_cutoff));
                if done {
                    let at_horizon = rows.len() == horizon + 1;
                    return Ok(LayoutScan {
                        layout_id: k,
                        path: layout.path().to_vec(),
                        batches,
                        circuits: rows.len() as u64,
                        n_vis: status.iter().map(|s| s.0).collect(),
                        resolved: status.iter().map(|s| s.1 || at_horizon).collect(),
                    });
                }
            }
        },
    );
    let layouts = scans.into_iter().collect::<Result<Vec<_>>>()?;

    let mut faulty = Vec::new();
    for l in &layouts {
        for (position, (&n_vis, &resolved)) in l.n_vis.iter().zip(&l.resolved).enumerate() {
            if resolved && n_vis <= policy.fault_cutoff {
                faulty.push(FaultyQubit {
                    layout_id: l.layout_id,
                    position,
                    physical_qubit: l.path[position],
                    n_vis,
                });
            }
        }
    }
    let faulty_qubits: BTreeSet<usize> = faulty.iter().map(|f| f.physical_qubit).collect();
    let circuits_executed: u64 = layouts.iter().map(|l| l.circuits).sum();
    let report = ScanReport {
        policy: *policy,
        horizon,
        threshold,
        non_adaptive_circuits: layouts.len() as u64 * (horizon as u64 + 1),
        shots_total: circuits_executed * config.shots.unwrap_or(0),
        circuits_executed,
        faulty_qubits: faulty_qubits.into_iter().collect(),
        faulty,
        layouts,
    };
    if let Some(dir) = out {
        write_file(&dir.join("scan.json"), report.to_json())?;
        write_file(&dir.join("scan.md"), report.to_markdown())?;
        write_file(&dir.join("scan.csv"), report.to_csv())?;
        write_file(&dir.join("cover.json"), cover.to_json())?;
    }
    Ok(report)
}

/// Per qubit: (visible cycles so far, whether the threshold was crossed).
fn layout_status(rows: &[Vec<f64>], threshold: f64) -> Vec<(usize, bool)> {
    let q = rows[0].len();
    (0..q)
        .map(|j| {
            let amps: Vec<f64> = rows.windows(2).map(|w| (w[1][j] - w[0][j]).abs()).collect();
            let v = visible_cycles_of(&amps, threshold);
            (v.n_vis, !v.saturated)
        })
        .collect()
}
