//! End-to-end characterization runs: cover, execute, analyze, persist.

mod executor;
mod export;
mod run;
mod scan;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

pub use executor::{Capabilities, Counting, ExactExecutor, Executor, Job, TrajectoryExecutor};
pub use export::{
    counts_file_name, export_for_hardware, import_counts, simulate_export, ExportManifest,
    ExportedLayout, SEQUENCING_NOTE,
};
pub use run::{
    load_bundle_runs, run_characterization, run_with_executor, write_report, RunOutcome,
};
pub use scan::{scan_faulty, scan_with_executor, FaultyQubit, LayoutScan, ScanPolicy, ScanReport};

use crate::analysis::AnalysisConfig;
use crate::counts::ShotRecord;
use crate::coverage::{builtin_topology, load_coupling_map, CouplingMap, CoverOptions};
use crate::dtc::{CircuitFamily, DtcParams};
use crate::error::{Error, Result};
use crate::noise::DeviceNoise;
use crate::par::Schedule;
use crate::qasm::BIT_ORDER;
use crate::rng::derive_seed;
use crate::sim::{EXACT_QUBIT_CAP, STATEVECTOR_QUBIT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Trajectory,
    /// Write circuits for an external device instead of executing them.
    Export,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Trajectory => "trajectory",
            Backend::Export => "export",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "trajectory" => Ok(Backend::Trajectory),
            "export" => Ok(Backend::Export),
            _ => Err(Error::invalid(
                "backend",
                format!("`{s}` is not exact, trajectory or export"),
            )),
        }
    }
}

/// A bundled topology name, or a path to a coupling-map document.
pub fn resolve_map(source: &str) -> Result<CouplingMap> {
    match builtin_topology(source) {
        Ok(map) => Ok(map),
        Err(builtin_err) => {
            let path = Path::new(source);
            if path.exists() {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                load_coupling_map(&text)
            } else {
                Err(builtin_err)
            }
        }
    }
}

/// A noise file path or `uniform:EPS[,GAMMA]`.
pub fn resolve_noise(source: &str) -> Result<DeviceNoise> {
    if source.starts_with("uniform:") {
        return DeviceNoise::parse_shorthand(source);
    }
    let text = fs::read_to_string(source).map_err(|e| Error::io(source, e))?;
    DeviceNoise::from_json(&text)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Chain length, seed and horizon (`n_max`) of the DTC family.
    pub params: DtcParams,
    pub map: CouplingMap,
    pub noise: DeviceNoise,
    pub backend: Backend,
    /// Shots per circuit. `None` asks the exact backend for expectation values.
    pub shots: Option<u64>,
    pub trajectories: u64,
    pub exec_seed: u64,
    pub analysis: AnalysisConfig,
    pub cover: CoverOptions,
    /// Draw a separate phase set per layout instead of sharing one unitary.
    pub reseed_per_layout: bool,
    pub schedule: Schedule,
}

impl RunConfig {
    pub fn new(params: DtcParams, map: CouplingMap) -> Self {
        RunConfig {
            params,
            map,
            noise: DeviceNoise::ideal(),
            backend: Backend::Exact,
            shots: None,
            trajectories: 1,
            exec_seed: 0,
            analysis: AnalysisConfig::default(),
            cover: CoverOptions::default(),
            reseed_per_layout: false,
            schedule: Schedule::default(),
        }
    }

    pub fn q(&self) -> usize {
        self.params.q
    }

    pub fn horizon(&self) -> usize {
        self.params.n_max
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.noise.validate_for(&self.map)?;
        self.analysis.validate()?;
        if self.q() < 2 {
            return Err(Error::invalid(
                "chain length",
                "layouts need at least 2 qubits",
            ));
        }
        if self.horizon() == 0 {
            return Err(Error::invalid("horizon", "must be at least 1 cycle"));
        }
        let cap = match self.backend {
            Backend::Exact => EXACT_QUBIT_CAP,
            Backend::Trajectory => STATEVECTOR_QUBIT_CAP,
            Backend::Export => usize::MAX,
        };
        if self.q() > cap {
            return Err(Error::invalid(
                "chain length",
                format!(
                    "{} exceeds the {} backend cap of {cap}",
                    self.q(),
                    self.backend
                ),
            ));
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shots", "must be at least 1"));
        }
        if self.backend == Backend::Trajectory {
            let shots = self.shots.ok_or_else(|| {
                Error::invalid("shots", "the trajectory backend needs a shot count")
            })?;
            if self.trajectories == 0 || self.trajectories > shots {
                return Err(Error::invalid(
                    "trajectories",
                    format!("{} is not within 1..={shots}", self.trajectories),
                ));
            }
        }
        Ok(())
    }

    fn cover_options(&self) -> CoverOptions {
        CoverOptions {
            schedule: self.schedule,
            ..self.cover
        }
    }

    /// Family run on layout `layout_id`.
    pub fn family_for(&self, layout_id: usize) -> Result<CircuitFamily> {
        let mut params = self.params.clone();
        if self.reseed_per_layout {
            params.seed = derive_seed(params.seed, &[layout_id as u64]);
        }
        CircuitFamily::generate(&params)
    }

    /// Execution seed handed to the executor for layout `layout_id`.
    pub fn layout_seed(&self, layout_id: usize) -> u64 {
        derive_seed(self.exec_seed, &[layout_id as u64])
    }

    /// The builtin executor for the configured backend.
    pub fn executor(&self) -> Result<Box<dyn Executor>> {
        match self.backend {
            Backend::Exact => Ok(Box::new(ExactExecutor::new(self.noise.clone()))),
            Backend::Trajectory => Ok(Box::new(TrajectoryExecutor {
                noise: self.noise.clone(),
                trajectories: self.trajectories,
                schedule: self.schedule,
            })),
            Backend::Export => Err(Error::invalid(
                "backend",
                "the export backend writes circuits instead of executing them",
            )),
        }
    }

    /// Everything needed to reproduce the run.
    pub fn manifest_value(&self) -> Value {
        let p = &self.params;
        json!({
            "tool": "dtcbench",
            "version": env!("CARGO_PKG_VERSION"),
            "params": {
                "q": p.q,
                "g": p.g,
                "seed": p.seed,
                "n_max": p.n_max,
                "rzz_interval": p.rzz_interval,
                "rz_interval": p.rz_interval,
                "convention": "half-angle",
            },
            "reseed_per_layout": self.reseed_per_layout,
            "map": self.map.name,
            "chain_length": p.q,
            "backend": self.backend.to_string(),
            "shots": self.shots.map_or(json!("exact"), |s| json!(s)),
            "trajectories": self.trajectories,
            "exec_seed": self.exec_seed,
            "noise": self.noise.to_json_value(),
            "analysis": self.analysis,
            "cover": {
                "cap": self.cover.cap,
                "seed": self.cover.seed,
                "restarts": self.cover.restarts,
            },
            "bit_order": BIT_ORDER,
        })
    }
}

/// Polarization rows per member, plus the raw counts when sampled.
pub(crate) type Observed = (Vec<Vec<f64>>, Option<Vec<ShotRecord>>);

/// Runs `members` of a layout and returns per-member polarization rows plus
/// the raw counts when sampling.
pub(crate) fn observe(
    executor: &dyn Executor,
    job: &Job,
    shots: Option<u64>,
    seed: u64,
) -> Result<Observed> {
    match shots {
        None => {
            let rows = executor.expectations(job)?;
            if rows.len() != job.members.len() {
                return Err(Error::Executor(format!(
                    "{} expectation rows for {} circuits",
                    rows.len(),
                    job.members.len()
                )));
            }
            Ok((rows, None))
        }
        Some(shots) => {
            let records = executor.execute(job, shots, seed)?;
            if records.len() != job.members.len() {
                return Err(Error::Executor(format!(
                    "{} records for {} circuits",
                    records.len(),
                    job.members.len()
                )));
            }
            let mut rows = Vec::with_capacity(records.len());
            for (record, &n) in records.iter().zip(job.members) {
                if record.n != n || record.shots != shots {
                    return Err(Error::Executor(format!(
                        "record for member {} with {} shots, expected member {n} with {shots}",
                        record.n, record.shots
                    )));
                }
                record
                    .validate(job.family.q())
                    .map_err(|e| Error::Executor(e.to_string()))?;
                rows.push(record.polarizations()?);
            }
            Ok((rows, Some(records)))
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
