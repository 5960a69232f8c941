//! The boundary between orchestration and whatever runs the circuits.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::counts::ShotRecord;
use crate::coverage::Layout;
use crate::dtc::CircuitFamily;
use crate::error::{Error, Result};
use crate::noise::DeviceNoise;
use crate::par::Schedule;
use crate::sim::{self, ShotOptions, EXACT_QUBIT_CAP, STATEVECTOR_QUBIT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub max_qubits: usize,
    /// Can return infinite-shot expectation values.
    pub supports_exact: bool,
}

/// Members of one family to run on one layout.
#[derive(Debug, Clone, Copy)]
pub struct Job<'a> {
    pub family: &'a CircuitFamily,
    pub layout: &'a Layout,
    pub members: &'a [usize],
}

/// Runs circuit members on a device. Implementations own their noise.
pub trait Executor: Sync {
    fn capabilities(&self) -> Capabilities;

    /// One record per member of `job`, in order. Builtin executors are
    /// deterministic in `seed`.
    fn execute(&self, job: &Job, shots: u64, seed: u64) -> Result<Vec<ShotRecord>>;

    /// Reported polarizations per member (`[member][position]`).
    fn expectations(&self, job: &Job) -> Result<Vec<Vec<f64>>> {
        let _ = job;
        Err(Error::Executor(
            "this executor cannot compute exact expectations".into(),
        ))
    }
}

fn check_width(caps: Capabilities, job: &Job) -> Result<()> {
    if job.layout.len() != job.family.q() {
        return Err(Error::Executor(format!(
            "layout {:?} does not host a {}-qubit chain",
            job.layout.path(),
            job.family.q()
        )));
    }
    if job.family.q() > caps.max_qubits {
        return Err(Error::Executor(format!(
            "{} qubits exceed the executor limit of {}",
            job.family.q(),
            caps.max_qubits
        )));
    }
    Ok(())
}

/// Density-matrix simulation of a device.
#[derive(Debug, Clone)]
pub struct ExactExecutor {
    pub noise: DeviceNoise,
}

impl ExactExecutor {
    pub fn new(noise: DeviceNoise) -> Self {
        ExactExecutor { noise }
    }
}

impl Executor for ExactExecutor {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            max_qubits: EXACT_QUBIT_CAP,
            supports_exact: true,
        }
    }

    fn execute(&self, job: &Job, shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
        check_width(self.capabilities(), job)?;
        let noise = self.noise.chain(job.layout.path());
        sim::sample_exact(job.family, &noise, job.members, shots, seed)
    }

    fn expectations(&self, job: &Job) -> Result<Vec<Vec<f64>>> {
        check_width(self.capabilities(), job)?;
        let noise = self.noise.chain(job.layout.path());
        sim::exact_expectations(job.family, &noise, job.members)
    }
}

/// Stochastic-trajectory simulation of a device.
#[derive(Debug, Clone)]
pub struct TrajectoryExecutor {
    pub noise: DeviceNoise,
    pub trajectories: u64,
    pub schedule: Schedule,
}

impl TrajectoryExecutor {
    pub fn new(noise: DeviceNoise, trajectories: u64) -> Self {
        TrajectoryExecutor {
            noise,
            trajectories,
            schedule: Schedule::default(),
        }
    }
}

impl Executor for TrajectoryExecutor {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            max_qubits: STATEVECTOR_QUBIT_CAP,
            supports_exact: false,
        }
    }

    fn execute(&self, job: &Job, shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
        check_width(self.capabilities(), job)?;
        let noise = self.noise.chain(job.layout.path());
        let opts = ShotOptions::new(shots, self.trajectories, seed).with_schedule(self.schedule);
        sim::sample_trajectories(job.family, &noise, job.members, &opts)
    }
}

/// Wraps an executor and tallies what it was asked to run.
#[derive(Debug, Default)]
pub struct Counting<E> {
    pub inner: E,
    circuits: AtomicU64,
    shots: AtomicU64,
}

impl<E> Counting<E> {
    pub fn new(inner: E) -> Self {
        Counting {
            inner,
            circuits: AtomicU64::new(0),
            shots: AtomicU64::new(0),
        }
    }

    pub fn circuits(&self) -> u64 {
        self.circuits.load(Ordering::Relaxed)
    }

    pub fn shots(&self) -> u64 {
        self.shots.load(Ordering::Relaxed)
    }
}

impl<E: Executor> Executor for Counting<E> {
    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn execute(&self, job: &Job, shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
        let out = self.inner.execute(job, shots, seed)?;
        self.circuits
            .fetch_add(job.members.len() as u64, Ordering::Relaxed);
        self.shots
            .fetch_add(out.iter().map(|r| r.shots).sum(), Ordering::Relaxed);
        Ok(out)
    }

    fn expectations(&self, job: &Job) -> Result<Vec<Vec<f64>>> {
        let out = self.inner.expectations(job)?;
        self.circuits
            .fetch_add(job.members.len() as u64, Ordering::Relaxed);
        Ok(out)
    }
}
