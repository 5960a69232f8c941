//! Noisy simulation of circuit families.
//!
//! Two backends share one lowering of gates to operations: an exact
//! density-matrix backend and a stochastic-trajectory statevector backend.
//! Per-task seeds are derived from `(exec_seed, member, trajectory)`, so
//! sampled results do not depend on the schedule.

mod density;
mod ops;
mod statevector;

use std::collections::BTreeMap;

pub use density::DensityMatrix;
pub use statevector::StateVector;

use crate::counts::ShotRecord;
use crate::dtc::CircuitFamily;
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, ReadoutError};
use crate::par::{map_range, map_slice, Schedule};
use crate::qasm::Program;
use crate::rng::{derive_seed, SplitMix64};
use crate::trace::{PolarizationTrace, Shots};
use ops::{compile, Op, Register};
use statevector::Trajectory;

pub const EXACT_QUBIT_CAP: usize = 12;
pub const STATEVECTOR_QUBIT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotOptions {
    pub shots: u64,
    pub trajectories: u64,
    pub exec_seed: u64,
    pub schedule: Schedule,
}

impl ShotOptions {
    pub fn new(shots: u64, trajectories: u64, exec_seed: u64) -> Self {
        ShotOptions {
            shots,
            trajectories,
            exec_seed,
            schedule: Schedule::default(),
        }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::invalid("shots", "must be at least 1"));
        }
        if self.trajectories == 0 || self.trajectories > self.shots {
            return Err(Error::invalid(
                "trajectories",
                format!("{} is not within 1..={}", self.trajectories, self.shots),
            ));
        }
        Ok(())
    }
}

fn check_inputs(
    family: &CircuitFamily,
    noise: &NoiseModel,
    horizon: usize,
    cap: usize,
) -> Result<()> {
    let q = family.q();
    if q > cap {
        return Err(Error::invalid(
            "qubit count",
            format!("{q} exceeds the backend cap of {cap}"),
        ));
    }
    if noise.q() != q {
        return Err(Error::invalid(
            "noise model",
            format!("describes {} qubits, circuit has {q}", noise.q()),
        ));
    }
    noise.validate()?;
    if horizon > family.n_max() {
        return Err(Error::invalid(
            "horizon",
            format!("{horizon} exceeds n_max {}", family.n_max()),
        ));
    }
    Ok(())
}

/// Evolves the density matrix cycle by cycle and hands the state after each
/// cycle `n = 0..=horizon` to `visit`.
pub fn evolve_density(
    family: &CircuitFamily,
    noise: &NoiseModel,
    horizon: usize,
    mut visit: impl FnMut(usize, &DensityMatrix),
) -> Result<()> {
    check_inputs(family, noise, horizon, EXACT_QUBIT_CAP)?;
    let cycle = compile(family.unitary.gates(), noise)?;
    let mut rho = DensityMatrix::zero_state(family.q());
    visit(0, &rho);
    for n in 1..=horizon {
        rho.run(&cycle);
        visit(n, &rho);
    }
    Ok(())
}

/// Exact polarizations with readout error folded in analytically.
pub fn simulate_exact(
    family: &CircuitFamily,
    noise: &NoiseModel,
    horizon: usize,
) -> Result<PolarizationTrace> {
    let mut rows = Vec::with_capacity(horizon + 1);
    evolve_density(family, noise, horizon, |_, rho| {
        let z = rho.z_expectations();
        rows.push(
            z.iter()
                .zip(&noise.readout)
                .map(|(&zj, r)| r.apply(zj))
                .collect(),
        );
    })?;
    PolarizationTrace::from_cycles(&rows, Shots::Exact, None)
}

/// Exact reported polarizations of the listed members, in the listed order.
pub fn exact_expectations(
    family: &CircuitFamily,
    noise: &NoiseModel,
    members: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let horizon = members.iter().copied().max().unwrap_or(0);
    let trace = simulate_exact(family, noise, horizon)?;
    Ok(members
        .iter()
        .map(|&n| (0..trace.q).map(|j| trace.value(j, n)).collect())
        .collect())
}

/// Samples every listed member from its exact output distribution.
pub fn sample_exact(
    family: &CircuitFamily,
    noise: &NoiseModel,
    members: &[usize],
    shots: u64,
    exec_seed: u64,
) -> Result<Vec<ShotRecord>> {
    if shots == 0 {
        return Err(Error::invalid("shots", "must be at least 1"));
    }
    let horizon = members.iter().copied().max().unwrap_or(0);
    let mut probs = BTreeMap::new();
    evolve_density(family, noise, horizon, |n, rho| {
        if members.contains(&n) {
            probs.insert(n, rho.probabilities());
        }
    })?;
    Ok(members
        .iter()
        .map(|&n| {
            let mut rng = SplitMix64::new(derive_seed(exec_seed, &[n as u64]));
            let counts = sample_distribution(&probs[&n], &noise.readout, shots, &mut rng);
            ShotRecord::from_indices(n, family.q(), counts)
        })
        .collect())
}

/// Samples every listed member with the trajectory backend.
pub fn sample_trajectories(
    family: &CircuitFamily,
    noise: &NoiseModel,
    members: &[usize],
    opts: &ShotOptions,
) -> Result<Vec<ShotRecord>> {
    opts.validate()?;
    let horizon = members.iter().copied().max().unwrap_or(0);
    check_inputs(family, noise, horizon, STATEVECTOR_QUBIT_CAP)?;
    let cycle = compile(family.unitary.gates(), noise)?;
    let q = family.q();
    Ok(map_slice(opts.schedule, members, |&n| {
        let seed = derive_seed(opts.exec_seed, &[n as u64]);
        let counts = run_trajectories(&cycle, n, q, &noise.readout, opts, seed);
        ShotRecord::from_indices(n, q, counts)
    }))
}

/// Trajectory simulation of members `0..=horizon`, returning the counts and
/// the polarization trace estimated from them.
pub fn simulate_shots(
    family: &CircuitFamily,
    noise: &NoiseModel,
    horizon: usize,
    opts: &ShotOptions,
) -> Result<(Vec<ShotRecord>, PolarizationTrace)> {
    let members: Vec<usize> = (0..=horizon).collect();
    let records = sample_trajectories(family, noise, &members, opts)?;
    let rows = records
        .iter()
        .map(ShotRecord::polarizations)
        .collect::<Result<Vec<_>>>()?;
    let trace =
        PolarizationTrace::from_cycles(&rows, Shots::Sampled(opts.shots), Some(opts.exec_seed))?;
    Ok((records, trace))
}

/// Samples a parsed program with the trajectory backend, seeding exactly as
/// [`sample_trajectories`] does for member `n`.
pub fn sample_program(
    program: &Program,
    noise: &NoiseModel,
    n: usize,
    opts: &ShotOptions,
) -> Result<ShotRecord> {
    opts.validate()?;
    if program.q > STATEVECTOR_QUBIT_CAP {
        return Err(Error::invalid(
            "qubit count",
            format!(
                "{} exceeds the backend cap of {STATEVECTOR_QUBIT_CAP}",
                program.q
            ),
        ));
    }
    if noise.q() != program.q {
        return Err(Error::invalid(
            "noise model",
            format!("describes {} qubits, program has {}", noise.q(), program.q),
        ));
    }
    noise.validate()?;
    let ops = compile(&program.gates, noise)?;
    let seed = derive_seed(opts.exec_seed, &[n as u64]);
    let counts = run_trajectories(&ops, 1, program.q, &noise.readout, opts, seed);
    Ok(ShotRecord::from_indices(n, program.q, counts))
}

/// Runs `opts.trajectories` fault realizations of `ops` repeated `repeats`
/// times; trajectory `t` draws its share of the shots.
fn run_trajectories(
    ops: &[Op],
    repeats: usize,
    q: usize,
    readout: &[ReadoutError],
    opts: &ShotOptions,
    seed: u64,
) -> BTreeMap<usize, u64> {
    let t_count = opts.trajectories;
    let base = opts.shots / t_count;
    let extra = opts.shots % t_count;
    let per_trajectory = map_range(opts.schedule, t_count as usize, |t| {
        let mut rng = SplitMix64::new(derive_seed(seed, &[t as u64]));
        let mut traj = Trajectory {
            state: StateVector::zero_state(q),
            rng: &mut rng,
            faults: 0,
        };
        for _ in 0..repeats {
            traj.run(ops);
        }
        let probs = traj.state.probabilities();
        let shots = base + u64::from((t as u64) < extra);
        sample_distribution(&probs, readout, shots, &mut rng)
    });
    let mut merged = BTreeMap::new();
    for counts in per_trajectory {
        for (index, c) in counts {
            *merged.entry(index).or_insert(0) += c;
        }
    }
    merged
}

/// Draws `shots` basis states from `probs`, then flips each bit with the
/// qubit's readout error.
fn sample_distribution(
    probs: &[f64],
    readout: &[ReadoutError],
    shots: u64,
    rng: &mut SplitMix64,
) -> BTreeMap<usize, u64> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let last = probs.len() - 1;
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.next_f64() * acc;
        let mut index = cumulative.partition_point(|&c| c <= u).min(last);
        for (j, r) in readout.iter().enumerate() {
            let p = if (index >> j) & 1 == 0 { r.p01 } else { r.p10 };
            if p > 0.0 && rng.next_f64() < p {
                index ^= 1 << j;
            }
        }
        *counts.entry(index).or_insert(0) += 1;
    }
    counts
}

/// Worst-case standard error of a batched-trajectory polarization estimate
/// whose true value is `expected`.
///
/// Each of the `trajectories` batches has its own conditional mean; the
/// estimator variance is at most `(1 - ⟨Z⟩²) / trajectories`, reached when
/// every batch is deterministic, and falls to the independent-shot value
/// `(1 - ⟨Z⟩²) / shots` when batches agree.
pub fn batched_standard_error(expected: f64, trajectories: u64) -> f64 {
    ((1.0 - expected * expected).max(0.0) / trajectories as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtc::{DtcParams, Gate};
    use num_complex::Complex64;

    fn family(q: usize, g: f64, seed: u64, n_max: usize) -> CircuitFamily {
        CircuitFamily::generate(&DtcParams::new(q, seed).with_g(g).with_n_max(n_max)).unwrap()
    }

    #[test]
    fn ideal_flip_is_exact() {
        let fam = family(4, 1.0, 3, 10);
        let trace = simulate_exact(&fam, &NoiseModel::ideal(4), 10).unwrap();
        for j in 0..4 {
            for n in 0..=10 {
                let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((trace.value(j, n) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn density_stays_physical() {
        let fam = family(4, 0.95, 9, 12);
        let noise = NoiseModel::uniform(4, 0.07, 0.0).with_one_qubit(1, 0.02);
        evolve_density(&fam, &noise, 12, |_, rho| {
            assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
            assert!(rho.hermiticity_error() < 1e-10);
        })
        .unwrap();
    }

    #[test]
    fn per_cnot_decomposition_matches_native_zz_without_noise() {
        let fam = family(3, 0.95, 5, 6);
        let native = simulate_exact(&fam, &NoiseModel::ideal(3), 6).unwrap();
        let decomposed =
            NoiseModel::ideal(3).with_interaction(crate::noise::InteractionNoise::PerCnot);
        let via_cx = simulate_exact(&fam, &decomposed, 6).unwrap();
        for j in 0..3 {
            for n in 0..=6 {
                assert!((native.value(j, n) - via_cx.value(j, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn caps_and_mismatches_are_rejected() {
        let fam = family(13, 0.95, 1, 1);
        assert!(simulate_exact(&fam, &NoiseModel::ideal(13), 1).is_err());
        let fam = family(3, 0.95, 1, 4);
        assert!(simulate_exact(&fam, &NoiseModel::ideal(2), 1).is_err());
        assert!(simulate_exact(&fam, &NoiseModel::ideal(3), 5).is_err());
        let bad = ShotOptions::new(10, 11, 0);
        assert!(simulate_shots(&fam, &NoiseModel::ideal(3), 2, &bad).is_err());
    }

    #[test]
    fn shots_are_deterministic_and_balanced() {
        let fam = family(3, 0.95, 2, 6);
        let noise = NoiseModel::uniform(3, 0.05, 0.01);
        let opts = ShotOptions::new(1003, 10, 77);
        let (a, _) = simulate_shots(&fam, &noise, 6, &opts).unwrap();
        let (b, _) =
            simulate_shots(&fam, &noise, 6, &opts.with_schedule(Schedule::Sequential)).unwrap();
        assert_eq!(a, b);
        for r in &a {
            r.validate(3).unwrap();
            assert_eq!(r.shots, 1003);
        }
    }

    #[test]
    fn program_path_matches_family_path() {
        let fam = family(3, 0.95, 4, 5);
        let noise = NoiseModel::uniform(3, 0.05, 0.02);
        let opts = ShotOptions::new(500, 20, 9);
        let direct = sample_trajectories(&fam, &noise, &[5], &opts).unwrap();
        let text = crate::qasm::member_program(&fam, 5, None);
        let program = crate::qasm::parse_program(&text).unwrap();
        assert_eq!(
            sample_program(&program, &noise, 5, &opts).unwrap(),
            direct[0]
        );
    }

    fn pair_ops(eps: f64) -> Vec<Op> {
        let gates = [
            Gate::Rx {
                qubit: 0,
                angle: 1.1,
            },
            Gate::Rx {
                qubit: 1,
                angle: 0.4,
            },
            Gate::Rzz {
                a: 0,
                b: 1,
                angle: 0.9,
            },
        ];
        let mut ops = compile(&gates[..2], &NoiseModel::ideal(2)).unwrap();
        ops.push(Op::Rzz {
            a: 0,
            b: 1,
            phase: Complex64::from_polar(1.0, -0.45),
        });
        ops.push(Op::Depolarize2 { a: 0, b: 1, eps });
        ops
    }

    #[test]
    fn stochastic_paulis_average_to_the_channel() {
        for eps in [0.1, 0.5, 1.0] {
            let ops = pair_ops(eps);
            let mut rho = DensityMatrix::zero_state(2);
            rho.run(&ops);
            let samples = 100_000;
            let mut avg = [Complex64::new(0.0, 0.0); 16];
            let mut rng = SplitMix64::new(eps.to_bits());
            for _ in 0..samples {
                let mut traj = Trajectory {
                    state: StateVector::zero_state(2),
                    rng: &mut rng,
                    faults: 0,
                };
                traj.run(&ops);
                let a = traj.state.amplitudes();
                for r in 0..4 {
                    for c in 0..4 {
                        avg[r * 4 + c] += a[r] * a[c].conj();
                    }
                }
            }
            for r in 0..4 {
                for c in 0..4 {
                    let mean = avg[r * 4 + c] / samples as f64;
                    assert!(
                        (mean - rho.get(r, c)).norm() < 5e-3,
                        "eps={eps} entry ({r},{c})"
                    );
                }
            }
        }
    }
}
