//! Seeded discrete-time-crystal circuit families.
//!
//! One cycle is an X-rotation by `πg` on every qubit, a ZZ rotation on every
//! nearest-neighbour pair of the chain, then a Z rotation on every qubit.
//! Member `n` of a family applies `n` cycles to `|0…0⟩` and measures all
//! qubits in the Z basis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{prng_next, uniform_angle, AngleInterval};

pub const DEFAULT_G: f64 = 0.95;
pub const DEFAULT_N_MAX: usize = 80;

pub fn default_rzz_interval() -> AngleInterval {
    AngleInterval {
        lo: PI / 8.0,
        hi: 3.0 * PI / 8.0,
    }
}

pub fn default_rz_interval() -> AngleInterval {
    AngleInterval { lo: -PI, hi: PI }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtcParams {
    pub q: usize,
    pub g: f64,
    pub seed: u64,
    pub n_max: usize,
    pub rzz_interval: AngleInterval,
    pub rz_interval: AngleInterval,
}

impl DtcParams {
    /// Default drive `g = 0.95`, `n_max = 80` and the default angle intervals.
    pub fn new(q: usize, seed: u64) -> Self {
        DtcParams {
            q,
            g: DEFAULT_G,
            seed,
            n_max: DEFAULT_N_MAX,
            rzz_interval: default_rzz_interval(),
            rz_interval: default_rz_interval(),
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::invalid("DTC parameters", "q must be at least 1"));
        }
        if !(self.g > 0.0 && self.g <= 1.0) {
            return Err(Error::invalid(
                "DTC parameters",
                format!("g = {} outside (0, 1]", self.g),
            ));
        }
        self.rzz_interval.validate()?;
        self.rz_interval.validate()
    }
}

/// Sampled angles for one realization of the cycle unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSet {
    /// ZZ-rotation angle on chain edge `(j, j+1)`, ascending `j`.
    pub rzz_angles: Vec<f64>,
    /// Z-rotation angle on qubit `j`, ascending `j`.
    pub rz_angles: Vec<f64>,
}

/// Draws the edge angles then the qubit angles, one splitmix64 step per
/// angle, starting from `state = seed`.
pub fn sample_phases(params: &DtcParams) -> Result<PhaseSet> {
    params.validate()?;
    let mut state = params.seed;
    let mut draw = |interval: AngleInterval| {
        let (next, out) = prng_next(state);
        state = next;
        uniform_angle(out, interval)
    };
    let rzz_angles = (0..params.q - 1)
        .map(|_| draw(params.rzz_interval))
        .collect::<Result<Vec<_>>>()?;
    let rz_angles = (0..params.q)
        .map(|_| draw(params.rz_interval))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseSet {
        rzz_angles,
        rz_angles,
    })
}

/// Gates on logical chain positions.
///
/// Conventions: `Rx(λ) = exp(-iλX/2)`, `Rz(λ) = exp(-iλZ/2)`,
/// `Rzz(λ) = exp(-iλ Z⊗Z/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Rzz { a: usize, b: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
}

impl Gate {
    pub fn angle(&self) -> f64 {
        match *self {
            Gate::Rx { angle, .. } | Gate::Rzz { angle, .. } | Gate::Rz { angle, .. } => angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleUnitary {
    q: usize,
    x_layer: Vec<Gate>,
    zz_layer: Vec<Gate>,
    z_layer: Vec<Gate>,
}

impl CycleUnitary {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn x_layer(&self) -> &[Gate] {
        &self.x_layer
    }

    /// Empty for a single qubit.
    pub fn zz_layer(&self) -> &[Gate] {
        &self.zz_layer
    }

    pub fn z_layer(&self) -> &[Gate] {
        &self.z_layer
    }

    /// Gates of one cycle in application order.
    pub fn gates(&self) -> impl Iterator<Item = &Gate> + Clone {
        self.x_layer
            .iter()
            .chain(self.zz_layer.iter())
            .chain(self.z_layer.iter())
    }

    pub fn gate_count(&self) -> usize {
        self.x_layer.len() + self.zz_layer.len() + self.z_layer.len()
    }
}

pub fn build_cycle_unitary(params: &DtcParams, phases: &PhaseSet) -> Result<CycleUnitary> {
    params.validate()?;
    let q = params.q;
    if phases.rzz_angles.len() != q - 1 || phases.rz_angles.len() != q {
        return Err(Error::invalid(
            "phase set",
            format!(
                "expected {} ZZ and {} Z angles for q = {q}, got {} and {}",
                q - 1,
                q,
                phases.rzz_angles.len(),
                phases.rz_angles.len()
            ),
        ));
    }
    if phases
        .rzz_angles
        .iter()
        .chain(&phases.rz_angles)
        .any(|a| !a.is_finite())
    {
        return Err(Error::invalid("phase set", "angles must be finite"));
    }
    let drive = PI * params.g;
    Ok(CycleUnitary {
        q,
        x_layer: (0..q)
            .map(|qubit| Gate::Rx {
                qubit,
                angle: drive,
            })
            .collect(),
        zz_layer: phases
            .rzz_angles
            .iter()
            .enumerate()
            .map(|(j, &angle)| Gate::Rzz {
                a: j,
                b: j + 1,
                angle,
            })
            .collect(),
        z_layer: phases
            .rz_angles
            .iter()
            .enumerate()
            .map(|(qubit, &angle)| Gate::Rz { qubit, angle })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitFamily {
    pub params: DtcParams,
    pub phases: PhaseSet,
    pub unitary: CycleUnitary,
}

impl CircuitFamily {
    /// Samples phases and builds the family in one go.
    pub fn generate(params: &DtcParams) -> Result<Self> {
        let phases = sample_phases(params)?;
        let unitary = build_cycle_unitary(params, &phases)?;
        Ok(CircuitFamily {
            params: params.clone(),
            phases,
            unitary,
        })
    }

    pub fn q(&self) -> usize {
        self.params.q
    }

    pub fn n_max(&self) -> usize {
        self.params.n_max
    }

    /// Number of members, `n_max + 1`.
    pub fn len(&self) -> usize {
        self.params.n_max + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Gates of member `n`: the cycle repeated `n` times.
    pub fn member_gates(&self, n: usize) -> impl Iterator<Item = &Gate> + Clone {
        let cycle = self.unitary.gates();
        std::iter::repeat_n(cycle, n).flatten()
    }

    /// Gate count of member `n` including the final measurements.
    pub fn member_op_count(&self, n: usize) -> usize {
        n * self.unitary.gate_count() + self.q()
    }
}

pub fn build_circuit_family(
    params: &DtcParams,
    phases: &PhaseSet,
    unitary: CycleUnitary,
    n_max: usize,
) -> Result<CircuitFamily> {
    if unitary.q() != params.q {
        return Err(Error::invalid(
            "circuit family",
            "unitary width differs from parameters",
        ));
    }
    let mut params = params.clone();
    params.n_max = n_max;
    Ok(CircuitFamily {
        params,
        phases: phases.clone(),
        unitary,
    })
}
