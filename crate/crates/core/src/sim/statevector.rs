use num_complex::Complex64;

use super::ops::{bit, Op, Register};
use crate::rng::SplitMix64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    q: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(q: usize) -> Self {
        let mut amps = vec![ZERO; 1usize << q];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { q, amps }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn pairs(&mut self, qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let m = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(2 * m) {
            let (lo, hi) = block.split_at_mut(m);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }

    /// Pauli by code: 1 = X, 2 = Y, 3 = Z (0 is identity).
    pub(crate) fn pauli(&mut self, qubit: usize, code: u64) {
        match code {
            1 => self.pairs(qubit, std::mem::swap),
            2 => self.pairs(qubit, |a0, a1| {
                let (x0, x1) = (*a0, *a1);
                *a0 = -I * x1;
                *a1 = I * x0;
            }),
            3 => self.pairs(qubit, |_, a1| *a1 = -*a1),
            _ => {}
        }
    }
}

impl Register for StateVector {
    fn apply(&mut self, op: &Op) {
        match *op {
            Op::Rx { qubit, c, s } => self.pairs(qubit, |a0, a1| {
                let (x0, x1) = (*a0, *a1);
                *a0 = x0 * c + x1 * Complex64::new(0.0, -s);
                *a1 = x0 * Complex64::new(0.0, -s) + x1 * c;
            }),
            Op::Rz { qubit, phase } => self.pairs(qubit, |a0, a1| {
                *a0 *= phase;
                *a1 *= phase.conj();
            }),
            Op::Rzz { a, b, phase } => {
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    *amp *= if bit(i, a) == bit(i, b) {
                        phase
                    } else {
                        phase.conj()
                    };
                }
            }
            Op::Cx { control, target } => {
                let (mc, mt) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            // Channels are identities on a bare state vector; trajectories
            // realize them stochastically.
            Op::Depolarize2 { .. } | Op::Depolarize1 { .. } => {}
        }
    }
}

/// A state vector whose noise channels are sampled as random Pauli faults.
pub(crate) struct Trajectory<'r> {
    pub state: StateVector,
    pub rng: &'r mut SplitMix64,
    pub faults: u64,
}

impl Register for Trajectory<'_> {
    fn apply(&mut self, op: &Op) {
        match *op {
            Op::Depolarize2 { a, b, eps } => {
                // Fault with probability 15ε/16, uniform over the 15
                // non-identity two-qubit Paulis.
                if self.rng.next_f64() < 15.0 * eps / 16.0 {
                    let k = 1 + self.rng.below(15);
                    self.state.pauli(a, k & 3);
                    self.state.pauli(b, k >> 2);
                    self.faults += 1;
                }
            }
            Op::Depolarize1 { qubit, p } => {
                if self.rng.next_f64() < 0.75 * p {
                    let k = 1 + self.rng.below(3);
                    self.state.pauli(qubit, k);
                    self.faults += 1;
                }
            }
            _ => self.state.apply(op),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::density::DensityMatrix;

    fn outer(state: &StateVector) -> Vec<Complex64> {
        let a = state.amplitudes();
        a.iter()
            .flat_map(|x| a.iter().map(move |y| x * y.conj()))
            .collect()
    }

    #[test]
    fn unitaries_match_density_backend() {
        let ops = [
            Op::Rx {
                qubit: 0,
                c: 0.3f64.cos(),
                s: 0.3f64.sin(),
            },
            Op::Rx {
                qubit: 2,
                c: 1.1f64.cos(),
                s: 1.1f64.sin(),
            },
            Op::Rzz {
                a: 0,
                b: 1,
                phase: Complex64::from_polar(1.0, -0.4),
            },
            Op::Cx {
                control: 0,
                target: 2,
            },
            Op::Rz {
                qubit: 1,
                phase: Complex64::from_polar(1.0, 0.9),
            },
            Op::Rx {
                qubit: 1,
                c: 0.7f64.cos(),
                s: 0.7f64.sin(),
            },
        ];
        let mut psi = StateVector::zero_state(3);
        let mut rho = DensityMatrix::zero_state(3);
        psi.run(&ops);
        rho.run(&ops);
        let pure = outer(&psi);
        for a in 0..8 {
            for b in 0..8 {
                assert!((pure[a * 8 + b] - rho.get(a, b)).norm() < 1e-12);
            }
        }
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn paulis_square_to_identity() {
        let mut psi = StateVector::zero_state(2);
        psi.apply(&Op::Rx {
            qubit: 0,
            c: 0.2f64.cos(),
            s: 0.2f64.sin(),
        });
        let before = psi.clone();
        for code in 1..4 {
            psi.pauli(0, code);
            psi.pauli(0, code);
        }
        for (x, y) in psi.amplitudes().iter().zip(before.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }
}
