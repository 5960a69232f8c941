use num_complex::Complex64;

use super::ops::{bit, Op, Register};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense `2^q × 2^q` density matrix, row-major. Qubit `j` is bit `j` of a
/// basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    q: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(q: usize) -> Self {
        let dim = 1usize << q;
        let mut data = vec![ZERO; dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        DensityMatrix { q, dim, data }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|a| self.get(a, a)).sum()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in a..self.dim {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    /// Computational-basis populations.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.get(a, a).re).collect()
    }

    /// ⟨Z_j⟩ for every qubit.
    pub fn z_expectations(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.q];
        for a in 0..self.dim {
            let p = self.get(a, a).re;
            for (j, zj) in z.iter_mut().enumerate() {
                if bit(a, j) == 0 {
                    *zj += p;
                } else {
                    *zj -= p;
                }
            }
        }
        z
    }

    fn rx(&mut self, qubit: usize, c: f64, s: f64) {
        // U = [[c, -is], [-is, c]]; ρ ← U ρ U†.
        let m = 1usize << qubit;
        let u = [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ];
        let dim = self.dim;
        for a in (0..dim).filter(|a| a & m == 0) {
            for b in (0..dim).filter(|b| b & m == 0) {
                let idx = [
                    [a * dim + b, a * dim + (b | m)],
                    [(a | m) * dim + b, (a | m) * dim + (b | m)],
                ];
                let r = [
                    [self.data[idx[0][0]], self.data[idx[0][1]]],
                    [self.data[idx[1][0]], self.data[idx[1][1]]],
                ];
                let mut t = [[ZERO; 2]; 2];
                for x in 0..2 {
                    for y in 0..2 {
                        t[x][y] = u[x][0] * r[0][y] + u[x][1] * r[1][y];
                    }
                }
                for x in 0..2 {
                    for y in 0..2 {
                        self.data[idx[x][y]] = t[x][0] * u[y][0].conj() + t[x][1] * u[y][1].conj();
                    }
                }
            }
        }
    }

    fn diagonal(&mut self, phase_of: impl Fn(usize) -> Complex64) {
        let phases: Vec<Complex64> = (0..self.dim).map(phase_of).collect();
        let dim = self.dim;
        for (a, row) in self.data.chunks_exact_mut(dim).enumerate() {
            let pa = phases[a];
            for (entry, pb) in row.iter_mut().zip(&phases) {
                *entry *= pa * pb.conj();
            }
        }
    }

    fn cx(&mut self, control: usize, target: usize) {
        let (mc, mt) = (1usize << control, 1usize << target);
        let perm = |a: usize| if a & mc != 0 { a ^ mt } else { a };
        let dim = self.dim;
        let old = self.data.clone();
        for a in 0..dim {
            let pa = perm(a);
            for b in 0..dim {
                self.data[a * dim + b] = old[pa * dim + perm(b)];
            }
        }
    }

    /// `(1-ε)ρ + ε · I/4 ⊗ Tr_ab ρ`.
    fn depolarize_pair(&mut self, qa: usize, qb: usize, eps: f64) {
        let (ma, mb) = (1usize << qa, 1usize << qb);
        let offsets = [0, ma, mb, ma | mb];
        let dim = self.dim;
        let keep = 1.0 - eps;
        for a in (0..dim).filter(|a| a & (ma | mb) == 0) {
            for b in (0..dim).filter(|b| b & (ma | mb) == 0) {
                let mixed: Complex64 = offsets
                    .iter()
                    .map(|&s| self.data[(a | s) * dim + (b | s)])
                    .sum::<Complex64>()
                    * (eps / 4.0);
                for &s in &offsets {
                    for &t in &offsets {
                        let i = (a | s) * dim + (b | t);
                        self.data[i] *= keep;
                        if s == t {
                            self.data[i] += mixed;
                        }
                    }
                }
            }
        }
    }

    /// `(1-p)ρ + p · I/2 ⊗ Tr_j ρ`.
    fn depolarize_qubit(&mut self, qubit: usize, p: f64) {
        let m = 1usize << qubit;
        let dim = self.dim;
        for a in (0..dim).filter(|a| a & m == 0) {
            for b in (0..dim).filter(|b| b & m == 0) {
                let i00 = a * dim + b;
                let i01 = a * dim + (b | m);
                let i10 = (a | m) * dim + b;
                let i11 = (a | m) * dim + (b | m);
                let mixed = (self.data[i00] + self.data[i11]) * (p / 2.0);
                self.data[i00] = self.data[i00] * (1.0 - p) + mixed;
                self.data[i11] = self.data[i11] * (1.0 - p) + mixed;
                self.data[i01] *= 1.0 - p;
                self.data[i10] *= 1.0 - p;
            }
        }
    }
}

impl Register for DensityMatrix {
    fn apply(&mut self, op: &Op) {
        match *op {
            Op::Rx { qubit, c, s } => self.rx(qubit, c, s),
            Op::Rz { qubit, phase } => self.diagonal(|a| {
                if bit(a, qubit) == 0 {
                    phase
                } else {
                    phase.conj()
                }
            }),
            Op::Rzz { a, b, phase } => self.diagonal(|i| {
                if bit(i, a) == bit(i, b) {
                    phase
                } else {
                    phase.conj()
                }
            }),
            Op::Cx { control, target } => self.cx(control, target),
            Op::Depolarize2 { a, b, eps } => self.depolarize_pair(a, b, eps),
            Op::Depolarize1 { qubit, p } => self.depolarize_qubit(qubit, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rx(qubit: usize, angle: f64) -> Op {
        Op::Rx {
            qubit,
            c: (angle / 2.0).cos(),
            s: (angle / 2.0).sin(),
        }
    }

    #[test]
    fn pi_pulse_flips() {
        let mut rho = DensityMatrix::zero_state(2);
        rho.apply(&rx(1, PI));
        let z = rho.z_expectations();
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_depolarization_of_pair_is_maximally_mixed() {
        let mut rho = DensityMatrix::zero_state(2);
        rho.apply(&rx(0, 0.7));
        rho.apply(&Op::Depolarize2 {
            a: 0,
            b: 1,
            eps: 1.0,
        });
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a == b { 0.25 } else { 0.0 };
                assert!((rho.get(a, b) - Complex64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn depolarizing_shrinks_z_by_one_minus_eps() {
        let mut rho = DensityMatrix::zero_state(3);
        rho.apply(&Op::Depolarize2 {
            a: 1,
            b: 2,
            eps: 0.2,
        });
        let z = rho.z_expectations();
        assert!((z[0] - 1.0).abs() < 1e-14);
        assert!((z[1] - 0.8).abs() < 1e-14 && (z[2] - 0.8).abs() < 1e-14);
        rho.apply(&Op::Depolarize1 { qubit: 0, p: 0.5 });
        assert!((rho.z_expectations()[0] - 0.5).abs() < 1e-14);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cx_and_hermiticity() {
        let mut rho = DensityMatrix::zero_state(2);
        rho.apply(&rx(0, PI / 2.0));
        rho.apply(&Op::Cx {
            control: 0,
            target: 1,
        });
        // Bell-like state: populations on |00⟩ and |11⟩ only.
        let p = rho.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-14);
    }
}
