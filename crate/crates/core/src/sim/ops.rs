//! Noisy circuits lowered to a flat list of register operations.

use num_complex::Complex64;

use crate::dtc::Gate;
use crate::error::Result;
use crate::noise::{InteractionNoise, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
    /// `exp(-iλX/2)` stored as `cos(λ/2)`, `sin(λ/2)`.
    Rx {
        qubit: usize,
        c: f64,
        s: f64,
    },
    /// `exp(-iλZ/2)`; `phase = exp(-iλ/2)` is applied to |0⟩, its conjugate to |1⟩.
    Rz {
        qubit: usize,
        phase: Complex64,
    },
    /// `exp(-iλ Z⊗Z/2)`; `phase` on even parity, conjugate on odd parity.
    Rzz {
        a: usize,
        b: usize,
        phase: Complex64,
    },
    Cx {
        control: usize,
        target: usize,
    },
    Depolarize2 {
        a: usize,
        b: usize,
        eps: f64,
    },
    Depolarize1 {
        qubit: usize,
        p: f64,
    },
}

fn half_phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, -angle / 2.0)
}

/// Lowers gates onto ops, inserting noise channels: two-qubit channels after
/// each ZZ interaction (or after each CX of its decomposition) and one-qubit
/// channels after each Z rotation.
pub(crate) fn compile<'a>(
    gates: impl IntoIterator<Item = &'a Gate>,
    noise: &NoiseModel,
) -> Result<Vec<Op>> {
    let mut ops = Vec::new();
    for gate in gates {
        match *gate {
            Gate::Rx { qubit, angle } => ops.push(Op::Rx {
                qubit,
                c: (angle / 2.0).cos(),
                s: (angle / 2.0).sin(),
            }),
            Gate::Rz { qubit, angle } => {
                ops.push(Op::Rz {
                    qubit,
                    phase: half_phase(angle),
                });
                let p = noise.one_qubit[qubit];
                if p > 0.0 {
                    ops.push(Op::Depolarize1 { qubit, p });
                }
            }
            Gate::Rzz { a, b, angle } => {
                let eps = noise.edge(a, b)?;
                let channel = Op::Depolarize2 { a, b, eps };
                match noise.interaction {
                    InteractionNoise::Aggregate => {
                        ops.push(Op::Rzz {
                            a,
                            b,
                            phase: half_phase(angle),
                        });
                        if eps > 0.0 {
                            ops.push(channel);
                        }
                    }
                    InteractionNoise::PerCnot => {
                        let cx = Op::Cx {
                            control: a,
                            target: b,
                        };
                        ops.push(cx);
                        if eps > 0.0 {
                            ops.push(channel);
                        }
                        ops.push(Op::Rz {
                            qubit: b,
                            phase: half_phase(angle),
                        });
                        ops.push(cx);
                        if eps > 0.0 {
                            ops.push(channel);
                        }
                    }
                }
            }
        }
    }
    Ok(ops)
}

/// A quantum register the compiled ops can act on.
pub(crate) trait Register {
    fn apply(&mut self, op: &Op);

    fn run(&mut self, ops: &[Op]) {
        for op in ops {
            self.apply(op);
        }
    }
}

#[inline]
pub(crate) fn bit(index: usize, qubit: usize) -> usize {
    (index >> qubit) & 1
}
