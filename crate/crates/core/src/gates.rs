//! Gate programs: the unitary segments `V_ℓ` of an interleaved circuit.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::hamiltonian::{apply_local_matrix, pauli_exp};
use crate::linalg::{self, c, cis, CMat};
use crate::pauli::PauliString;
use crate::state::StateVector;
use crate::C64;

/// `R(θ, φ, γ) = [[e^{i(γ+φ)} cos θ, e^{iφ} sin θ], [e^{iγ} sin θ, −cos θ]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U2Rotation {
    pub theta: f64,
    pub phi: f64,
    pub gamma_phase: f64,
}

impl U2Rotation {
    pub fn new(theta: f64, phi: f64, gamma_phase: f64) -> Self {
        Self {
            theta,
            phi,
            gamma_phase,
        }
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let (s, co) = self.theta.sin_cos();
        [
            [cis(self.gamma_phase + self.phi) * co, cis(self.phi) * s],
            [cis(self.gamma_phase) * s, c(-co, 0.0)],
        ]
    }
}

#[derive(Debug, Clone)]
pub enum Gate {
    /// Arbitrary single-qubit matrix.
    Single { qubit: usize, m: [[C64; 2]; 2] },
    /// `exp(i·angle·P)`.
    PauliExp { word: PauliString, angle: f64 },
    /// Dense unitary on an ordered qubit subset.
    Unitary { support: Vec<usize>, matrix: Arc<CMat> },
    /// `I + (e^{iθ} − 1)|v⟩⟨v|` for a unit vector over the whole register.
    ProjectorPhase { vector: Arc<Vec<C64>>, angle: f64 },
}

impl Gate {
    pub fn u2(qubit: usize, r: U2Rotation) -> Self {
        Gate::Single {
            qubit,
            m: r.matrix(),
        }
    }

    pub fn hadamard(qubit: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Gate::Single {
            qubit,
            m: [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        }
    }

    pub fn x(qubit: usize) -> Self {
        Gate::Single {
            qubit,
            m: [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        }
    }

    /// `exp(iθ|0⟩⟨0|)` on one qubit.
    pub fn zero_phase(qubit: usize, angle: f64) -> Self {
        Gate::Single {
            qubit,
            m: [[cis(angle), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Single { qubit, m } => Gate::Single {
                qubit: *qubit,
                m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
            },
            Gate::PauliExp { word, angle } => Gate::PauliExp {
                word: word.clone(),
                angle: -angle,
            },
            Gate::Unitary { support, matrix } => Gate::Unitary {
                support: support.clone(),
                matrix: Arc::new(matrix.adjoint()),
            },
            Gate::ProjectorPhase { vector, angle } => Gate::ProjectorPhase {
                vector: vector.clone(),
                angle: -angle,
            },
        }
    }

    pub fn apply(&self, amps: &mut [C64], n: usize) {
        match self {
            Gate::Single { qubit, m } => {
                let bit = 1usize << (n - 1 - qubit);
                for x in 0..amps.len() {
                    if x & bit != 0 {
                        continue;
                    }
                    let a0 = amps[x];
                    let a1 = amps[x | bit];
                    amps[x] = m[0][0] * a0 + m[0][1] * a1;
                    amps[x | bit] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
            Gate::PauliExp { word, angle } => pauli_exp(amps, word, *angle),
            Gate::Unitary { support, matrix } => apply_local_matrix(amps, n, support, matrix),
            Gate::ProjectorPhase { vector, angle } => {
                let overlap: C64 = vector.iter().zip(amps.iter()).map(|(v, a)| v.conj() * a).sum();
                let k = overlap * (cis(*angle) - 1.0);
                for (a, v) in amps.iter_mut().zip(vector.iter()) {
                    *a += k * v;
                }
            }
        }
    }

    /// Whether the gate fits an `n`-qubit register.
    pub fn fits(&self, n: usize) -> bool {
        match self {
            Gate::Single { qubit, .. } => *qubit < n,
            Gate::PauliExp { word, .. } => word.len() == n,
            Gate::Unitary { support, matrix } => {
                support.iter().all(|&q| q < n) && matrix.nrows() == 1 << support.len()
            }
            Gate::ProjectorPhase { vector, .. } => vector.len() == 1 << n,
        }
    }
}

/// Gates in application order.
#[derive(Debug, Clone, Default)]
pub struct GateProgram {
    pub gates: Vec<Gate>,
}

impl GateProgram {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self { gates }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: &GateProgram) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn inverse(&self) -> GateProgram {
        GateProgram {
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn apply(&self, state: &mut StateVector) {
        let n = state.num_qubits();
        for g in &self.gates {
            g.apply(state.amplitudes_mut(), n);
        }
    }

    pub fn fits(&self, n: usize) -> bool {
        self.gates.iter().all(|g| g.fits(n))
    }

    pub fn to_dense(&self, n: usize) -> CMat {
        let dim = 1usize << n;
        let mut out = CMat::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(n, col);
            self.apply(&mut s);
            out.set_column(col, &linalg::CVec::from_column_slice(s.amplitudes()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_rotation_keeps_zero() {
        let mut s = StateVector::zero(1);
        Gate::u2(0, U2Rotation::new(0.0, 0.0, 0.0)).apply(s.amplitudes_mut(), 1);
        assert!((s.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quarter_turn_flips() {
        let mut s = StateVector::zero(1);
        Gate::u2(0, U2Rotation::new(FRAC_PI_2, 0.0, 0.0)).apply(s.amplitudes_mut(), 1);
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rotation_is_unitary() {
        for k in 0..20 {
            let r = U2Rotation::new(0.37 * k as f64, 1.1 - 0.21 * k as f64, 0.05 * k as f64);
            let m = r.matrix();
            let mut u = CMat::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    u[(i, j)] = m[i][j];
                }
            }
            assert!(linalg::unitarity_defect(&u) < 1e-12);
        }
    }

    #[test]
    fn program_inverse_undoes() {
        let v: Vec<C64> = vec![c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.0), c(-0.5, 0.0)];
        let p = GateProgram::new(vec![
            Gate::hadamard(0),
            Gate::u2(1, U2Rotation::new(0.3, 0.2, -0.9)),
            Gate::PauliExp {
                word: "XY".parse().unwrap(),
                angle: 0.4,
            },
            Gate::ProjectorPhase {
                vector: Arc::new(v),
                angle: 1.3,
            },
            Gate::zero_phase(1, 0.7),
        ]);
        let mut full = p.clone();
        full.extend(&p.inverse());
        let d = full.to_dense(2);
        assert!(linalg::max_abs_diff(&d, &linalg::identity(4)) < 1e-13);
        assert!(linalg::unitarity_defect(&p.to_dense(2)) < 1e-12);
    }
}
