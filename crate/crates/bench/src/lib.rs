//! Deterministic fixtures shared by the benchmarks.

use std::sync::Arc;

use qsvt_core::groundstate::tfim;
use qsvt_core::interleaved::{InterleavedCircuit, Measurement};
use qsvt_core::{funcapprox, gqsp, Gate, GateProgram, HamiltonianSum, Observable, StateVector};

/// Normalized transverse-field Ising chain on `n` sites.
pub fn chain(n: usize) -> HamiltonianSum {
    tfim(n, 0.5, 1.0).expect("valid chain")
}

/// `|+⟩^{⊗n}` with a phase kick on qubit 0 so no amplitude pattern is trivial.
pub fn product_state(n: usize) -> StateVector {
    let mut s = StateVector::zero(n);
    let mut gates: Vec<Gate> = (0..n).map(Gate::hadamard).collect();
    gates.push(Gate::PauliExp {
        word: format!("Y{}", "I".repeat(n - 1)).parse().expect("word"),
        angle: 0.3,
    });
    GateProgram::new(gates).apply(&mut s);
    s
}

/// GQSP shifted-sign circuit on the `n`-site chain with its start state and
/// a `Z` readout on the first system qubit.
pub fn shifted_sign_pipeline(n: usize, eps: f64) -> (InterleavedCircuit, StateVector, Measurement) {
    let h = chain(n);
    let rep = funcapprox::shifted_sign(-0.2, 0.3, eps).expect("valid parameters");
    let angles = gqsp::synthesize_angles(&rep.polynomial).expect("admissible polynomial");
    let circ = gqsp::build_circuit(&angles, &h).expect("circuit");
    let start = StateVector::zero(1).tensor(&product_state(n));
    let obs = Observable::pauli(&format!("Z{}", "I".repeat(n - 1))).expect("word");
    (circ, start, Measurement::flagged(vec![false], obs, false))
}

/// Two chain evolutions of opposite sign around a layer of Hadamards.
pub fn echo_circuit(n: usize) -> InterleavedCircuit {
    let h = Arc::new(chain(n));
    let mut c = InterleavedCircuit::new(n);
    c.push_evolution(h.clone(), 1).expect("sizes match");
    c.push_gates(&GateProgram::new((0..n).map(Gate::hadamard).collect()));
    c.push_evolution(h, -1).expect("sizes match");
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        assert!((product_state(5).norm() - 1.0).abs() < 1e-12);
        let (c, s, m) = shifted_sign_pipeline(3, 1e-2);
        assert_eq!(c.num_qubits(), s.num_qubits());
        assert_eq!(m.num_qubits(), c.num_qubits());
        assert_eq!(echo_circuit(4).segment_count(), 2);
    }
}
