//! Ground-state property estimation: a shifted-sign filter applied by GQSP,
//! fixed-point amplitude amplification of the filtered branch, and an
//! extrapolated readout of `⟨v₀|O|v₀⟩`.
//!
//! Register: qubit 0 is the GQSP ancilla, the system follows.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimation::{fixed_point_amplify, EstimationMode, FixedPointSchedule};
use crate::funcapprox::{self, ApproximationReport};
use crate::gates::GateProgram;
use crate::gqsp::{self, GqspAngles};
use crate::hamiltonian::HamiltonianSum;
use crate::interleaved::{self, ExtrapolationConfig, ExtrapolationReport, InterleavedCircuit, Measurement};
use crate::state::{Observable, SpectralDecomposition, StateVector};

/// GQSP ancilla plus the amplification workspace.
pub const INCOHERENT_ANCILLAS: usize = 2;
/// One more for the Hadamard test.
pub const COHERENT_ANCILLAS: usize = 3;

/// Slack on spectral preconditions.
const SPECTRUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GroundStateTask {
    pub h: HamiltonianSum,
    pub mu: f64,
    pub delta: f64,
    /// Prepares the guess `|φ₀⟩` from `|0…0⟩`.
    pub guess_prep: GateProgram,
    /// Lower bound on `|⟨φ₀|v₀⟩|`.
    pub gamma: f64,
    pub observable: Observable,
}

/// Dense facts about a task used for validation and reference values.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateFacts {
    pub ground_energy: f64,
    pub first_excited: f64,
    pub guess_overlap: f64,
    pub reference: f64,
}

impl GroundStateTask {
    pub fn num_qubits(&self) -> usize {
        self.h.num_qubits()
    }

    pub fn guess_state(&self) -> StateVector {
        let mut s = StateVector::zero(self.num_qubits());
        self.guess_prep.apply(&mut s);
        s
    }

    /// Check `‖H‖ ≤ 1`, `ξ₀ ≤ μ − Δ/2 < μ + Δ/2 ≤ ξ₁` and `|⟨φ₀|v₀⟩| ≥ γ`.
    pub fn validate(&self) -> Result<GroundStateFacts> {
        let n = self.num_qubits();
        if n == 0 || self.h.is_empty() {
            return Err(invalid("H", "empty Hamiltonian"));
        }
        if self.observable.num_qubits() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.observable.num_qubits(),
            });
        }
        if !self.guess_prep.fits(n) {
            return Err(invalid("guess_prep", "gate does not fit the register"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(invalid("gamma", "must lie in (0,1]"));
        }
        if !(self.delta > 0.0) {
            return Err(invalid("delta", "must be positive"));
        }
        let spec = SpectralDecomposition::of_hamiltonian(&self.h)?;
        let vals = &spec.eigenvalues;
        let norm = vals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if norm > 1.0 + SPECTRUM_TOL {
            return Err(invalid("H", format!("‖H‖ = {norm} exceeds 1")));
        }
        let xi0 = vals[0];
        let xi1 = vals.get(1).copied().unwrap_or(f64::INFINITY);
        if xi0 > self.mu - self.delta / 2.0 + SPECTRUM_TOL || xi1 < self.mu + self.delta / 2.0 - SPECTRUM_TOL {
            return Err(invalid(
                "mu",
                format!(
                    "window [{}, {}] does not separate ξ0 = {xi0} from ξ1 = {xi1}",
                    self.mu - self.delta / 2.0,
                    self.mu + self.delta / 2.0
                ),
            ));
        }
        let ground = spec.eigenvector(0);
        let overlap = ground.inner(&self.guess_state()).norm();
        if overlap < self.gamma - SPECTRUM_TOL {
            return Err(invalid("gamma", format!("guess overlap {overlap} is below γ = {}", self.gamma)));
        }
        Ok(GroundStateFacts {
            ground_energy: xi0,
            first_excited: xi1,
            guess_overlap: overlap,
            reference: ground.expectation(&self.observable)?,
        })
    }

    pub fn ground_state(&self) -> Result<StateVector> {
        Ok(SpectralDecomposition::of_hamiltonian(&self.h)?.eigenvector(0))
    }
}

/// Filter window: the task's `Δ`, capped below 1 as the shifted sign requires.
/// A narrower window keeps both eigenvalues outside it.
pub fn filter_delta(delta: f64) -> f64 {
    delta.min(0.99)
}

/// Filter error `ε_f = γε/12`.
pub fn filter_eps(gamma: f64, eps: f64) -> f64 {
    gamma * eps / 12.0
}

#[derive(Debug, Clone)]
pub struct FilterCircuit {
    pub circuit: InterleavedCircuit,
    /// `|0⟩|φ₀⟩`.
    pub start: StateVector,
    /// GQSP ancilla reading 0.
    pub flag: Vec<bool>,
    pub filter: ApproximationReport,
    pub angles: GqspAngles,
    pub schedule: FixedPointSchedule,
    pub eps_filter: f64,
}

/// Shifted sign with `ε_f = γε/12`, synthesized with GQSP, then fixed-point
/// amplification of the flagged branch with amplitude bound `γ(1 − ε_f)`.
pub fn build_filter_circuit(task: &GroundStateTask, eps: f64) -> Result<FilterCircuit> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", "must lie in (0,1)"));
    }
    let eps_filter = filter_eps(task.gamma, eps);
    let filter = funcapprox::shifted_sign(task.mu, filter_delta(task.delta), eps_filter)?;
    let angles = gqsp::synthesize_angles(&filter.polynomial)?;
    let w = gqsp::build_circuit(&angles, &task.h)?;
    let start = StateVector::zero(1).tensor(&task.guess_state());
    let flag = vec![false];
    let schedule = FixedPointSchedule::for_amplitude(task.gamma * (1.0 - eps_filter), eps)?;
    let circuit = fixed_point_amplify(&w, &start, &flag, &schedule)?;
    Ok(FilterCircuit {
        circuit,
        start,
        flag,
        filter,
        angles,
        schedule,
        eps_filter,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport {
    pub estimate: f64,
    pub facts: GroundStateFacts,
    pub filter_degree: usize,
    pub eps_filter: f64,
    pub aa_length: usize,
    /// Probability of the flagged branch after amplification.
    pub success_probability: f64,
    /// `|⟨v₀|ψ⟩|` for the normalized flagged branch.
    pub post_filter_overlap: f64,
    pub ancillas: usize,
    pub simulated_qubits: usize,
    pub extrapolation: ExtrapolationReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateConfig {
    pub eps: f64,
    pub k: usize,
    pub mode: EstimationMode,
    pub m: Option<usize>,
    pub inv_s0: Option<u64>,
}

impl GroundStateConfig {
    pub fn new(eps: f64, k: usize, mode: EstimationMode) -> Self {
        Self {
            eps,
            k,
            mode,
            m: None,
            inv_s0: None,
        }
    }
}

pub fn ancillas_for(mode: &EstimationMode) -> usize {
    match mode {
        EstimationMode::Coherent { .. } => COHERENT_ANCILLAS,
        _ => INCOHERENT_ANCILLAS,
    }
}

/// Normalized flagged branch of `state` on the system register.
fn flagged_branch(state: &StateVector) -> Option<StateVector> {
    let half = state.dim() / 2;
    let mut s = StateVector::from_raw(state.amplitudes()[..half].to_vec());
    (s.normalize() > 0.0).then_some(s)
}

/// Estimate `⟨v₀|O|v₀⟩` to additive `ε‖O‖`.
pub fn estimate_property(task: &GroundStateTask, cfg: &GroundStateConfig) -> Result<(f64, GroundStateReport)> {
    let facts = task.validate()?;
    let fc = build_filter_circuit(task, cfg.eps)?;
    let exact = fc.circuit.apply_exact(&fc.start)?;
    let branch = flagged_branch(&exact).ok_or_else(|| Error::Estimation("flagged branch is empty".into()))?;
    let success_probability = exact.amplitudes()[..exact.dim() / 2].iter().map(|z| z.norm_sqr()).sum();
    let post_filter_overlap = task.ground_state()?.inner(&branch).norm();
    if post_filter_overlap < task.gamma / 2.0 {
        return Err(Error::Estimation(format!(
            "post-filter overlap {post_filter_overlap:.4} below γ/2 = {}",
            task.gamma / 2.0
        )));
    }
    let meas = Measurement::flagged(fc.flag.clone(), task.observable.clone(), true);
    let ancillas = ancillas_for(&cfg.mode);
    let mut ecfg = ExtrapolationConfig::new(cfg.k, cfg.eps, cfg.mode.clone());
    ecfg.m = cfg.m;
    ecfg.inv_s0 = cfg.inv_s0;
    ecfg.ancillas = ancillas;
    let (estimate, extrapolation) = interleaved::extrapolated_estimate(&fc.circuit, &fc.start, &meas, &ecfg)?;
    let simulated_qubits = task.num_qubits() + 1 + usize::from(ancillas == COHERENT_ANCILLAS);
    Ok((
        estimate,
        GroundStateReport {
            estimate,
            facts,
            filter_degree: fc.angles.d,
            eps_filter: fc.eps_filter,
            aa_length: fc.schedule.length,
            success_probability,
            post_filter_overlap,
            ancillas,
            simulated_qubits,
            extrapolation,
        },
    ))
}

/// Transverse-field Ising chain `−J Σ Z_i Z_{i+1} − g Σ X_i` (open
/// boundary), scaled by `1/(J(n−1) + gn)` so that `‖H‖ ≤ 1`.
pub fn tfim(n: usize, j: f64, g: f64) -> Result<HamiltonianSum> {
    use crate::hamiltonian::HermitianTerm;
    use crate::pauli::{Pauli, PauliString};
    if n < 2 {
        return Err(invalid("n", "chain needs two sites"));
    }
    let scale = j.abs() * (n - 1) as f64 + g.abs() * n as f64;
    let mut h = HamiltonianSum::new(n);
    for i in 0..n - 1 {
        let mut w = vec![Pauli::I; n];
        w[i] = Pauli::Z;
        w[i + 1] = Pauli::Z;
        h.push(HermitianTerm::pauli(PauliString::new(w), -j / scale))?;
    }
    for i in 0..n {
        h.push(HermitianTerm::pauli(PauliString::single(n, i, Pauli::X), -g / scale))?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{Gate, U2Rotation};

    /// `H = −Z/2`, guess `cos(π/6)|0⟩ + sin(π/6)|1⟩`.
    fn qubit_task(obs: &str) -> GroundStateTask {
        GroundStateTask {
            h: HamiltonianSum::from_paulis(&[("Z", -0.5)]).unwrap(),
            mu: 0.0,
            delta: 1.0,
            guess_prep: GateProgram::new(vec![Gate::u2(0, U2Rotation::new(std::f64::consts::FRAC_PI_6, 0.0, 0.0))]),
            gamma: 0.866,
            observable: Observable::pauli(obs).unwrap(),
        }
    }

    #[test]
    fn validation_facts() {
        let f = qubit_task("Z").validate().unwrap();
        assert!((f.ground_energy + 0.5).abs() < 1e-12);
        assert!((f.guess_overlap - (3f64).sqrt() / 2.0).abs() < 1e-12);
        assert!((f.reference - 1.0).abs() < 1e-12);
        let mut bad = qubit_task("Z");
        bad.gamma = 0.9;
        assert!(bad.validate().is_err());
        let mut bad_mu = qubit_task("Z");
        bad_mu.mu = -0.4;
        assert!(bad_mu.validate().is_err());
    }

    #[test]
    fn exact_filter_fidelity() {
        let eps = 1e-2;
        let task = qubit_task("Z");
        let fc = build_filter_circuit(&task, eps).unwrap();
        let out = fc.circuit.apply_exact(&fc.start).unwrap();
        let branch = flagged_branch(&out).unwrap();
        let fid = task.ground_state().unwrap().inner(&branch).norm_sqr();
        assert!(fid >= 1.0 - eps, "{fid}");
        let p: f64 = out.amplitudes()[..2].iter().map(|z| z.norm_sqr()).sum();
        assert!(p >= 1.0 - eps, "{p}");
    }

    #[test]
    fn filter_invariants() {
        let eps = 1e-2;
        let task = qubit_task("Z");
        let fc = build_filter_circuit(&task, eps).unwrap();
        let p = fc.filter.polynomial.apply_hermitian(&task.h.to_dense()).unwrap();
        let phi = task.guess_state().to_cvec();
        let v0 = task.ground_state().unwrap().to_cvec();
        let c0 = v0.dotc(&phi);
        let dist = (&p * &phi - &v0 * c0).norm();
        assert!(dist <= task.gamma * eps, "{dist}");
        let mut filtered = &p * &phi;
        filtered /= crate::linalg::c(filtered.norm(), 0.0);
        let phase = v0.dotc(&filtered);
        let aligned = (&filtered - &v0 * phase).norm();
        assert!(aligned <= eps / 6.0, "{aligned}");
        let ideal = crate::linalg::spectral_norm(&(p - crate::linalg::bit_projector(false)));
        assert!(ideal <= fc.eps_filter, "{ideal}");
    }

    #[test]
    fn exact_guess_stays_fixed() {
        let eps = 1e-2;
        let mut task = qubit_task("Z");
        task.guess_prep = GateProgram::identity();
        task.gamma = 1.0;
        let fc = build_filter_circuit(&task, eps).unwrap();
        let out = fc.circuit.apply_exact(&fc.start).unwrap();
        let fid = task.ground_state().unwrap().inner(&flagged_branch(&out).unwrap()).norm_sqr();
        assert!(fid >= 1.0 - eps);
    }

    #[test]
    fn qubit_examples() {
        for (obs, want) in [("Z", 1.0), ("X", 0.0)] {
            let (est, rep) =
                estimate_property(&qubit_task(obs), &GroundStateConfig::new(1e-2, 1, EstimationMode::ExactRead)).unwrap();
            assert!((est - want).abs() <= 1e-2, "{obs}: {est}");
            assert_eq!(rep.ancillas, 2);
        }
    }

    #[test]
    fn tfim_is_normalized_and_gapped() {
        let h = tfim(3, 1.0, 1.0).unwrap();
        let spec = SpectralDecomposition::of_hamiltonian(&h).unwrap();
        let v = &spec.eigenvalues;
        assert!(v.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        assert!(v[1] - v[0] >= 0.1, "{v:?}");
    }

    #[test]
    fn degree_scales_inversely_with_gap() {
        let degs: Vec<f64> = [0.2, 0.4, 0.8]
            .iter()
            .map(|&d| funcapprox::shifted_sign(0.0, d, 1e-3).unwrap().degree() as f64)
            .collect();
        // Halving Δ roughly doubles the degree.
        for w in degs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.5..=2.6).contains(&ratio), "{degs:?}");
        }
    }
}
