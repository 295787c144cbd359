//! Quantum linear systems: an adiabatic path to the null space of an
//! embedding Hamiltonian, then an eigenstate filter applied by GQSP.
//!
//! Register layout for `H(s)` on `n + 2` qubits: qubit 0 selects the
//! off-diagonal block, qubit 1 is the embedding qubit of `A(f)`, and the
//! system follows. The full pipeline prepends the GQSP ancilla.

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimation::EstimationMode;
use crate::funcapprox;
use crate::gates::{Gate, GateProgram, U2Rotation};
use crate::gqsp;
use crate::hamiltonian::{HamiltonianSum, HermitianTerm};
use crate::interleaved::{self, ExtrapolationConfig, ExtrapolationReport, InterleavedCircuit, Measurement};
use crate::linalg::{self, c, CMat, CVec};
use crate::pauli::{pauli_decompose, Pauli, PauliString};
use crate::rng;
use crate::state::{Observable, StateVector};
use crate::C64;

/// Ancillas charged to the pipeline: GQSP, block selector, embedding qubit
/// and the adiabatic clock.
pub const QLS_ANCILLAS: usize = 4;

/// Filter acceptance below which the run is rejected.
pub const MIN_ACCEPTANCE: f64 = 0.05;

/// `A x ∝ b` with `A = Σ_j λ_j P_j`, `‖A‖ = 1` and `‖A⁻¹‖ ≤ κ`.
#[derive(Debug, Clone)]
pub struct LinearSystemInstance {
    pub n: usize,
    pub terms: Vec<(PauliString, C64)>,
    pub kappa: f64,
    /// `U_b|0…0⟩ = |b⟩`.
    pub b_prep: GateProgram,
    pub observable: Observable,
}

/// Relative slack on `‖A‖ = 1` and `σ_min ≥ 1/κ`.
const NORM_TOL: f64 = 1e-6;

impl LinearSystemInstance {
    pub fn new(terms: Vec<(PauliString, C64)>, kappa: f64, b_prep: GateProgram, observable: Observable) -> Result<Self> {
        let n = terms.first().map(|(p, _)| p.len()).ok_or_else(|| invalid("A", "no terms"))?;
        let inst = Self {
            n,
            terms,
            kappa,
            b_prep,
            observable,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("A", "needs at least one qubit"));
        }
        if self.terms.iter().any(|(p, _)| p.len() != self.n) {
            return Err(invalid("A", "Pauli words of different lengths"));
        }
        if !(self.kappa >= 1.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa", format!("{} is not ≥ 1", self.kappa)));
        }
        if !self.b_prep.fits(self.n) {
            return Err(invalid("b_prep", "gate does not fit the system register"));
        }
        if self.observable.num_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: self.observable.num_qubits(),
            });
        }
        let (smax, smin) = self.singular_range();
        if (smax - 1.0).abs() > NORM_TOL {
            return Err(invalid("A", format!("‖A‖ = {smax}, expected 1")));
        }
        if smin * self.kappa < 1.0 - NORM_TOL {
            return Err(invalid("kappa", format!("σ_min(A) = {smin} is below 1/κ")));
        }
        Ok(())
    }

    pub fn dense_a(&self) -> CMat {
        let dim = 1usize << self.n;
        self.terms
            .iter()
            .fold(CMat::zeros(dim, dim), |acc, (p, l)| acc + p.to_dense() * *l)
    }

    fn singular_range(&self) -> (f64, f64) {
        let sv = self.dense_a().singular_values();
        (sv.max(), sv.min())
    }

    /// `κ(A) = σ_max/σ_min`.
    pub fn condition_number(&self) -> f64 {
        let (a, b) = self.singular_range();
        a / b
    }

    pub fn b_state(&self) -> StateVector {
        let mut s = StateVector::zero(self.n);
        self.b_prep.apply(&mut s);
        s
    }

    /// Normalized `A⁻¹|b⟩`.
    pub fn classical_solution(&self) -> Result<StateVector> {
        let inv = self
            .dense_a()
            .try_inverse()
            .ok_or_else(|| invalid("A", "singular"))?;
        let x = inv * self.b_state().to_cvec();
        let mut s = StateVector::from_raw(x.iter().copied().collect());
        s.normalize();
        Ok(s)
    }

    /// `⟨x|O|x⟩` for the normalized solution.
    pub fn classical_expectation(&self) -> Result<f64> {
        self.classical_solution()?.expectation(&self.observable)
    }

    /// `|0, 1, x⟩` on the `n + 2` qubit register of `H(s)`.
    pub fn target_state(&self) -> Result<StateVector> {
        Ok(StateVector::basis(2, 1).tensor(&self.classical_solution()?))
    }

    /// `|0, 0, b⟩` on the `n + 2` qubit register of `H(s)`.
    pub fn initial_state(&self) -> StateVector {
        StateVector::zero(2).tensor(&self.b_state())
    }
}

/// `f(s) = κ/(κ−1)·(1 − 1/(1 + s(√κ − 1))²)`; `f(s) = s` at `κ = 1`.
pub fn schedule_f(s: f64, kappa: f64) -> f64 {
    let u = kappa.sqrt() - 1.0;
    if u.abs() < 1e-12 {
        return s;
    }
    kappa / (kappa - 1.0) * (1.0 - 1.0 / (1.0 + s * u).powi(2))
}

/// `A(f) = (1−f) Z⊗I + f Σ_j |λ_j| Q_j⊗P_j` with `Q_j = (Re λ_j X − Im λ_j Y)/|λ_j|`,
/// on `n + 1` qubits.
pub fn dense_a_of_f(inst: &LinearSystemInstance, f: f64) -> CMat {
    let dim = 1usize << inst.n;
    let z = PauliString::single(1, 0, Pauli::Z).to_dense();
    let mut block = CMat::zeros(2 * dim, 2 * dim);
    let a = inst.dense_a();
    for r in 0..dim {
        for col in 0..dim {
            block[(r, dim + col)] = a[(r, col)];
            block[(dim + r, col)] = a[(col, r)].conj();
        }
    }
    linalg::kron(&z, &linalg::identity(dim)) * c(1.0 - f, 0.0) + block * c(f, 0.0)
}

/// `H(s) = [[0, A(f)Q_b], [Q_b A(f), 0]]`, `Q_b = I − |0,b⟩⟨0,b|`.
///
/// `X⊗A(f)` contributes Pauli terms; the projector part is the single
/// rank-two coupling `−(|0⟩|A(f)v⟩⟨1|⟨v| + h.c.)` with `v = |0,b⟩`.
pub fn build_h(inst: &LinearSystemInstance, s: f64) -> Result<HamiltonianSum> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid("s", format!("{s} not in [0,1]")));
    }
    let n = inst.n;
    let f = schedule_f(s, inst.kappa);
    let mut h = HamiltonianSum::new(n + 2);
    let prefix = |q: Pauli| PauliString::new(vec![Pauli::X, q]);
    if 1.0 - f != 0.0 {
        h.push(HermitianTerm::pauli(prefix(Pauli::Z).tensor(&PauliString::identity(n)), 1.0 - f))?;
    }
    for (p, l) in &inst.terms {
        if f * l.re != 0.0 {
            h.push(HermitianTerm::pauli(prefix(Pauli::X).tensor(p), f * l.re))?;
        }
        if f * l.im != 0.0 {
            h.push(HermitianTerm::pauli(prefix(Pauli::Y).tensor(p), -f * l.im))?;
        }
    }
    let v = inst.initial_state().amplitudes()[..2 << n].to_vec();
    let w = dense_a_of_f(inst, f) * CVec::from_column_slice(&v);
    let wn = w.norm();
    if wn > 0.0 {
        let zero = vec![c(0.0, 0.0); 2 << n];
        let mut a = w.iter().map(|z| z / wn).collect::<Vec<_>>();
        a.extend_from_slice(&zero);
        let mut b = zero;
        b.extend_from_slice(&v);
        h.push(HermitianTerm::coupling(&a, &b, -wn)?)?;
    }
    Ok(h)
}

/// Reference dense `H(s)` built directly from the block formula.
pub fn dense_h(inst: &LinearSystemInstance, s: f64) -> CMat {
    let f = schedule_f(s, inst.kappa);
    let a = dense_a_of_f(inst, f);
    let d = a.nrows();
    let v = inst.initial_state().to_cvec().rows(0, d).into_owned();
    let q = linalg::identity(d) - &v * v.adjoint();
    let upper = &a * &q;
    let lower = &q * &a;
    let mut h = CMat::zeros(2 * d, 2 * d);
    h.view_mut((0, d), (d, d)).copy_from(&upper);
    h.view_mut((d, 0), (d, d)).copy_from(&lower);
    h
}

/// Smallest nonzero `|ξ|` of `H(s)`; the null space is two-dimensional.
pub fn spectral_gap(inst: &LinearSystemInstance, s: f64) -> Result<f64> {
    let (vals, _) = linalg::eigh(&dense_h(inst, s))?;
    let mut mags: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
    mags.sort_by(f64::total_cmp);
    Ok(mags.get(2).copied().unwrap_or(0.0))
}

/// `B = e^{iH((T−1)/T)} ⋯ e^{iH(0)}`: `T` unit-time segments on `n + 2` qubits.
pub fn adiabatic_evolve(inst: &LinearSystemInstance, t_steps: usize) -> Result<InterleavedCircuit> {
    if t_steps == 0 {
        return Err(invalid("T", "must be positive"));
    }
    let mut circ = InterleavedCircuit::new(inst.n + 2);
    for m in 0..t_steps {
        circ.push_evolution(Arc::new(build_h(inst, m as f64 / t_steps as f64)?), 1)?;
    }
    Ok(circ)
}

/// `|⟨0,1,x|B|0,0,b⟩|` after exact evolution.
pub fn adiabatic_overlap(inst: &LinearSystemInstance, t_steps: usize) -> Result<f64> {
    let out = adiabatic_evolve(inst, t_steps)?.apply_exact(&inst.initial_state())?;
    Ok(inst.target_state()?.inner(&out).norm())
}

/// `T = ⌈8κ⌉`.
pub fn default_t(kappa: f64) -> usize {
    (8.0 * kappa).ceil() as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct QlsConfig {
    pub eps: f64,
    pub k: usize,
    pub mode: EstimationMode,
    pub t_steps: Option<usize>,
    pub m: Option<usize>,
    pub inv_s0: Option<u64>,
}

impl QlsConfig {
    pub fn new(eps: f64, k: usize, mode: EstimationMode) -> Self {
        Self {
            eps,
            k,
            mode,
            t_steps: None,
            m: None,
            inv_s0: None,
        }
    }
}

/// Pipeline circuit on `n + 3` qubits with its start state and readout.
#[derive(Debug, Clone)]
pub struct QlsCircuit {
    pub circuit: InterleavedCircuit,
    pub start: StateVector,
    pub measurement: Measurement,
    pub filter: funcapprox::ApproximationReport,
    pub angles: gqsp::GqspAngles,
    pub t_steps: usize,
}

/// Filter width: the gap of `H(1)` is at least `1/κ`; `Δ < 1` is required.
fn filter_width(kappa: f64) -> f64 {
    (1.0 / kappa).min(0.99)
}

pub fn build_pipeline(inst: &LinearSystemInstance, eps: f64, t_steps: usize) -> Result<QlsCircuit> {
    inst.validate()?;
    let filter = funcapprox::filter(filter_width(inst.kappa), eps)?;
    let angles = gqsp::synthesize_angles(&filter.polynomial)?;
    let h1 = build_h(inst, 1.0)?;
    let mut circuit = InterleavedCircuit::new(inst.n + 3);
    for m in 0..t_steps {
        let h = build_h(inst, m as f64 / t_steps as f64)?.idle_prefix(1);
        circuit.push_evolution(Arc::new(h), 1)?;
    }
    circuit.append(&gqsp::build_circuit(&angles, &h1)?)?;
    let start = StateVector::zero(1).tensor(&inst.initial_state());
    let measurement = Measurement::flagged(vec![false, false, true], inst.observable.clone(), true);
    Ok(QlsCircuit {
        circuit,
        start,
        measurement,
        filter,
        angles,
        t_steps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QlsReport {
    pub estimate: f64,
    pub classical_reference: f64,
    pub kappa: f64,
    pub t_steps: usize,
    pub overlap_after_adiabatic: f64,
    pub filter_acceptance: f64,
    pub filter_degree: usize,
    pub filter_delta: f64,
    pub ancillas: usize,
    pub simulated_qubits: usize,
    pub extrapolation: ExtrapolationReport,
}

/// Adiabatic evolution, GQSP filter on `H(1)`, then extrapolated estimation of
/// `⟨x|O|x⟩` post-selected on the GQSP ancilla and the `|0,1⟩` block.
pub fn solve_and_estimate(inst: &LinearSystemInstance, cfg: &QlsConfig) -> Result<(f64, QlsReport)> {
    let t_steps = cfg.t_steps.unwrap_or_else(|| default_t(inst.kappa));
    let pipe = build_pipeline(inst, cfg.eps, t_steps)?;
    let overlap = adiabatic_overlap(inst, t_steps)?;
    let exact = interleaved::exact_expectation(&pipe.circuit, &pipe.start, &pipe.measurement)?;
    if exact.acceptance < MIN_ACCEPTANCE {
        return Err(Error::Estimation(format!(
            "filter acceptance {:.4} below {MIN_ACCEPTANCE}",
            exact.acceptance
        )));
    }
    let mut ecfg = ExtrapolationConfig::new(cfg.k, cfg.eps, cfg.mode.clone());
    ecfg.m = cfg.m;
    ecfg.inv_s0 = cfg.inv_s0;
    ecfg.ancillas = QLS_ANCILLAS;
    let (estimate, extrapolation) =
        interleaved::extrapolated_estimate(&pipe.circuit, &pipe.start, &pipe.measurement, &ecfg)?;
    let report = QlsReport {
        estimate,
        classical_reference: inst.classical_expectation()?,
        kappa: inst.kappa,
        t_steps,
        overlap_after_adiabatic: overlap,
        filter_acceptance: exact.acceptance,
        filter_degree: pipe.angles.d,
        filter_delta: filter_width(inst.kappa),
        ancillas: QLS_ANCILLAS,
        simulated_qubits: inst.n + 3,
        extrapolation,
    };
    Ok((estimate, report))
}

/// `‖P(e^{iH(1)})² − P(e^{iH(1)})‖` for the filter used by the pipeline.
pub fn filter_idempotence_defect(inst: &LinearSystemInstance, eps: f64) -> Result<f64> {
    let rep = funcapprox::filter(filter_width(inst.kappa), eps)?;
    let p = rep.polynomial.apply_hermitian(&dense_h(inst, 1.0))?;
    Ok(linalg::spectral_norm(&(&p * &p - &p)))
}

/// Random `A` from `terms` Pauli words on `n` qubits with `κ(A) ≤ kappa_max`,
/// a random product state `|b⟩` and `O = Z` on qubit 0.
pub fn random_instance(n: usize, terms: usize, kappa_max: f64, seed: u64) -> Result<LinearSystemInstance> {
    if n == 0 || terms == 0 {
        return Err(invalid("n", "needs qubits and terms"));
    }
    let mut rng = rng::stream(seed, 0);
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    for _ in 0..10_000 {
        let mut dense = linalg::identity(1 << n) * c(1.0, 0.0);
        for _ in 0..terms {
            let word = PauliString::new((0..n).map(|_| letters[rng.random_range(0..4)]).collect());
            let g: f64 = StandardNormal.sample(&mut rng);
            dense += word.to_dense() * c(0.5 * g, 0.0);
        }
        let sv = dense.singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if smin <= 0.0 || smax / smin > kappa_max {
            continue;
        }
        dense /= c(smax, 0.0);
        let a = pauli_decompose(&dense, 1e-14)?;
        let mut prep = GateProgram::identity();
        for q in 0..n {
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            // R(θ, φ, 0) maps |0⟩ to e^{iφ}cos θ|0⟩ + sin θ|1⟩.
            prep.push(Gate::u2(q, U2Rotation::new(theta, phi, 0.0)));
        }
        let obs = Observable::from_dense(PauliString::single(n, 0, Pauli::Z).to_dense())?;
        let kappa = (smax / smin) * (1.0 + 1e-9);
        return LinearSystemInstance::new(a, kappa, prep, obs);
    }
    Err(Error::Budget(format!("no instance with κ ≤ {kappa_max} after 10000 draws")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn hadamard_b() -> GateProgram {
        GateProgram::new(vec![Gate::hadamard(0)])
    }

    fn diag_instance() -> LinearSystemInstance {
        LinearSystemInstance::new(
            vec![("I".parse().unwrap(), c(0.75, 0.0)), ("Z".parse().unwrap(), c(0.25, 0.0))],
            2.0,
            hadamard_b(),
            Observable::pauli("Z").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn schedule_examples() {
        assert!((schedule_f(0.5, 4.0) - 0.740741).abs() < 1e-6);
        for kappa in [1.0, 2.0, 10.0] {
            assert_eq!(schedule_f(0.0, kappa), 0.0);
            assert!((schedule_f(1.0, kappa) - 1.0).abs() < 1e-12);
        }
        assert!((schedule_f(0.3, 1.0 + 1e-14) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn hamiltonian_matches_block_form() {
        let inst = diag_instance();
        for s in [0.0, 0.3, 0.7, 1.0] {
            let h = build_h(&inst, s).unwrap();
            assert_eq!(h.num_qubits(), 3);
            assert!(max_abs_diff(&h.to_dense(), &dense_h(&inst, s)) < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn complex_coefficients_split_into_two_terms() {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let inst = LinearSystemInstance::new(
            vec![("Z".parse().unwrap(), c(s2, s2))],
            1.0,
            hadamard_b(),
            Observable::pauli("X").unwrap(),
        )
        .unwrap();
        let h = build_h(&inst, 0.6).unwrap();
        assert_eq!(h.terms().iter().filter(|t| t.is_pauli()).count(), 3);
        assert!(max_abs_diff(&h.to_dense(), &dense_h(&inst, 0.6)) < 1e-12);
    }

    #[test]
    fn endpoint_null_vectors() {
        let inst = diag_instance();
        let h0 = build_h(&inst, 0.0).unwrap();
        let r0 = h0.apply(inst.initial_state().amplitudes());
        assert!(r0.iter().all(|z| z.norm() < 1e-12));
        let h1 = build_h(&inst, 1.0).unwrap();
        let r1 = h1.apply(inst.target_state().unwrap().amplitudes());
        assert!(r1.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn classical_reference() {
        let inst = diag_instance();
        assert!((inst.classical_expectation().unwrap() + 0.6).abs() < 1e-12);
        let z = LinearSystemInstance::new(
            vec![("Z".parse().unwrap(), c(1.0, 0.0))],
            1.0,
            hadamard_b(),
            Observable::pauli("X").unwrap(),
        )
        .unwrap();
        assert!((z.classical_expectation().unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_norm_and_kappa() {
        let big = LinearSystemInstance::new(vec![("Z".parse().unwrap(), c(2.0, 0.0))], 2.0, hadamard_b(), Observable::pauli("Z").unwrap());
        assert!(big.is_err());
        let ill = LinearSystemInstance::new(
            vec![("I".parse().unwrap(), c(0.75, 0.0)), ("Z".parse().unwrap(), c(0.25, 0.0))],
            1.5,
            hadamard_b(),
            Observable::pauli("Z").unwrap(),
        );
        assert!(ill.is_err());
    }

    #[test]
    fn gap_lower_bound_along_path() {
        let inst = diag_instance();
        for i in 0..=10 {
            let s = i as f64 / 10.0;
            let f = schedule_f(s, inst.kappa);
            let g = spectral_gap(&inst, s).unwrap();
            assert!(g >= (1.0 - f + f / inst.kappa) / 2.0 - 1e-12, "s = {s}, gap {g}");
        }
    }

    #[test]
    fn overlap_grows_with_t() {
        let inst = diag_instance();
        let overlaps: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|m| adiabatic_overlap(&inst, (m * inst.kappa) as usize).unwrap())
            .collect();
        assert!(overlaps[2] >= 0.5, "{overlaps:?}");
        assert!(overlaps.windows(2).all(|w| w[1] >= w[0]), "{overlaps:?}");
    }

    #[test]
    fn filter_is_nearly_idempotent() {
        let inst = diag_instance();
        let eps = 1e-2;
        assert!(filter_idempotence_defect(&inst, eps).unwrap() <= 3.0 * eps);
    }

    #[test]
    fn random_instances_respect_kappa() {
        for seed in 0..5 {
            let inst = random_instance(2, 4, 4.0, seed).unwrap();
            assert!(inst.condition_number() <= 4.0 + 1e-6);
            assert!(max_abs_diff(&build_h(&inst, 0.4).unwrap().to_dense(), &dense_h(&inst, 0.4)) < 1e-12);
        }
    }

    #[test]
    fn exact_pipeline_recovers_solution() {
        let inst = diag_instance();
        let pipe = build_pipeline(&inst, 1e-2, default_t(inst.kappa)).unwrap();
        let r = interleaved::exact_expectation(&pipe.circuit, &pipe.start, &pipe.measurement).unwrap();
        assert!((r.value + 0.6).abs() < 1e-2, "{}", r.value);
        assert!(r.acceptance > 0.5);
    }
}
