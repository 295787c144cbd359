//! Dense state vectors, observables and the spectral oracle used in tests.

use std::sync::OnceLock;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::gates::{Gate, U2Rotation};
use crate::hamiltonian::{HamiltonianSum, HermitianTerm};
use crate::linalg::{self, c, CMat, CVec, HERMITIAN_TOL};
use crate::pauli::PauliString;
use crate::rng::Rng;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = c(1.0, 0.0);
        Self { n, amps }
    }

    /// Parse a bit string such as `"0101"`; character 0 is qubit 0.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        let mut index = 0usize;
        for ch in bits.chars() {
            index <<= 1;
            match ch {
                '0' => {}
                '1' => index |= 1,
                other => return Err(invalid("state", format!("bit `{other}` is not 0 or 1"))),
            }
        }
        Ok(Self::basis(n, index))
    }

    /// Normalized copy of the given amplitudes.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(invalid("amplitudes", "length is not a power of two"));
        }
        let n = amps.len().trailing_zeros() as usize;
        let mut s = Self { n, amps };
        let norm = s.norm();
        if norm < 1e-300 {
            return Err(invalid("amplitudes", "zero vector"));
        }
        s.scale(1.0 / norm);
        Ok(s)
    }

    /// Amplitudes taken as-is, possibly unnormalized.
    pub fn from_raw(amps: Vec<C64>) -> Self {
        let n = amps.len().trailing_zeros() as usize;
        Self { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n);
        }
        n
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `self ⊗ other` (self occupies the leading qubits).
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector {
            n: self.n + other.n,
            amps,
        }
    }

    /// Prepend `k` ancilla qubits in `|0⟩`.
    pub fn with_ancillas(&self, k: usize) -> StateVector {
        StateVector::zero(k).tensor(self)
    }

    fn check_qubits(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: n,
            });
        }
        Ok(())
    }

    /// `ψ ← exp(i·angle·P) ψ`.
    pub fn apply_pauli_exp(&mut self, p: &PauliString, angle: f64) -> Result<()> {
        self.check_qubits(p.len())?;
        crate::hamiltonian::pauli_exp(&mut self.amps, p, angle);
        Ok(())
    }

    /// `ψ ← exp(i·angle·term) ψ`.
    pub fn apply_local_exp(&mut self, term: &HermitianTerm, angle: f64) -> Result<()> {
        self.check_qubits(term.num_qubits())?;
        term.apply_exp(&mut self.amps, angle);
        Ok(())
    }

    pub fn apply_u2(&mut self, qubit: usize, r: U2Rotation) -> Result<()> {
        if qubit >= self.n {
            return Err(invalid("qubit", format!("{qubit} out of range 0..{}", self.n)));
        }
        Gate::u2(qubit, r).apply(&mut self.amps, self.n);
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        if !g.fits(self.n) {
            return Err(invalid("gate", format!("does not fit {} qubits", self.n)));
        }
        g.apply(&mut self.amps, self.n);
        Ok(())
    }

    /// `ψ ← M ψ` for a dense matrix.
    pub fn apply_matrix(&mut self, m: &CMat) -> Result<()> {
        if m.ncols() != self.dim() || m.nrows() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: m.ncols(),
            });
        }
        let v = m * CVec::from_column_slice(&self.amps);
        self.amps.copy_from_slice(v.as_slice());
        Ok(())
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: obs.dim(),
                got: self.dim(),
            });
        }
        let v = CVec::from_column_slice(&self.amps);
        let z = (v.adjoint() * (&obs.matrix * &v))[(0, 0)];
        debug_assert!(z.im.abs() < 1e-10 * (1.0 + obs.norm));
        Ok(z.re)
    }

    pub fn to_cvec(&self) -> CVec {
        CVec::from_column_slice(&self.amps)
    }
}

/// Hermitian observable with cached norm and eigensystem.
#[derive(Debug, Clone)]
pub struct Observable {
    pub matrix: CMat,
    pub norm: f64,
    spectral: OnceLock<SpectralDecomposition>,
}

impl Observable {
    pub fn from_dense(matrix: CMat) -> Result<Self> {
        if !linalg::is_hermitian(&matrix, HERMITIAN_TOL) {
            return Err(invalid("observable", "not Hermitian within 1e-12"));
        }
        let spec = SpectralDecomposition::of_matrix(&matrix)?;
        let norm = spec
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        let cell = OnceLock::new();
        let _ = cell.set(spec);
        Ok(Self {
            matrix,
            norm,
            spectral: cell,
        })
    }

    pub fn from_hamiltonian(h: &HamiltonianSum) -> Result<Self> {
        Self::from_dense(h.to_dense())
    }

    pub fn pauli(word: &str) -> Result<Self> {
        Self::from_dense(word.parse::<PauliString>()?.to_dense())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_dense(linalg::identity(1 << n)).expect("identity is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        self.spectral.get_or_init(|| {
            SpectralDecomposition::of_matrix(&self.matrix).expect("observable eigensolve")
        })
    }

    /// `|v⟩⟨v|^{⊗ k} ⊗ O`: prepend `k` qubits projected onto the given bits.
    pub fn with_flag(&self, bits: &[bool]) -> Result<Self> {
        let mut m = self.matrix.clone();
        for &b in bits.iter().rev() {
            m = linalg::kron(&linalg::bit_projector(b), &m);
        }
        Self::from_dense(m)
    }
}

/// `H = Σ ξ_i |v_i⟩⟨v_i|`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn of_matrix(m: &CMat) -> Result<Self> {
        let (eigenvalues, eigenvectors) = linalg::eigh(m)?;
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn of_hamiltonian(h: &HamiltonianSum) -> Result<Self> {
        Self::of_matrix(&h.to_dense())
    }

    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMat {
        linalg::apply_spectral(&self.eigenvalues, &self.eigenvectors, f)
    }

    pub fn reconstruction_error(&self, m: &CMat) -> f64 {
        linalg::spectral_norm(&(self.apply(|x| c(x, 0.0)) - m))
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_raw(self.eigenvectors.column(k).iter().copied().collect())
    }
}

/// `f(H) = V diag(f(ξ)) V†`.
pub fn operator_function_oracle(h: &HamiltonianSum, f: impl Fn(f64) -> C64) -> Result<CMat> {
    Ok(SpectralDecomposition::of_hamiltonian(h)?.apply(f))
}

/// Born-rule probabilities of each eigenvalue of `obs` in `state`.
pub fn outcome_distribution(state: &StateVector, obs: &Observable) -> Vec<(f64, f64)> {
    let spec = obs.spectral();
    let v = state.to_cvec();
    let amps = spec.eigenvectors.adjoint() * v;
    spec.eigenvalues
        .iter()
        .zip(amps.iter())
        .map(|(&x, a)| (x, a.norm_sqr()))
        .collect()
}

/// Multinomial counts over categories with the given (unnormalized) weights.
pub fn multinomial(weights: &[f64], shots: u64, rng: &mut Rng) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass: f64 = weights.iter().sum();
    let mut out = vec![0u64; weights.len()];
    for (k, &w) in weights.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == weights.len() || mass <= w {
            out[k] = remaining;
            break;
        }
        let p = (w / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, p)
            .expect("binomial probability in [0,1]")
            .sample(rng);
        out[k] = draw;
        remaining -= draw;
        mass -= w;
    }
    out
}

/// I.i.d. eigenvalue draws with Born-rule probabilities.
pub fn sample_observable(state: &StateVector, obs: &Observable, shots: usize, rng: &mut Rng) -> Vec<f64> {
    let dist = outcome_distribution(state, obs);
    let total: f64 = dist.iter().map(|d| d.1).sum();
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &(_, p) in &dist {
        acc += p / total;
        cdf.push(acc);
    }
    (0..shots)
        .map(|_| {
            let u: f64 = rng.random();
            let k = cdf.partition_point(|&x| x < u).min(dist.len() - 1);
            dist[k].0
        })
        .collect()
}

/// Sample mean of `shots` draws, using multinomial counts.
pub fn sample_mean(state: &StateVector, obs: &Observable, shots: u64, rng: &mut Rng) -> f64 {
    let dist = outcome_distribution(state, obs);
    let weights: Vec<f64> = dist.iter().map(|d| d.1).collect();
    let counts = multinomial(&weights, shots, rng);
    dist.iter()
        .zip(counts)
        .map(|(d, k)| d.0 * k as f64)
        .sum::<f64>()
        / shots as f64
}

/// Both sides of `|Tr[O PρP†] − Tr[O QρQ†]| ≤ 3‖O‖‖P − Q‖` for `‖P‖ ≤ 1`.
pub fn perturbation_bound(p: &CMat, q: &CMat, rho: &CMat, o: &CMat) -> Result<(f64, f64)> {
    let lhs = ((o * p * rho * p.adjoint()).trace() - (o * q * rho * q.adjoint()).trace()).norm();
    let rhs = 3.0 * linalg::hermitian_norm(o)? * linalg::spectral_norm(&(p - q));
    Ok((lhs, rhs))
}
