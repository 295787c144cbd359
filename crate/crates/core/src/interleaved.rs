//! Interleaved circuits `W = V_M e^{±iH^(M)} ⋯ V_1 e^{±iH^(1)} V_0` (rightmost
//! first), their exact and Trotterized expectation values, and the
//! Trotterize → sample → extrapolate driver.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimation::{self, EstimationMode};
use crate::gates::{Gate, GateProgram};
use crate::hamiltonian::{lambda_comm_bound, HamiltonianSum};
use crate::linalg::{self, cis, CMat, CVec};
use crate::product_formula::{apply_formula, suzuki, StagedProductFormula};
use crate::richardson::{vandermonde_weights, ExtrapolationScheme, Variant};
use crate::rng;
use crate::state::{self, Observable, StateVector};
use crate::C64;

/// `e^{i·sign·H}`.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub hamiltonian: Arc<HamiltonianSum>,
    pub sign: i8,
}

/// Alternating gate programs and Hamiltonian evolutions, stored in
/// application order: `unitaries[0]`, `evolutions[0]`, `unitaries[1]`, …,
/// `evolutions[M−1]`, `unitaries[M]`.
#[derive(Debug, Clone)]
pub struct InterleavedCircuit {
    n: usize,
    unitaries: Vec<GateProgram>,
    evolutions: Vec<Evolution>,
}

impl InterleavedCircuit {
    /// Gate-only circuit (`M = 0`).
    pub fn new(n: usize) -> Self {
        Self {
            n,
            unitaries: vec![GateProgram::identity()],
            evolutions: vec![],
        }
    }

    pub fn from_parts(n: usize, unitaries: Vec<GateProgram>, evolutions: Vec<Evolution>) -> Result<Self> {
        let c = Self {
            n,
            unitaries,
            evolutions,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.unitaries.len() != self.evolutions.len() + 1 {
            return Err(invalid("segments", "unitaries and evolutions do not alternate"));
        }
        for u in &self.unitaries {
            if !u.fits(self.n) {
                return Err(invalid("segments", format!("gate does not fit {} qubits", self.n)));
            }
        }
        for e in &self.evolutions {
            if e.hamiltonian.num_qubits() != self.n {
                return Err(Error::Dimension {
                    expected: self.n,
                    got: e.hamiltonian.num_qubits(),
                });
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(invalid("sign", "must be +1 or -1"));
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Hamiltonian segment count `M`.
    pub fn segment_count(&self) -> usize {
        self.evolutions.len()
    }

    pub fn unitaries(&self) -> &[GateProgram] {
        &self.unitaries
    }

    pub fn evolutions(&self) -> &[Evolution] {
        &self.evolutions
    }

    pub fn push_gate(&mut self, g: Gate) {
        self.unitaries.last_mut().expect("nonempty").push(g);
    }

    pub fn push_gates(&mut self, p: &GateProgram) {
        self.unitaries.last_mut().expect("nonempty").extend(p);
    }

    pub fn push_evolution(&mut self, h: Arc<HamiltonianSum>, sign: i8) -> Result<()> {
        if h.num_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: h.num_qubits(),
            });
        }
        self.evolutions.push(Evolution { hamiltonian: h, sign });
        self.unitaries.push(GateProgram::identity());
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn append(&mut self, other: &InterleavedCircuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        self.push_gates(&other.unitaries[0]);
        for (e, u) in other.evolutions.iter().zip(&other.unitaries[1..]) {
            self.evolutions.push(e.clone());
            self.unitaries.push(u.clone());
        }
        Ok(())
    }

    /// `W†`: reversed order, inverted gates, flipped evolution signs.
    pub fn inverse(&self) -> InterleavedCircuit {
        InterleavedCircuit {
            n: self.n,
            unitaries: self.unitaries.iter().rev().map(GateProgram::inverse).collect(),
            evolutions: self
                .evolutions
                .iter()
                .rev()
                .map(|e| Evolution {
                    hamiltonian: e.hamiltonian.clone(),
                    sign: -e.sign,
                })
                .collect(),
        }
    }

    pub fn hamiltonians(&self) -> Vec<&HamiltonianSum> {
        self.evolutions.iter().map(|e| e.hamiltonian.as_ref()).collect()
    }

    /// `Γ_avg = Σ_ℓ Γ_ℓ / M`.
    pub fn gamma_avg(&self) -> f64 {
        if self.evolutions.is_empty() {
            return 0.0;
        }
        self.evolutions.iter().map(|e| e.hamiltonian.len()).sum::<usize>() as f64 / self.evolutions.len() as f64
    }

    /// `W|ψ⟩` with exact segment evolutions.
    pub fn apply_exact(&self, psi: &StateVector) -> Result<StateVector> {
        self.check_state(psi)?;
        let mut cache: HashMap<*const HamiltonianSum, (Vec<f64>, CMat)> = HashMap::new();
        let mut s = psi.clone();
        self.unitaries[0].apply(&mut s);
        for (e, u) in self.evolutions.iter().zip(&self.unitaries[1..]) {
            let key = Arc::as_ptr(&e.hamiltonian);
            if let Entry::Vacant(slot) = cache.entry(key) {
                slot.insert(linalg::eigh(&e.hamiltonian.to_dense())?);
            }
            let (vals, vecs) = &cache[&key];
            let mut w = vecs.adjoint() * s.to_cvec();
            for (z, &x) in w.iter_mut().zip(vals) {
                *z *= cis(e.sign as f64 * x);
            }
            let out: CVec = vecs * w;
            s.amplitudes_mut().copy_from_slice(out.as_slice());
            u.apply(&mut s);
        }
        Ok(s)
    }

    /// `W|ψ⟩` with each `e^{iσH}` replaced by `P(−σ/r)^r`.
    pub fn apply_trotter(&self, psi: &StateVector, k: usize, steps: usize) -> Result<StateVector> {
        self.check_state(psi)?;
        let mut formulas: HashMap<usize, StagedProductFormula> = HashMap::new();
        let mut s = psi.clone();
        self.unitaries[0].apply(&mut s);
        for (e, u) in self.evolutions.iter().zip(&self.unitaries[1..]) {
            let g = e.hamiltonian.len();
            if g > 0 {
                if let Entry::Vacant(slot) = formulas.entry(g) {
                    slot.insert(suzuki(k, g)?);
                }
                apply_formula(&mut s, &e.hamiltonian, &formulas[&g], -(e.sign as f64), steps)?;
            }
            u.apply(&mut s);
        }
        Ok(s)
    }

    /// Dense `W`.
    pub fn dense_exact(&self) -> Result<CMat> {
        let dim = 1usize << self.n;
        let mut out = CMat::zeros(dim, dim);
        for col in 0..dim {
            let s = self.apply_exact(&StateVector::basis(self.n, col))?;
            out.set_column(col, &s.to_cvec());
        }
        Ok(out)
    }

    fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.num_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: psi.num_qubits(),
            });
        }
        Ok(())
    }
}

/// Observable on the trailing qubits, optionally restricted to a flagged
/// pattern of the leading qubits.
///
/// Without post-selection the measured operator is `|flag⟩⟨flag| ⊗ O`;
/// with post-selection the value is conditioned on the flag.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub flag: Vec<bool>,
    pub observable: Observable,
    pub postselect: bool,
}

/// One measured value and how much of the state passed the flag.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Reading {
    pub value: f64,
    pub acceptance: f64,
    /// IQAE rounds spent in coherent mode; 0 otherwise.
    pub iqae_rounds: usize,
}

impl Measurement {
    pub fn plain(observable: Observable) -> Self {
        Self {
            flag: vec![],
            observable,
            postselect: false,
        }
    }

    pub fn flagged(flag: Vec<bool>, observable: Observable, postselect: bool) -> Self {
        Self {
            flag,
            observable,
            postselect,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.flag.len() + self.observable.num_qubits()
    }

    /// `‖O‖`.
    pub fn norm(&self) -> f64 {
        self.observable.norm
    }

    fn flag_block<'a>(&self, s: &'a StateVector) -> &'a [C64] {
        let sys = 1usize << self.observable.num_qubits();
        let block = self.flag.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        &s.amplitudes()[block * sys..(block + 1) * sys]
    }

    pub fn exact(&self, s: &StateVector) -> Result<Reading> {
        if s.num_qubits() != self.num_qubits() {
            return Err(Error::Dimension {
                expected: self.num_qubits(),
                got: s.num_qubits(),
            });
        }
        let sub = StateVector::from_raw(self.flag_block(s).to_vec());
        let acceptance = sub.norm().powi(2);
        let num = sub.expectation(&self.observable)?;
        let value = if self.postselect {
            if acceptance <= 0.0 {
                return Err(Error::Estimation("flag never accepted".into()));
            }
            num / acceptance
        } else {
            num
        };
        Ok(Reading {
            value,
            acceptance,
            iqae_rounds: 0,
        })
    }

    /// Shot estimate. Rejected shots are discarded under post-selection and
    /// read as 0 otherwise.
    pub fn sample(&self, s: &StateVector, shots: u64, rng: &mut rng::Rng) -> Result<Reading> {
        let sub = StateVector::from_raw(self.flag_block(s).to_vec());
        let dist = state::outcome_distribution(&sub, &self.observable);
        let accepted: f64 = dist.iter().map(|d| d.1).sum();
        let mut weights: Vec<f64> = dist.iter().map(|d| d.1).collect();
        weights.push((1.0 - accepted).max(0.0));
        let counts = state::multinomial(&weights, shots, rng);
        let kept: u64 = counts[..dist.len()].iter().sum();
        let total: f64 = dist.iter().zip(&counts).map(|(d, &k)| d.0 * k as f64).sum();
        let acceptance = kept as f64 / shots as f64;
        let value = if self.postselect {
            if kept == 0 {
                return Err(Error::Estimation("no shot passed the flag".into()));
            }
            total / kept as f64
        } else {
            total / shots as f64
        };
        Ok(Reading {
            value,
            acceptance,
            iqae_rounds: 0,
        })
    }
}

/// `⟨ψ₀|W†OW|ψ₀⟩` with exact evolutions.
pub fn exact_expectation(c: &InterleavedCircuit, psi0: &StateVector, meas: &Measurement) -> Result<Reading> {
    meas.exact(&c.apply_exact(psi0)?)
}

/// Step parameter `s` with `1/(sM)` Trotter steps per segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrotterRun {
    pub k: usize,
    /// `1/s`.
    pub inv_s: u64,
    pub segments: usize,
}

impl TrotterRun {
    pub fn new(k: usize, inv_s: u64, segments: usize) -> Result<Self> {
        if segments > 0 && inv_s % segments as u64 != 0 {
            return Err(invalid("s", format!("1/s = {inv_s} is not a multiple of M = {segments}")));
        }
        if inv_s == 0 {
            return Err(invalid("s", "1/s must be positive"));
        }
        Ok(Self { k, inv_s, segments })
    }

    /// `1/(sM)`.
    pub fn steps_per_segment(&self) -> usize {
        if self.segments == 0 {
            0
        } else {
            (self.inv_s / self.segments as u64) as usize
        }
    }

    pub fn s(&self) -> f64 {
        1.0 / self.inv_s as f64
    }
}

/// `f(s)`: the Trotterized expectation value.
pub fn trotterized_expectation(
    c: &InterleavedCircuit,
    psi0: &StateVector,
    meas: &Measurement,
    run: &TrotterRun,
    mode: &EstimationMode,
    shots: u64,
    stream: u64,
) -> Result<Reading> {
    if run.segments != c.segment_count() {
        return Err(invalid("run", "segment count differs from circuit"));
    }
    let out = if c.segment_count() == 0 {
        c.apply_trotter(psi0, run.k, 1)?
    } else {
        c.apply_trotter(psi0, run.k, run.steps_per_segment())?
    };
    match mode {
        EstimationMode::ExactRead => meas.exact(&out),
        EstimationMode::Shots { seed, .. } => meas.sample(&out, shots, &mut rng::stream(*seed, stream)),
        EstimationMode::Coherent { eps, delta, seed } => {
            let r = estimation::coherent_expectation(&out, meas, *eps, *delta, *seed, stream)?;
            Ok(Reading {
                value: r.estimate,
                acceptance: 1.0,
                iqae_rounds: r.rounds,
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeRecord {
    pub index: usize,
    pub r: u64,
    /// `1/s_i = r_i / s0`.
    pub inv_s: u64,
    pub steps_per_segment: usize,
    pub value: f64,
    pub acceptance: f64,
    pub shots: u64,
    pub iqae_rounds: usize,
    pub exponentials: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub segments: usize,
    pub gamma_avg: f64,
    pub upsilon: usize,
    pub per_node_steps: Vec<u64>,
    pub per_node_steps_per_segment: Vec<u64>,
    /// `Σ_i (r_i/s0)·Υ·Γ_avg·shots_i`.
    pub total_exponentials: f64,
    /// Largest single-run exponential count.
    pub max_depth_exponentials: f64,
    pub tau_sum: f64,
    pub ancillas: usize,
}

/// Pure accounting for a scheme applied to a circuit.
pub fn resource_report(
    c: &InterleavedCircuit,
    scheme: &ExtrapolationScheme,
    k: usize,
    shots: &[u64],
    ancillas: usize,
) -> ResourceReport {
    let upsilon = 2 * 5usize.pow(k as u32 - 1);
    let gamma_avg = c.gamma_avg();
    let m_seg = c.segment_count().max(1) as u64;
    let per_node_steps = scheme.inverse_steps();
    let per_node_steps_per_segment: Vec<u64> = per_node_steps.iter().map(|s| s / m_seg).collect();
    let depth = |steps: u64| steps as f64 * upsilon as f64 * gamma_avg;
    let total_exponentials = per_node_steps
        .iter()
        .zip(shots)
        .map(|(&s, &n)| depth(s) * n as f64)
        .sum();
    let max_depth_exponentials = per_node_steps.iter().map(|&s| depth(s)).fold(0.0, f64::max);
    ResourceReport {
        segments: c.segment_count(),
        gamma_avg,
        upsilon,
        per_node_steps,
        per_node_steps_per_segment,
        total_exponentials,
        max_depth_exponentials,
        tau_sum: c.segment_count() as f64,
        ancillas,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationConfig {
    pub k: usize,
    pub eps: f64,
    pub mode: EstimationMode,
    /// Overrides `m = min(8, 2k⌈ln(1/ε)⌉)`.
    pub m: Option<usize>,
    /// Overrides the automatic `1/s0`.
    pub inv_s0: Option<u64>,
    pub delta_total: f64,
    /// Reported ancilla count; 1 for the single GQSP-style control qubit.
    pub ancillas: usize,
    /// Maximum number of times `s0` is halved by the residual check.
    pub max_shrinks: usize,
}

impl ExtrapolationConfig {
    pub fn new(k: usize, eps: f64, mode: EstimationMode) -> Self {
        Self {
            k,
            eps,
            mode,
            m: None,
            inv_s0: None,
            delta_total: 1.0 / 3.0,
            ancillas: 1,
            max_shrinks: 4,
        }
    }

    pub fn default_m(&self) -> usize {
        default_m(self.k, self.eps)
    }
}

/// `min(8, 2k⌈ln(1/ε)⌉)`.
pub fn default_m(k: usize, eps: f64) -> usize {
    let m = 2 * k * ((1.0 / eps).ln().ceil().max(1.0) as usize);
    m.clamp(1, 8)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationReport {
    pub scheme: ExtrapolationScheme,
    pub q0: u64,
    pub lambda_comm_bound: f64,
    pub nodes: Vec<NodeRecord>,
    /// `|F^(m) − F^(m−1)|`, the estimate change from dropping the coarsest node.
    pub residual: Option<f64>,
    pub shrinks: usize,
    pub resources: ResourceReport,
}

/// `q0 = ⌈2·max(1, a_max Υ λ_comm)⌉`; `1/s0 = M·q0`.
pub fn base_q0(c: &InterleavedCircuit, k: usize) -> Result<(u64, f64)> {
    if c.segment_count() == 0 {
        return Ok((1, 0.0));
    }
    let pf = suzuki(k, 1)?;
    let lam = lambda_comm_bound(&c.hamiltonians())?;
    let q0 = (2.0 * (pf.a_max * pf.upsilon() as f64 * lam).max(1.0)).ceil() as u64;
    Ok((q0, lam))
}

fn evaluate_nodes(
    c: &InterleavedCircuit,
    psi0: &StateVector,
    meas: &Measurement,
    scheme: &ExtrapolationScheme,
    cfg: &ExtrapolationConfig,
    shots: u64,
) -> Result<Vec<NodeRecord>> {
    let m_seg = c.segment_count();
    let upsilon = 2 * 5usize.pow(cfg.k as u32 - 1) as u64;
    let gamma_total: u64 = c.evolutions().iter().map(|e| e.hamiltonian.len() as u64).sum();
    let inv = scheme.inverse_steps();
    // Coherent nodes split the error over ‖b‖₁ and the failure probability over m.
    let mode = match &cfg.mode {
        EstimationMode::Coherent { eps, delta, seed } => EstimationMode::Coherent {
            eps: eps / scheme.b_norm1,
            delta: delta / scheme.m as f64,
            seed: *seed,
        },
        other => other.clone(),
    };
    (0..scheme.m)
        .into_par_iter()
        .map(|i| {
            let run = TrotterRun::new(cfg.k, inv[i], m_seg)?;
            debug_assert!(m_seg == 0 || inv[i] % m_seg as u64 == 0);
            let reading = trotterized_expectation(c, psi0, meas, &run, &mode, shots, i as u64)?;
            let steps = run.steps_per_segment() as u64;
            Ok(NodeRecord {
                index: i,
                r: scheme.r[i],
                inv_s: inv[i],
                steps_per_segment: run.steps_per_segment(),
                value: reading.value,
                acceptance: reading.acceptance,
                shots: if cfg.mode.is_shots() { shots } else { 0 },
                iqae_rounds: reading.iqae_rounds,
                exponentials: steps * upsilon * gamma_total,
            })
        })
        .collect()
}

/// Estimate from all nodes minus the estimate without the coarsest node.
fn drop_one_residual(scheme: &ExtrapolationScheme, values: &[f64]) -> Result<Option<f64>> {
    if scheme.m < 2 {
        return Ok(None);
    }
    let full = scheme.combine(values)?;
    let sub_r = &scheme.r[..scheme.m - 1];
    let w = vandermonde_weights(sub_r, scheme.variant)?;
    let sub: f64 = w.iter().zip(values).map(|(b, f)| b * f).sum();
    Ok(Some((full - sub).abs()))
}

/// Trotterize every segment, evaluate `f(s_i)` at each node and combine.
pub fn extrapolated_estimate(
    c: &InterleavedCircuit,
    psi0: &StateVector,
    meas: &Measurement,
    cfg: &ExtrapolationConfig,
) -> Result<(f64, ExtrapolationReport)> {
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(invalid("eps", format!("{} not in (0,1)", cfg.eps)));
    }
    if cfg.k == 0 {
        return Err(invalid("order", "k must be at least 1"));
    }
    let m = cfg.m.unwrap_or_else(|| cfg.default_m());
    let m_seg = c.segment_count().max(1) as u64;
    let (q0, lam) = base_q0(c, cfg.k)?;
    let mut inv_s0 = match cfg.inv_s0 {
        Some(v) => {
            if v % m_seg != 0 {
                return Err(invalid("s0", format!("1/s0 = {v} is not a multiple of M = {m_seg}")));
            }
            v
        }
        None => m_seg * q0,
    };
    let probe = ExtrapolationScheme::with_inverse_step(m, 1, Variant::Even)?;
    let shots = match &cfg.mode {
        EstimationMode::Shots { shots: Some(n), .. } => *n,
        EstimationMode::Shots { shots: None, .. } => {
            estimation::hoeffding_shots(cfg.eps, probe.b_norm1, meas.norm(), m, cfg.delta_total)?
        }
        _ => 0,
    };
    let check = cfg.inv_s0.is_none() && matches!(cfg.mode, EstimationMode::ExactRead);
    let mut shrinks = 0;
    loop {
        let scheme = ExtrapolationScheme::with_inverse_step(m, inv_s0, Variant::Even)?;
        let nodes = evaluate_nodes(c, psi0, meas, &scheme, cfg, shots)?;
        let values: Vec<f64> = nodes.iter().map(|n| n.value).collect();
        let estimate = scheme.combine(&values)?;
        let residual = drop_one_residual(&scheme, &values)?;
        let tolerance = 0.25 * cfg.eps * meas.norm().max(f64::MIN_POSITIVE);
        let pass = residual.is_none_or(|r| r <= tolerance);
        if !check || pass || shrinks >= cfg.max_shrinks || c.segment_count() == 0 {
            let shot_list = vec![shots.max(1); m];
            let resources = resource_report(c, &scheme, cfg.k, &shot_list, cfg.ancillas);
            return Ok((
                estimate,
                ExtrapolationReport {
                    scheme,
                    q0: inv_s0 / m_seg,
                    lambda_comm_bound: lam,
                    nodes,
                    residual,
                    shrinks,
                    resources,
                },
            ));
        }
        inv_s0 *= 2;
        shrinks += 1;
    }
}

/// Least-squares residual of fitting `ys` by `Σ_j c_j x^{p_j}`.
pub fn power_fit_residual(xs: &[f64], ys: &[f64], powers: &[i32]) -> f64 {
    let a = nalgebra::DMatrix::from_fn(xs.len(), powers.len(), |i, j| xs[i].powi(powers[j]));
    let b = nalgebra::DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-300).expect("svd solve");
    (a * coef - b).norm()
}
