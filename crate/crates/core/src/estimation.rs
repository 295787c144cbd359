//! Reading expectation values off simulated states: exact reads, shot
//! sampling with Hoeffding budgets, iterative amplitude estimation, and
//! fixed-point amplitude amplification.

use std::sync::Arc;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::Gate;
use crate::interleaved::{InterleavedCircuit, Measurement};
use crate::linalg::{self, cis, CMat};
use crate::rng::{self, Rng};
use crate::state::StateVector;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EstimationMode {
    /// Read expectation values off the state vector.
    ExactRead,
    /// Finite shots per node; `None` uses the Hoeffding budget.
    Shots { shots: Option<u64>, seed: u64 },
    /// Hadamard test read out by iterative amplitude estimation.
    Coherent { eps: f64, delta: f64, seed: u64 },
}

impl EstimationMode {
    pub fn is_shots(&self) -> bool {
        matches!(self, EstimationMode::Shots { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimationMode::ExactRead => "exact",
            EstimationMode::Shots { .. } => "shots",
            EstimationMode::Coherent { .. } => "coherent",
        }
    }
}

/// Shot budget for an `m`-node extrapolation.
#[derive(Debug, Clone, Serialize)]
pub struct EstimationPlan {
    pub mode: EstimationMode,
    pub m: usize,
    pub b_norm1: f64,
    pub eps: f64,
    pub delta_total: f64,
    pub shots_per_node: u64,
}

impl EstimationPlan {
    pub fn new(mode: EstimationMode, m: usize, b_norm1: f64, eps: f64, delta_total: f64) -> Result<Self> {
        let shots_per_node = match &mode {
            EstimationMode::Shots { shots: Some(n), .. } => *n,
            EstimationMode::Shots { shots: None, .. } => hoeffding_shots(eps, b_norm1, 1.0, m, delta_total)?,
            _ => 0,
        };
        Ok(Self {
            mode,
            m,
            b_norm1,
            eps,
            delta_total,
            shots_per_node,
        })
    }

    pub fn total_shots(&self) -> u64 {
        self.shots_per_node * self.m as u64
    }
}

/// `⌈2(2‖b‖₁‖O‖/(ε‖O‖))² · ln(2m/(δ/3))⌉` shots per node for additive error
/// `ε‖O‖` with probability `1 − δ` across all `m` nodes. `‖O‖` cancels unless
/// it is zero.
pub fn hoeffding_shots(eps: f64, b_norm1: f64, obs_norm: f64, m: usize, delta: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0,1)"));
    }
    if m == 0 {
        return Err(invalid("m", "must be positive"));
    }
    let ratio = if obs_norm > 0.0 {
        2.0 * b_norm1 * obs_norm / (eps * obs_norm)
    } else {
        2.0 * b_norm1 / eps
    };
    let n = 2.0 * ratio * ratio * (2.0 * m as f64 / (delta / 3.0)).ln();
    Ok(n.ceil() as u64)
}

/// Result of iterative amplitude estimation for `a = ‖Π_good ψ‖²`.
#[derive(Debug, Clone, Serialize)]
pub struct IqaeResult {
    pub estimate: f64,
    pub interval: (f64, f64),
    /// Grover-operator applications summed over all shots.
    pub grover_queries: u64,
    /// State-preparation calls: one per shot plus two per Grover application.
    pub oracle_calls: u64,
    pub rounds: usize,
    pub shots_per_round: u64,
    pub retried: bool,
}

/// Oracle-call constant `C` in `calls ≤ (C/ε)·ln((2/δ)·log₂(π/(4ε)))`.
/// Measured worst case over 200 seeds at `a ∈ {0.02, 0.25, 0.5, 0.9}`, `ε = 0.01`: 16.3.
pub const IQAE_CALL_CONSTANT: f64 = 50.0;

pub fn iqae_call_bound(eps: f64, delta: f64) -> f64 {
    let t = (std::f64::consts::PI / (4.0 * eps)).log2().max(1.0);
    IQAE_CALL_CONSTANT / eps * (2.0 / delta * t).ln()
}

/// Base shots per IQAE round.
pub const IQAE_SHOTS: u64 = 100;

fn good_probability(state: &[C64], good: &dyn Fn(usize) -> bool) -> f64 {
    state
        .iter()
        .enumerate()
        .filter(|(i, _)| good(*i))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// `Q^k|ψ⟩` with `Q = −(I − 2|ψ⟩⟨ψ|)(I − 2Π_good)`.
fn grover_power(psi: &[C64], good: &dyn Fn(usize) -> bool, k: u64) -> Vec<C64> {
    let mut s = psi.to_vec();
    for _ in 0..k {
        for (i, a) in s.iter_mut().enumerate() {
            if good(i) {
                *a = -*a;
            }
        }
        let ov: C64 = psi.iter().zip(&s).map(|(p, a)| p.conj() * a).sum();
        for (a, p) in s.iter_mut().zip(psi) {
            *a = 2.0 * ov * p - *a;
        }
    }
    s
}

fn find_next_k(k: u64, upper: bool, lo: f64, hi: f64) -> (u64, bool) {
    let old = 4 * k + 2;
    let width = hi - lo;
    if width <= 0.0 {
        return (k, upper);
    }
    let max_scaling = (1.0 / (2.0 * width)).floor() as u64;
    if max_scaling < 2 {
        return (k, upper);
    }
    let mut scaling = max_scaling - (max_scaling - 2) % 4;
    while scaling >= 2 * old {
        let s = scaling as f64;
        let tmin = s * lo - (s * lo).floor();
        let tmax = s * hi - (s * hi).floor();
        if tmin <= tmax && tmax <= 0.5 {
            return ((scaling - 2) / 4, true);
        }
        if tmin <= tmax && tmin >= 0.5 {
            return ((scaling - 2) / 4, false);
        }
        scaling -= 4;
    }
    (k, upper)
}

/// Iterative amplitude estimation with Hoeffding intervals.
///
/// Angles are in turns: `a = sin²(2πθ)`, `θ ∈ [0, 1/4]`. The returned
/// interval contains `a` with probability at least `1 − δ` and has
/// half-width at most `ε`.
///
/// A pilot batch of `IQAE_SHOTS` unamplified shots decides whether to
/// estimate `a` or `1 − a`: near `a = 1` every Grover power straddles the
/// half-circle boundary and the schedule stalls.
pub fn iqae(psi: &StateVector, good: &dyn Fn(usize) -> bool, eps: f64, delta: f64, rng: &mut Rng) -> Result<IqaeResult> {
    let p = good_probability(psi.amplitudes(), good).clamp(0.0, 1.0);
    let pilot = Binomial::new(IQAE_SHOTS, p).expect("probability in [0,1]").sample(rng);
    let flip = 2 * pilot > IQAE_SHOTS;
    let bad = |i: usize| !good(i);
    let target: &dyn Fn(usize) -> bool = if flip { &bad } else { good };
    let mut r = match iqae_with_shots(psi, target, eps, delta, IQAE_SHOTS, rng) {
        Ok(r) => r,
        Err(_) => {
            let mut r = iqae_with_shots(psi, target, eps, delta, 2 * IQAE_SHOTS, rng)?;
            r.retried = true;
            r
        }
    };
    r.oracle_calls += IQAE_SHOTS;
    if flip {
        r.estimate = 1.0 - r.estimate;
        r.interval = (1.0 - r.interval.1, 1.0 - r.interval.0);
    }
    Ok(r)
}

pub fn iqae_with_shots(
    psi: &StateVector,
    good: &dyn Fn(usize) -> bool,
    eps: f64,
    delta: f64,
    shots: u64,
    rng: &mut Rng,
) -> Result<IqaeResult> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("eps", "must lie in (0, 1/2)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0,1)"));
    }
    let amps = psi.amplitudes();
    let max_rounds = ((std::f64::consts::PI / (8.0 * eps)).log2().max(0.0) as usize) + 1;
    let (mut lo, mut hi) = (0.0f64, 0.25f64);
    let mut k = 0u64;
    let mut upper = true;
    let mut grover = 0u64;
    let mut calls = 0u64;
    let mut rounds = 0usize;
    let (mut ones, mut round_shots) = (0u64, 0u64);
    let mut prev_k = u64::MAX;
    let (mut a_lo, mut a_hi) = (0.0, 1.0);
    while (a_hi - a_lo) / 2.0 > eps {
        rounds += 1;
        if rounds > 4096 {
            return Err(Error::Estimation("amplitude estimation did not converge".into()));
        }
        let (nk, nu) = find_next_k(k, upper, lo, hi);
        k = nk;
        upper = nu;
        let p = good_probability(&grover_power(amps, good, k), good).clamp(0.0, 1.0);
        let hits = Binomial::new(shots, p).expect("probability in [0,1]").sample(rng);
        grover += shots * k;
        calls += shots * (2 * k + 1);
        if k == prev_k {
            ones += hits;
            round_shots += shots;
        } else {
            ones = hits;
            round_shots = shots;
        }
        prev_k = k;
        let f = ones as f64 / round_shots as f64;
        let half = ((2.0 * max_rounds as f64 / delta).ln() / (2.0 * round_shots as f64)).sqrt();
        let (pmin, pmax) = ((f - half).max(0.0), (f + half).min(1.0));
        let turn = |x: f64| (1.0 - 2.0 * x).clamp(-1.0, 1.0).acos() / (2.0 * std::f64::consts::PI);
        let (tmin, tmax) = if upper {
            (turn(pmin), turn(pmax))
        } else {
            (1.0 - turn(pmax), 1.0 - turn(pmin))
        };
        let scaling = (4 * k + 2) as f64;
        let new_hi = ((scaling * hi).floor() + tmax) / scaling;
        let new_lo = ((scaling * lo).floor() + tmin) / scaling;
        if !(new_lo <= new_hi) || new_lo.is_nan() {
            return Err(Error::Estimation("inconsistent amplitude interval".into()));
        }
        // Both intervals hold under the union bound; keep the intersection.
        lo = lo.max(new_lo);
        hi = hi.min(new_hi);
        if lo > hi {
            return Err(Error::Estimation("disjoint amplitude intervals".into()));
        }
        let amp = |t: f64| (2.0 * std::f64::consts::PI * t).sin().powi(2);
        a_lo = amp(lo).min(amp(hi));
        a_hi = amp(lo).max(amp(hi));
        if hi > 0.25 + 1e-12 || lo < -1e-12 {
            return Err(Error::Estimation("amplitude interval left [0, 1/4]".into()));
        }
    }
    Ok(IqaeResult {
        estimate: 0.5 * (a_lo + a_hi),
        interval: (a_lo, a_hi),
        grover_queries: grover,
        oracle_calls: calls,
        rounds,
        shots_per_round: shots,
        retried: false,
    })
}

/// `U|ψ⟩` for `U = D ⊗ O` with `D = ±1` on flag blocks (`+1` on `flag_block`
/// when `signed`, `+1` everywhere otherwise).
fn apply_block_unitary(psi: &StateVector, o: &CMat, flag_len: usize, flag_block: usize, signed: bool) -> StateVector {
    let sys = o.nrows();
    let mut out = vec![C64::new(0.0, 0.0); psi.dim()];
    for b in 0..(1usize << flag_len) {
        let sign = if !signed || b == flag_block { 1.0 } else { -1.0 };
        let x = linalg::CVec::from_column_slice(&psi.amplitudes()[b * sys..(b + 1) * sys]);
        let y = o * x;
        for (dst, v) in out[b * sys..(b + 1) * sys].iter_mut().zip(y.iter()) {
            *dst = v * sign;
        }
    }
    StateVector::from_raw(out)
}

/// `(|0⟩|ψ⟩ + |0⟩U|ψ⟩ + |1⟩|ψ⟩ − |1⟩U|ψ⟩)/2`; the ancilla reads 0 with
/// probability `(1 + Re⟨ψ|U|ψ⟩)/2`.
pub fn hadamard_test_state(psi: &StateVector, u_psi: &StateVector) -> StateVector {
    let mut out = Vec::with_capacity(2 * psi.dim());
    out.extend(psi.amplitudes().iter().zip(u_psi.amplitudes()).map(|(a, b)| (a + b) * 0.5));
    out.extend(psi.amplitudes().iter().zip(u_psi.amplitudes()).map(|(a, b)| (a - b) * 0.5));
    StateVector::from_raw(out)
}

/// `Re⟨ψ|U|ψ⟩` by IQAE on a Hadamard test.
pub fn hadamard_test_iqae(psi: &StateVector, u_psi: &StateVector, eps: f64, delta: f64, rng: &mut Rng) -> Result<IqaeResult> {
    let prepared = hadamard_test_state(psi, u_psi);
    let half = psi.dim();
    let mut r = iqae(&prepared, &|i| i < half, eps / 2.0, delta, rng)?;
    r.estimate = 2.0 * r.estimate - 1.0;
    r.interval = (2.0 * r.interval.0 - 1.0, 2.0 * r.interval.1 - 1.0);
    Ok(r)
}

/// Coherent estimate of `meas` on `psi`. The observable must be unitary
/// (`O² = I`); a flag is handled by writing `Π = (I + Z_Π)/2` and estimating
/// both unitary parts, each to `ε` with confidence `1 − δ/3`.
pub fn coherent_expectation(
    psi: &StateVector,
    meas: &Measurement,
    eps: f64,
    delta: f64,
    seed: u64,
    stream: u64,
) -> Result<IqaeResult> {
    let o = &meas.observable.matrix;
    let sq = o * o;
    if linalg::max_abs_diff(&sq, &linalg::identity(o.nrows())) > 1e-9 {
        return Err(invalid("observable", "coherent estimation needs O² = I"));
    }
    if psi.num_qubits() != meas.num_qubits() {
        return Err(Error::Dimension {
            expected: meas.num_qubits(),
            got: psi.num_qubits(),
        });
    }
    let mut rng = rng::stream(seed, stream);
    let k = meas.flag.len();
    if k == 0 {
        let u = apply_block_unitary(psi, o, 0, 0, false);
        return hadamard_test_iqae(psi, &u, eps, delta, &mut rng);
    }
    let block = meas.flag.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
    let d = delta / 3.0;
    let plain = hadamard_test_iqae(psi, &apply_block_unitary(psi, o, k, 0, false), eps, d, &mut rng)?;
    let signed = hadamard_test_iqae(psi, &apply_block_unitary(psi, o, k, block, true), eps, d, &mut rng)?;
    let num = 0.5 * (plain.estimate + signed.estimate);
    let mut out = IqaeResult {
        estimate: num,
        interval: (
            0.5 * (plain.interval.0 + signed.interval.0),
            0.5 * (plain.interval.1 + signed.interval.1),
        ),
        grover_queries: plain.grover_queries + signed.grover_queries,
        oracle_calls: plain.oracle_calls + signed.oracle_calls,
        rounds: plain.rounds + signed.rounds,
        shots_per_round: plain.shots_per_round,
        retried: plain.retried || signed.retried,
    };
    if meas.postselect {
        let id = CMat::identity(o.nrows(), o.nrows());
        let z = hadamard_test_iqae(psi, &apply_block_unitary(psi, &id, k, block, true), eps, d, &mut rng)?;
        let acc = 0.5 * (1.0 + z.estimate);
        if acc <= eps {
            return Err(Error::Estimation("flag probability below resolution".into()));
        }
        out.estimate = num / acc;
        out.interval = (out.estimate - 2.0 * eps / acc, out.estimate + 2.0 * eps / acc);
        out.grover_queries += z.grover_queries;
        out.oracle_calls += z.oracle_calls;
        out.rounds += z.rounds;
    }
    Ok(out)
}

/// Phases of the fixed-point search: `L = 2l + 1` oracle calls and
/// `l` pairs `(α_j, β_j)`.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointSchedule {
    pub length: usize,
    pub delta: f64,
    pub gamma: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Smallest odd `L ≥ ln(2/δ)/η` with `δ = √ε`, for amplitude `≥ η`.
pub fn fixed_point_length(eta: f64, eps: f64) -> Result<usize> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("eta", "must lie in (0,1]"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", "must lie in (0,1)"));
    }
    let l = ((2.0 / eps.sqrt()).ln() / eta).ceil().max(1.0) as usize;
    Ok(if l % 2 == 0 { l + 1 } else { l })
}

impl FixedPointSchedule {
    /// Phases for an odd length `L`, failure probability `ε = δ²`.
    pub fn new(length: usize, eps: f64) -> Result<Self> {
        if length % 2 == 0 {
            return Err(invalid("length", "must be odd"));
        }
        let delta = eps.sqrt();
        let lf = length as f64;
        let gamma = 1.0 / ((1.0 / delta).acosh() / lf).cosh();
        let l = (length - 1) / 2;
        let root = (1.0 - gamma * gamma).sqrt();
        let alpha: Vec<f64> = (1..=l)
            .map(|j| 2.0 * f64::atan2(1.0, (2.0 * std::f64::consts::PI * j as f64 / lf).tan() * root))
            .collect();
        let beta = (1..=l).map(|j| -alpha[l - j]).collect();
        Ok(Self {
            length,
            delta,
            gamma,
            alpha,
            beta,
        })
    }

    pub fn for_amplitude(eta: f64, eps: f64) -> Result<Self> {
        Self::new(fixed_point_length(eta, eps)?, eps)
    }

    pub fn iterations(&self) -> usize {
        self.alpha.len()
    }

    /// `1 − δ² T_L(T_{1/L}(1/δ)·√(1 − a²))²` for initial amplitude `a`.
    pub fn success_probability(&self, amplitude: f64) -> f64 {
        let lf = self.length as f64;
        let x = ((1.0 / self.delta).acosh() / lf).cosh() * (1.0 - amplitude * amplitude).max(0.0).sqrt();
        let t = chebyshev_t(self.length, x);
        1.0 - self.delta * self.delta * t * t
    }
}

/// `T_n(x)` for any real `x`.
pub fn chebyshev_t(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    if x.abs() <= 1.0 {
        (nf * x.acos()).cos()
    } else if x > 1.0 {
        (nf * x.acosh()).cosh()
    } else {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        s * (nf * (-x).acosh()).cosh()
    }
}

/// `exp(iβ|flag⟩⟨flag| ⊗ I)` on the leading qubits.
pub fn flag_phase(flag: &[bool], angle: f64) -> Gate {
    let k = flag.len();
    let dim = 1usize << k;
    let block = flag.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
    let mut m = CMat::identity(dim, dim);
    m[(block, block)] = cis(angle);
    Gate::Unitary {
        support: (0..k).collect(),
        matrix: Arc::new(m),
    }
}

/// Fixed-point amplitude amplification of the flagged part of `W|start⟩`.
///
/// Application order: `W`, then for each `j`: target phase `β_j`, `W†`,
/// `exp(−iα_j|start⟩⟨start|)`, `W`.
pub fn fixed_point_amplify(
    w: &InterleavedCircuit,
    start: &StateVector,
    flag: &[bool],
    schedule: &FixedPointSchedule,
) -> Result<InterleavedCircuit> {
    if start.num_qubits() != w.num_qubits() {
        return Err(Error::Dimension {
            expected: w.num_qubits(),
            got: start.num_qubits(),
        });
    }
    if flag.is_empty() || flag.len() > w.num_qubits() {
        return Err(invalid("flag", "needs between 1 and n leading qubits"));
    }
    let inv = w.inverse();
    let vector = Arc::new(start.amplitudes().to_vec());
    let mut out = w.clone();
    for (a, b) in schedule.alpha.iter().zip(&schedule.beta) {
        out.push_gate(flag_phase(flag, *b));
        out.append(&inv)?;
        out.push_gate(Gate::ProjectorPhase {
            vector: vector.clone(),
            angle: -a,
        });
        out.append(w)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::U2Rotation;
    use crate::hamiltonian::HamiltonianSum;
    use crate::state::Observable;

    #[test]
    fn hoeffding_example() {
        assert_eq!(hoeffding_shots(0.1, 1.0, 1.0, 1, 1.0 / 3.0).unwrap(), 2313);
        assert!(hoeffding_shots(0.0, 1.0, 1.0, 1, 0.3).is_err());
        assert_eq!(hoeffding_shots(0.1, 1.0, 7.5, 1, 1.0 / 3.0).unwrap(), 2313);
    }

    #[test]
    fn plan_uses_hoeffding() {
        let p = EstimationPlan::new(EstimationMode::Shots { shots: None, seed: 1 }, 1, 1.0, 0.1, 1.0 / 3.0).unwrap();
        assert_eq!(p.shots_per_node, 2313);
        assert_eq!(p.total_shots(), 2313);
    }

    /// Qubit 0 in `cos θ|0⟩ + sin θ|1⟩`, qubit 1 in `|+⟩`; good = qubit 0 set.
    fn engineered(a: f64) -> StateVector {
        let mut s = StateVector::zero(2);
        let theta = a.sqrt().asin();
        s.apply_u2(0, U2Rotation::new(theta, 0.0, 0.0)).unwrap();
        Gate::hadamard(1).apply(s.amplitudes_mut(), 2);
        s
    }

    #[test]
    fn grover_power_rotates() {
        let s = engineered(0.1);
        let good = |i: usize| i >= 2;
        let th = 0.1f64.sqrt().asin();
        for k in 0..5 {
            let p = good_probability(&grover_power(s.amplitudes(), &good, k), &good);
            assert!((p - ((2 * k + 1) as f64 * th).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn iqae_engineered_quarter() {
        let s = engineered(0.25);
        let r = iqae(&s, &|i| i >= 2, 1e-2, 0.05, &mut rng::stream(3, 0)).unwrap();
        assert!((r.estimate - 0.25).abs() <= 1e-2, "{r:?}");
        assert!(r.interval.0 <= 0.25 + 1e-12 && 0.25 <= r.interval.1 + 1e-12);
        assert!((r.oracle_calls as f64) <= iqae_call_bound(1e-2, 0.05));
    }

    #[test]
    fn hadamard_test_reads_real_part() {
        let psi = engineered(0.3);
        let o = Observable::pauli("XZ").unwrap();
        let m = Measurement::plain(o.clone());
        let want = psi.expectation(&o).unwrap();
        let r = coherent_expectation(&psi, &m, 0.02, 0.05, 11, 0).unwrap();
        assert!((r.estimate - want).abs() <= 0.02, "{} vs {want}", r.estimate);
        let h = hadamard_test_state(&psi, &apply_block_unitary(&psi, &o.matrix, 0, 0, false));
        let a: f64 = h.amplitudes()[..4].iter().map(|z| z.norm_sqr()).sum();
        assert!((a - (1.0 + want) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_flagged_matches_exact() {
        let mut psi = StateVector::zero(2);
        psi.apply_u2(0, U2Rotation::new(0.7, 0.3, 0.0)).unwrap();
        psi.apply_u2(1, U2Rotation::new(0.4, -0.2, 0.5)).unwrap();
        let m = Measurement::flagged(vec![false], Observable::pauli("Z").unwrap(), false);
        let want = m.exact(&psi).unwrap().value;
        let r = coherent_expectation(&psi, &m, 0.02, 0.05, 5, 1).unwrap();
        assert!((r.estimate - want).abs() <= 0.02);
        let not_unitary = Measurement::plain(Observable::from_dense(linalg::bit_projector(false)).unwrap());
        assert!(coherent_expectation(&StateVector::zero(1), &not_unitary, 0.02, 0.05, 5, 1).is_err());
    }

    #[test]
    fn yoder_length_and_probability() {
        let s = FixedPointSchedule::for_amplitude(0.4, 1e-2).unwrap();
        assert_eq!(s.length, 9);
        assert_eq!(s.iterations(), 4);
        assert!((s.success_probability(0.5) - 0.9933).abs() < 1e-3);
        for i in 0..50 {
            let a = 0.4 + 0.6 * i as f64 / 49.0;
            assert!(s.success_probability(a) >= 1.0 - 1e-2 - 1e-12);
        }
        let half = FixedPointSchedule::new(5, 1e-2).unwrap();
        assert!(half.success_probability(0.5) < 0.99);
    }

    #[test]
    fn chebyshev_matches_recurrence() {
        for &x in &[-1.7, -0.3, 0.0, 0.5, 1.0, 1.3] {
            let (mut t0, mut t1) = (1.0, x);
            for n in 2..9 {
                let t2 = 2.0 * x * t1 - t0;
                assert!((chebyshev_t(n, x) - t2).abs() < 1e-9 * t2.abs().max(1.0));
                t0 = t1;
                t1 = t2;
            }
        }
    }

    /// Simulated amplification agrees with the analytic success curve.
    #[test]
    fn fixed_point_circuit_matches_analytic() {
        for &a in &[0.4f64, 0.5, 0.7, 0.95] {
            let theta = a.asin();
            let mut w = InterleavedCircuit::new(2);
            // |1⟩ flags success, so flip it to |0⟩ afterwards: flag pattern [false].
            w.push_gate(Gate::u2(0, U2Rotation::new(theta, 0.0, 0.0)));
            w.push_evolution(Arc::new(HamiltonianSum::from_paulis(&[("XY", 0.3), ("ZZ", 0.8)]).unwrap()), 1)
                .unwrap();
            w.push_gate(Gate::x(0));
            let start = StateVector::zero(2);
            let before = Measurement::flagged(vec![false], Observable::identity(1), false);
            let a0 = crate::interleaved::exact_expectation(&w, &start, &before).unwrap().value.sqrt();
            let sched = FixedPointSchedule::for_amplitude(0.35, 1e-2).unwrap();
            let amp = fixed_point_amplify(&w, &start, &[false], &sched).unwrap();
            let p = crate::interleaved::exact_expectation(&amp, &start, &before).unwrap().value;
            assert!((p - sched.success_probability(a0)).abs() < 1e-9, "a={a} p={p}");
            if a0 >= 0.35 {
                assert!(p >= 0.99 - 1e-12);
            }
        }
    }

    #[test]
    fn iqae_zero_amplitude() {
        let s = StateVector::zero(2);
        let r = iqae(&s, &|i| i >= 2, 1e-2, 0.05, &mut rng::stream(8, 0)).unwrap();
        assert!(r.estimate <= 1e-2, "{r:?}");
    }

    fn three_qubit_w(amplitude: f64) -> InterleavedCircuit {
        let mut w = InterleavedCircuit::new(3);
        w.push_gate(Gate::u2(0, U2Rotation::new(amplitude.asin(), 0.0, 0.0)));
        w.push_gate(Gate::hadamard(2));
        w.push_evolution(
            Arc::new(HamiltonianSum::from_paulis(&[("IXY", 0.4), ("IZZ", -0.6), ("IYI", 0.3)]).unwrap()),
            1,
        )
        .unwrap();
        w
    }

    #[test]
    fn amplification_examples() {
        let start = StateVector::zero(3);
        let meas = Measurement::flagged(vec![true], Observable::identity(2), false);
        let sched = FixedPointSchedule::for_amplitude(0.4, 1e-2).unwrap();
        let p = crate::interleaved::exact_expectation(&fixed_point_amplify(&three_qubit_w(0.5), &start, &[true], &sched).unwrap(), &start, &meas)
            .unwrap()
            .value;
        assert!(p >= 0.98, "{p}");
        let q = crate::interleaved::exact_expectation(&fixed_point_amplify(&three_qubit_w(1.0), &start, &[true], &sched).unwrap(), &start, &meas)
            .unwrap()
            .value;
        assert!(q >= 1.0 - 1e-2, "{q}");
        let half = FixedPointSchedule::new(5, 1e-2).unwrap();
        let h = crate::interleaved::exact_expectation(&fixed_point_amplify(&three_qubit_w(0.5), &start, &[true], &half).unwrap(), &start, &meas)
            .unwrap()
            .value;
        assert!(h < 1.0 - 1e-2, "{h}");
    }
}
