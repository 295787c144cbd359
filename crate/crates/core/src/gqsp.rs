//! Generalized quantum signal processing with Hamiltonian-evolution queries.
//!
//! A Laurent polynomial `P(z) = Σ_{k=−d}^{d} p_k z^k` bounded by 1 on the unit
//! circle is realized as the `⟨0|·|0⟩` block of a circuit on one ancilla plus
//! the system, using `d` queries to `e^{i|0⟩⟨0|⊗H}` and `d` queries to
//! `e^{−i|1⟩⟨1|⊗H}`, so the block equals `P(e^{iH})`.

use std::sync::Arc;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{Gate, U2Rotation};
use crate::hamiltonian::HamiltonianSum;
use crate::interleaved::InterleavedCircuit;
use crate::linalg::{self, c, cis, CMat};
use crate::C64;

/// Safety factor applied before completion so `1 − |P|²` stays positive.
pub const COMPLETION_SHRINK: f64 = 1.0 - 1e-6;

/// Largest acceptable layer-stripping residual.
pub const SYNTHESIS_TOL: f64 = 1e-6;

/// `Σ_{k=−d}^{d} coeffs[k + d] z^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentPolynomial {
    pub d: usize,
    pub coeffs: Vec<C64>,
}

impl LaurentPolynomial {
    pub fn new(d: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * d + 1 {
            return Err(Error::Dimension {
                expected: 2 * d + 1,
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("coeffs", "non-finite coefficient"));
        }
        Ok(Self { d, coeffs })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            d,
            coeffs: vec![c(0.0, 0.0); 2 * d + 1],
        }
    }

    pub fn constant(v: C64) -> Self {
        Self { d: 0, coeffs: vec![v] }
    }

    /// Coefficient of `z^k`, zero outside `[−d, d]`.
    pub fn coeff(&self, k: i64) -> C64 {
        let idx = k + self.d as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            c(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn coeff_mut(&mut self, k: i64) -> &mut C64 {
        let idx = (k + self.d as i64) as usize;
        &mut self.coeffs[idx]
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = c(0.0, 0.0);
        for a in self.coeffs.iter().rev() {
            acc = acc * z + a;
        }
        acc * z.powi(-(self.d as i32))
    }

    /// `P(e^{ix})`.
    pub fn eval_angle(&self, x: f64) -> C64 {
        self.eval(cis(x))
    }

    /// Same polynomial with degree bound raised to `d ≥ self.d`.
    pub fn padded(&self, d: usize) -> Self {
        let d = d.max(self.d);
        let mut out = Self::zero(d);
        for k in -(self.d as i64)..=self.d as i64 {
            *out.coeff_mut(k) = self.coeff(k);
        }
        out
    }

    /// Drop trailing zero coefficients symmetrically.
    pub fn trimmed(&self, tol: f64) -> Self {
        let mut d = self.d;
        while d > 0 && self.coeff(d as i64).norm() <= tol && self.coeff(-(d as i64)).norm() <= tol {
            d -= 1;
        }
        let mut out = Self::zero(d);
        for k in -(d as i64)..=d as i64 {
            *out.coeff_mut(k) = self.coeff(k);
        }
        out
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            d: self.d,
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.d.max(other.d);
        let mut out = self.padded(d);
        for k in -(other.d as i64)..=other.d as i64 {
            *out.coeff_mut(k) += other.coeff(k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.d + other.d);
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }

    /// `P(z^{−1})`.
    pub fn reflected(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { d: self.d, coeffs }
    }

    /// `z^d P(z)` as an ordinary polynomial (ascending coefficients).
    pub fn shifted(&self) -> Vec<C64> {
        self.coeffs.clone()
    }

    /// `max |P(e^{ix})|` over `n` equispaced angles.
    pub fn sup_circle(&self, n: usize) -> f64 {
        circle_values(&self.coeffs, n.max(2 * self.coeffs.len()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `P(e^{iH})` through the eigensystem of a dense Hermitian `H`.
    pub fn apply_hermitian(&self, h: &CMat) -> Result<CMat> {
        linalg::hermitian_function(h, |x| self.eval_angle(x))
    }
}

/// `Σ_j a_j ω^{jk}` for `ω = e^{2πi/n}`, `k = 0..n`.
fn circle_values(coeffs: &[C64], n: usize) -> Vec<C64> {
    let mut buf = vec![c(0.0, 0.0); n];
    for (j, a) in coeffs.iter().enumerate() {
        buf[j % n] += a;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// `(1/n) Σ_k v_k ω^{−jk}`.
fn circle_coefficients(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletionMethod {
    /// Roots of `z^D(1 − |P̃|²)` inside the disk.
    Roots,
    /// Minimum-phase factor from the cepstrum of `log(1 − |P̃|²)`.
    Cepstral,
    /// Constant polynomial.
    Trivial,
}

/// `max_x | |P̃|² + |Q̃|² − 1 |` on a grid.
pub fn completion_defect(p: &[C64], q: &[C64], n: usize) -> f64 {
    let pv = circle_values(p, n);
    let qv = circle_values(q, n);
    pv.iter()
        .zip(&qv)
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

const COMPLETION_TOL: f64 = 1e-9;

/// Accepted completion defect when no method reaches `COMPLETION_TOL`.
const COMPLETION_ACCEPT: f64 = 1e-8;

/// `Q` with the same degree bound and `|P|² + |Q|² = 1` on the circle.
pub fn complete(p: &LaurentPolynomial) -> Result<LaurentPolynomial> {
    let sup = p.sup_circle(8192);
    if sup > 1.0 + 1e-9 {
        return Err(Error::Completion(format!("sup |P| = {sup} exceeds 1")));
    }
    let (q, _) = complete_shifted(&p.shifted())?;
    LaurentPolynomial::new(p.d, q)
}

/// Polynomial `Q̃` of the same degree with `|P̃|² + |Q̃|² = 1` on the circle.
pub fn complete_shifted(p: &[C64]) -> Result<(Vec<C64>, CompletionMethod)> {
    let deg = p.len() - 1;
    if deg == 0 {
        let q = (1.0 - p[0].norm_sqr()).max(0.0).sqrt();
        return Ok((vec![c(q, 0.0)], CompletionMethod::Trivial));
    }
    let grid = (16 * (deg + 1)).next_power_of_two().max(1024);
    let mut best: Option<(Vec<C64>, CompletionMethod, f64)> = None;
    let order: [CompletionMethod; 2] = if deg <= 24 {
        [CompletionMethod::Roots, CompletionMethod::Cepstral]
    } else {
        [CompletionMethod::Cepstral, CompletionMethod::Roots]
    };
    for method in order {
        let q = match method {
            CompletionMethod::Roots if deg <= 96 => complete_roots(p),
            CompletionMethod::Cepstral => complete_cepstral(p),
            _ => continue,
        };
        if let Ok(q) = q {
            let defect = completion_defect(p, &q, grid);
            if defect <= COMPLETION_TOL {
                return Ok((q, method));
            }
            if best.as_ref().is_none_or(|b| defect < b.2) {
                best = Some((q, method, defect));
            }
        }
    }
    match best {
        Some((q, method, defect)) if defect <= COMPLETION_ACCEPT => Ok((q, method)),
        Some((_, _, defect)) => Err(Error::Completion(format!("best defect {defect:.3e}"))),
        None => Err(Error::Completion("no method produced a completion".into())),
    }
}

fn complete_cepstral(p: &[C64]) -> Result<Vec<C64>> {
    let deg = p.len() - 1;
    let mut last = Err(Error::Completion("not attempted".into()));
    for n in [1usize << 16, 1 << 18, 1 << 20] {
        let n = n.max((256 * (deg + 1)).next_power_of_two());
        let pv = circle_values(p, n);
        let mut logf = Vec::with_capacity(n);
        for z in &pv {
            let f = 1.0 - z.norm_sqr();
            if f <= 0.0 {
                return Err(Error::Completion("|P| reaches 1 on the circle".into()));
            }
            logf.push(c(f.ln(), 0.0));
        }
        let cep = circle_coefficients(&logf);
        let mut half = vec![c(0.0, 0.0); n];
        half[0] = cep[0] * 0.5;
        half[1..n / 2].copy_from_slice(&cep[1..n / 2]);
        let logq = circle_values(&half, n);
        let qv: Vec<C64> = logq.iter().map(|z| z.exp()).collect();
        let q: Vec<C64> = circle_coefficients(&qv)[..=deg].to_vec();
        let defect = completion_defect(p, &q, (16 * (deg + 1)).next_power_of_two().max(1024));
        if defect <= COMPLETION_TOL {
            return Ok(q);
        }
        last = Ok(q);
    }
    last
}

fn eval_poly(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * z + a)
}

/// Simultaneous Aberth–Ehrlich iteration for all roots.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let mut hi = coeffs.len() - 1;
    while hi > 0 && coeffs[hi].norm() == 0.0 {
        hi -= 1;
    }
    if hi == 0 {
        return Ok(vec![]);
    }
    let lead = coeffs[hi];
    let a: Vec<C64> = coeffs[..=hi].iter().map(|x| x / lead).collect();
    let da: Vec<C64> = (1..=hi).map(|j| a[j] * j as f64).collect();
    let mut z: Vec<C64> = (0..hi)
        .map(|k| cis(2.0 * std::f64::consts::PI * k as f64 / hi as f64 + 0.4) * 1.0)
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for k in 0..hi {
            let pz = eval_poly(&a, z[k]);
            let dz = eval_poly(&da, z[k]);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / dz;
            let s: C64 = (0..hi).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            return Ok(z);
        }
    }
    Ok(z)
}

fn complete_roots(p: &[C64]) -> Result<Vec<C64>> {
    let deg = p.len() - 1;
    // z^D (1 − P̃(z) conj(P̃)(1/z)) has coefficients g[D + a − b].
    let mut g = vec![c(0.0, 0.0); 2 * deg + 1];
    g[deg] = c(1.0, 0.0);
    for (a, pa) in p.iter().enumerate() {
        for (b, pb) in p.iter().enumerate() {
            g[deg + a - b] -= pa * pb.conj();
        }
    }
    let gmax = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if gmax <= 1e-13 {
        // |P̃| ≡ 1 on the circle.
        return Ok(vec![c(0.0, 0.0); deg + 1]);
    }
    let tol = 1e-14 * gmax;
    let lo = g.iter().position(|z| z.norm() > tol).unwrap_or(0);
    let hi = g.iter().rposition(|z| z.norm() > tol).unwrap_or(0);
    let finite = polynomial_roots(&g[lo..=hi])?;
    let mut inside = vec![c(0.0, 0.0); lo];
    let mut near = vec![];
    for r in finite {
        let m = r.norm();
        if m < 1.0 - 1e-6 {
            inside.push(r);
        } else if m <= 1.0 + 1e-6 {
            near.push(r);
        }
    }
    // Roots on the circle are double; average each close pair.
    while let Some(r) = near.pop() {
        let (j, _) = near
            .iter()
            .enumerate()
            .map(|(j, x)| (j, (x - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Completion("unpaired root on the unit circle".into()))?;
        let partner = near.swap_remove(j);
        let mid = (r + partner) * 0.5;
        inside.push(mid / mid.norm());
    }
    if inside.len() != deg {
        return Err(Error::Completion(format!(
            "expected {deg} roots in the closed disk, found {}",
            inside.len()
        )));
    }
    let mut q = vec![c(1.0, 0.0)];
    for r in &inside {
        let mut next = vec![c(0.0, 0.0); q.len() + 1];
        for (j, a) in q.iter().enumerate() {
            next[j + 1] += a;
            next[j] -= a * r;
        }
        q = next;
    }
    let n = 64usize.max(4 * deg);
    let pv = circle_values(p, n);
    let qv = circle_values(&q, n);
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in pv.iter().zip(&qv) {
        num += 1.0 - a.norm_sqr();
        den += b.norm_sqr();
    }
    let k = (num / den).sqrt();
    Ok(q.into_iter().map(|a| a * k).collect())
}

/// Rotation angles: `R(θ_0, φ_0, λ)` then `R(θ_j, φ_j, 0)` after each query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GqspAngles {
    pub d: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub lambda: f64,
    /// The realized block is `scale · P`.
    pub scale: f64,
    pub completion: CompletionMethod,
    pub max_residual: f64,
}

impl GqspAngles {
    pub fn query_count(&self) -> usize {
        2 * self.d
    }

    /// `(⟨0|·|0⟩, ⟨1|·|0⟩)` of the circuit for a scalar eigenphase `z`.
    pub fn eval(&self, z: C64) -> (C64, C64) {
        let r0 = U2Rotation::new(self.theta[0], self.phi[0], self.lambda).matrix();
        let (mut top, mut bot) = (r0[0][0], r0[1][0]);
        let zi = z.inv();
        for j in 1..=2 * self.d {
            if j <= self.d {
                top *= z;
            } else {
                bot *= zi;
            }
            let r = U2Rotation::new(self.theta[j], self.phi[j], 0.0).matrix();
            let (t, b) = (r[0][0] * top + r[0][1] * bot, r[1][0] * top + r[1][1] * bot);
            top = t;
            bot = b;
        }
        (top, bot)
    }

    /// Largest deviation of the realized block from `scale · P` on a grid.
    pub fn block_error(&self, p: &LaurentPolynomial, n: usize) -> f64 {
        (0..n)
            .map(|k| {
                let x = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                (self.eval(cis(x)).0 - p.eval_angle(x) * self.scale).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Angles realizing `P`. When completion or stripping is singular at the
/// boundary `|P| = 1`, `P` is first shrunk by `COMPLETION_SHRINK` and the
/// realized block is `scale · P`.
pub fn synthesize_angles(p: &LaurentPolynomial) -> Result<GqspAngles> {
    let sup = p.sup_circle(8192);
    if sup > 1.0 + 1e-9 {
        return Err(invalid("polynomial", format!("sup |P| = {sup} exceeds 1")));
    }
    let attempt = |scale: f64| -> Result<GqspAngles> {
        let pt: Vec<C64> = p.shifted().iter().map(|a| a * scale).collect();
        let (qt, completion) = complete_shifted(&pt)?;
        let (theta, phi, lambda, max_residual) = strip_layers(pt, qt)?;
        Ok(GqspAngles {
            d: p.d,
            theta,
            phi,
            lambda,
            scale,
            completion,
            max_residual,
        })
    };
    match attempt(1.0) {
        Ok(a) if a.max_residual <= 1e-9 => Ok(a),
        first => match attempt(COMPLETION_SHRINK) {
            Ok(a) => Ok(a),
            Err(e) => first.map_err(|_| e),
        },
    }
}

/// `Σ_j a_j z^j`, for `|z| = 1` only.
pub fn eval_circle(p: &LaurentPolynomial, z: C64) -> Result<C64> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid("z", format!("|z| = {} is off the unit circle", z.norm())));
    }
    Ok(p.eval(z))
}

/// Peel layers `R_D … R_1` off `(P̃, Q̃)` and read `R_0` from the constants.
fn strip_layers(mut top: Vec<C64>, mut bot: Vec<C64>) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
    let big_d = top.len() - 1;
    let mut theta = vec![0.0; big_d + 1];
    let mut phi = vec![0.0; big_d + 1];
    let mut max_res = 0.0f64;
    let scale_ref = 1.0;
    for j in (1..=big_d).rev() {
        let len = j + 1;
        let (pd, qd) = (top[len - 1], bot[len - 1]);
        let (p0, q0) = (top[0], bot[0]);
        // Degree condition e^{−iφ}s·p_D = c·q_D, constant condition
        // e^{−iφ}c·p_0 = −s·q_0; use whichever pair is better conditioned.
        let (th, ph) = if pd.norm_sqr() + qd.norm_sqr() >= p0.norm_sqr() + q0.norm_sqr() {
            (qd.norm().atan2(pd.norm()), pd.arg() - qd.arg())
        } else {
            (p0.norm().atan2(q0.norm()), (-p0).arg() - q0.arg())
        };
        theta[j] = th;
        phi[j] = ph;
        let (s, co) = th.sin_cos();
        let e = cis(-ph);
        let mut nt = vec![c(0.0, 0.0); len];
        let mut nb = vec![c(0.0, 0.0); len];
        for i in 0..len {
            nt[i] = e * co * top[i] + bot[i] * s;
            nb[i] = e * s * top[i] - bot[i] * co;
        }
        let res = nt[0].norm().max(nb[len - 1].norm()) / scale_ref;
        max_res = max_res.max(res);
        if res > SYNTHESIS_TOL {
            return Err(Error::Synthesis { layer: j, residual: res });
        }
        top = nt[1..].to_vec();
        bot = nb[..len - 1].to_vec();
    }
    let (p, q) = (top[0], bot[0]);
    let norm = (p.norm_sqr() + q.norm_sqr()).sqrt();
    let res = (norm - 1.0).abs();
    max_res = max_res.max(res);
    if res > SYNTHESIS_TOL {
        return Err(Error::Synthesis { layer: 0, residual: res });
    }
    theta[0] = q.norm().atan2(p.norm());
    let lambda = q.arg();
    phi[0] = p.arg() - lambda;
    Ok((theta, phi, lambda, max_res))
}

/// Circuit on `n + 1` qubits (ancilla first) whose `⟨0|·|0⟩` block is
/// `scale · P(e^{iH})`.
pub fn build_circuit(angles: &GqspAngles, h: &HamiltonianSum) -> Result<InterleavedCircuit> {
    if angles.theta.len() != 2 * angles.d + 1 || angles.phi.len() != 2 * angles.d + 1 {
        return Err(invalid("angles", "length must be 2d + 1"));
    }
    let n = h.num_qubits() + 1;
    let c0 = Arc::new(h.controlled(false));
    let c1 = Arc::new(h.controlled(true));
    let mut out = InterleavedCircuit::new(n);
    out.push_gate(Gate::u2(0, U2Rotation::new(angles.theta[0], angles.phi[0], angles.lambda)));
    for j in 1..=2 * angles.d {
        if j <= angles.d {
            out.push_evolution(c0.clone(), 1)?;
        } else {
            out.push_evolution(c1.clone(), -1)?;
        }
        out.push_gate(Gate::u2(0, U2Rotation::new(angles.theta[j], angles.phi[j], 0.0)));
    }
    Ok(out)
}

/// Dense GQSP matrix for a unitary `U`, ancilla first.
pub fn dense_gqsp(angles: &GqspAngles, u: &CMat) -> CMat {
    let dim = u.nrows();
    let id = CMat::identity(dim, dim);
    let rot = |r: U2Rotation| {
        let m = r.matrix();
        let mut out = CMat::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = m[i][j];
            }
        }
        linalg::kron(&out, &id)
    };
    let block_diag = |a: &CMat, b: &CMat| {
        let mut out = CMat::zeros(2 * dim, 2 * dim);
        out.view_mut((0, 0), (dim, dim)).copy_from(a);
        out.view_mut((dim, dim), (dim, dim)).copy_from(b);
        out
    };
    let c0 = block_diag(u, &id);
    let c1 = block_diag(&id, &u.adjoint());
    let mut w = rot(U2Rotation::new(angles.theta[0], angles.phi[0], angles.lambda));
    for j in 1..=2 * angles.d {
        let q = if j <= angles.d { &c0 } else { &c1 };
        w = rot(U2Rotation::new(angles.theta[j], angles.phi[j], 0.0)) * q * w;
    }
    w
}

/// `P(U) = Σ_k p_k U^k` for a dense unitary.
pub fn polynomial_of_unitary(p: &LaurentPolynomial, u: &CMat) -> CMat {
    let dim = u.nrows();
    let mut out = CMat::zeros(dim, dim);
    let mut pos = CMat::identity(dim, dim);
    let mut neg = CMat::identity(dim, dim);
    let ui = u.adjoint();
    out += &pos * p.coeff(0);
    for k in 1..=p.d as i64 {
        pos = &pos * u;
        neg = &neg * &ui;
        out += &pos * p.coeff(k) + &neg * p.coeff(-k);
    }
    out
}

/// `‖(⟨0|⊗I) W (|0⟩⊗I) − P(U)‖` (spectral norm) for a dense unitary `U`.
pub fn verify_block(angles: &GqspAngles, u: &CMat, p: &LaurentPolynomial) -> f64 {
    let dim = u.nrows();
    let w = dense_gqsp(angles, u);
    let block = w.view((0, 0), (dim, dim)).into_owned();
    linalg::spectral_norm(&(block - polynomial_of_unitary(p, u)))
}

/// Same as `verify_block` with `U = e^{iH}`, simulating the built
/// interleaved circuit with exact evolutions.
pub fn verify_block_hamiltonian(angles: &GqspAngles, h: &HamiltonianSum, p: &LaurentPolynomial) -> Result<f64> {
    let w = build_circuit(angles, h)?.dense_exact()?;
    let dim = 1usize << h.num_qubits();
    let block = w.view((0, 0), (dim, dim)).into_owned();
    let want = p.apply_hermitian(&h.to_dense())?;
    Ok(linalg::spectral_norm(&(block - want)))
}
