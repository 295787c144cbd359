//! Hermitian terms, Hamiltonian sums and the norm quantities that configure
//! Trotter step sizes.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, cis, CMat, HERMITIAN_TOL};
use crate::pauli::{i_pow, PauliString};
use crate::C64;

/// Dense Hermitian block on an ordered qubit subset, with its eigensystem
/// cached so exponentials cost one small matrix product.
#[derive(Debug, Clone)]
pub struct DenseBlock {
    pub n: usize,
    pub support: Vec<usize>,
    pub block: CMat,
    eigvals: Vec<f64>,
    eigvecs: CMat,
}

/// `V B V†` with orthonormal columns `V` (dim × r) and Hermitian `B` (r × r).
#[derive(Debug, Clone)]
pub struct LowRank {
    pub vectors: CMat,
    pub block: CMat,
    eigvals: Vec<f64>,
    eigvecs: CMat,
}

#[derive(Debug, Clone)]
pub enum HermitianTerm {
    Pauli { word: PauliString, coeff: f64 },
    Dense(Arc<DenseBlock>),
    LowRank(Arc<LowRank>),
    /// `|v⟩⟨v| ⊗ inner` with the control prepended as the new qubit 0.
    Controlled { value: bool, inner: Box<HermitianTerm> },
    /// `I_{2^k} ⊗ inner` with `k` idle qubits prepended.
    Idle { k: usize, inner: Box<HermitianTerm> },
}

impl HermitianTerm {
    pub fn pauli(word: PauliString, coeff: f64) -> Self {
        HermitianTerm::Pauli { word, coeff }
    }

    pub fn dense(n: usize, support: Vec<usize>, block: CMat) -> Result<Self> {
        let k = support.len();
        if block.nrows() != 1 << k || block.ncols() != 1 << k {
            return Err(Error::Dimension {
                expected: 1 << k,
                got: block.nrows(),
            });
        }
        if support.iter().any(|&q| q >= n) {
            return Err(invalid("support", format!("qubit outside 0..{n}")));
        }
        let mut seen = support.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != k {
            return Err(invalid("support", "repeated qubit"));
        }
        if !linalg::is_hermitian(&block, HERMITIAN_TOL) {
            return Err(invalid("matrix", "block is not Hermitian within 1e-12"));
        }
        let (eigvals, eigvecs) = linalg::eigh(&block)?;
        Ok(HermitianTerm::Dense(Arc::new(DenseBlock {
            n,
            support,
            block,
            eigvals,
            eigvecs,
        })))
    }

    /// `V B V†`; columns of `vectors` must be orthonormal.
    pub fn low_rank(vectors: CMat, block: CMat) -> Result<Self> {
        let r = vectors.ncols();
        if block.nrows() != r || block.ncols() != r {
            return Err(Error::Dimension {
                expected: r,
                got: block.nrows(),
            });
        }
        if !vectors.nrows().is_power_of_two() {
            return Err(invalid("vectors", "row count is not a power of two"));
        }
        let gram = vectors.adjoint() * &vectors;
        if linalg::max_abs_diff(&gram, &linalg::identity(r)) > 1e-10 {
            return Err(invalid("vectors", "columns are not orthonormal"));
        }
        if !linalg::is_hermitian(&block, HERMITIAN_TOL) {
            return Err(invalid("block", "not Hermitian within 1e-12"));
        }
        let (eigvals, eigvecs) = linalg::eigh(&block)?;
        Ok(HermitianTerm::LowRank(Arc::new(LowRank {
            vectors,
            block,
            eigvals,
            eigvecs,
        })))
    }

    /// `c (|a⟩⟨b| + |b⟩⟨a|)` for orthogonal unit vectors `a`, `b`.
    pub fn coupling(a: &[C64], b: &[C64], coeff: f64) -> Result<Self> {
        let dim = a.len();
        let mut v = CMat::zeros(dim, 2);
        for k in 0..dim {
            v[(k, 0)] = a[k];
            v[(k, 1)] = b[k];
        }
        let mut blk = CMat::zeros(2, 2);
        blk[(0, 1)] = c(coeff, 0.0);
        blk[(1, 0)] = c(coeff, 0.0);
        Self::low_rank(v, blk)
    }

    pub fn controlled(self, value: bool) -> Self {
        HermitianTerm::Controlled {
            value,
            inner: Box::new(self),
        }
    }

    pub fn idle_prefix(self, k: usize) -> Self {
        if k == 0 {
            return self;
        }
        HermitianTerm::Idle {
            k,
            inner: Box::new(self),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            HermitianTerm::Idle { k, inner } => inner.num_qubits() + k,
            HermitianTerm::Pauli { word, .. } => word.len(),
            HermitianTerm::Dense(d) => d.n,
            HermitianTerm::LowRank(l) => l.vectors.nrows().trailing_zeros() as usize,
            HermitianTerm::Controlled { inner, .. } => inner.num_qubits() + 1,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            HermitianTerm::Pauli { word, coeff } => HermitianTerm::Pauli {
                word: word.clone(),
                coeff: coeff * s,
            },
            HermitianTerm::Dense(d) => HermitianTerm::Dense(Arc::new(DenseBlock {
                n: d.n,
                support: d.support.clone(),
                block: &d.block * c(s, 0.0),
                eigvals: d.eigvals.iter().map(|x| x * s).collect(),
                eigvecs: d.eigvecs.clone(),
            })),
            HermitianTerm::LowRank(l) => HermitianTerm::LowRank(Arc::new(LowRank {
                vectors: l.vectors.clone(),
                block: &l.block * c(s, 0.0),
                eigvals: l.eigvals.iter().map(|x| x * s).collect(),
                eigvecs: l.eigvecs.clone(),
            })),
            HermitianTerm::Controlled { value, inner } => HermitianTerm::Controlled {
                value: *value,
                inner: Box::new(inner.scaled(s)),
            },
            HermitianTerm::Idle { k, inner } => HermitianTerm::Idle {
                k: *k,
                inner: Box::new(inner.scaled(s)),
            },
        }
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        match self {
            HermitianTerm::Pauli { coeff, .. } => coeff.abs(),
            HermitianTerm::Dense(d) => d.eigvals.iter().fold(0.0, |a: f64, x| a.max(x.abs())),
            HermitianTerm::LowRank(l) => l.eigvals.iter().fold(0.0, |a: f64, x| a.max(x.abs())),
            HermitianTerm::Controlled { inner, .. } | HermitianTerm::Idle { inner, .. } => {
                inner.norm()
            }
        }
    }

    pub fn to_dense(&self) -> CMat {
        match self {
            HermitianTerm::Pauli { word, coeff } => word.to_dense() * c(*coeff, 0.0),
            HermitianTerm::Dense(d) => linalg::embed(&d.block, &d.support, d.n),
            HermitianTerm::LowRank(l) => &l.vectors * &l.block * l.vectors.adjoint(),
            HermitianTerm::Controlled { value, inner } => {
                linalg::kron(&linalg::bit_projector(*value), &inner.to_dense())
            }
            HermitianTerm::Idle { k, inner } => {
                linalg::kron(&linalg::identity(1 << k), &inner.to_dense())
            }
        }
    }

    /// In place `amps ← exp(iθ·term) amps`.
    pub fn apply_exp(&self, amps: &mut [C64], theta: f64) {
        debug_assert_eq!(amps.len(), 1 << self.num_qubits());
        match self {
            HermitianTerm::Pauli { word, coeff } => pauli_exp(amps, word, theta * coeff),
            HermitianTerm::Dense(d) => {
                let u = linalg::apply_spectral(&d.eigvals, &d.eigvecs, |x| cis(theta * x));
                apply_local_matrix(amps, d.n, &d.support, &u);
            }
            HermitianTerm::LowRank(l) => {
                let w = l.vectors.adjoint() * linalg::CVec::from_column_slice(amps);
                let phase =
                    linalg::apply_spectral(&l.eigvals, &l.eigvecs, |x| cis(theta * x) - 1.0);
                let d = l.vectors.clone() * (phase * w);
                for (a, dz) in amps.iter_mut().zip(d.iter()) {
                    *a += dz;
                }
            }
            HermitianTerm::Controlled { value, inner } => {
                let half = amps.len() / 2;
                let slice = if *value {
                    &mut amps[half..]
                } else {
                    &mut amps[..half]
                };
                inner.apply_exp(slice, theta);
            }
            HermitianTerm::Idle { k, inner } => {
                let block = amps.len() >> k;
                for chunk in amps.chunks_mut(block) {
                    inner.apply_exp(chunk, theta);
                }
            }
        }
    }

    /// `out += term · amps`.
    pub fn apply_add(&self, amps: &[C64], out: &mut [C64]) {
        match self {
            HermitianTerm::Pauli { word, coeff } => {
                let m = word.masks();
                for (x, &a) in amps.iter().enumerate() {
                    out[x ^ m.x_mask] += a * i_pow(m.phase_power(x)) * *coeff;
                }
            }
            HermitianTerm::Dense(d) => {
                let mut tmp = amps.to_vec();
                apply_local_matrix(&mut tmp, d.n, &d.support, &d.block);
                for (o, t) in out.iter_mut().zip(tmp) {
                    *o += t;
                }
            }
            HermitianTerm::LowRank(l) => {
                let w = l.vectors.adjoint() * linalg::CVec::from_column_slice(amps);
                let d = l.vectors.clone() * (&l.block * w);
                for (o, dz) in out.iter_mut().zip(d.iter()) {
                    *o += dz;
                }
            }
            HermitianTerm::Controlled { value, inner } => {
                let half = amps.len() / 2;
                let range = if *value { half..amps.len() } else { 0..half };
                inner.apply_add(&amps[range.clone()], &mut out[range]);
            }
            HermitianTerm::Idle { k, inner } => {
                let block = amps.len() >> k;
                for (a, o) in amps.chunks(block).zip(out.chunks_mut(block)) {
                    inner.apply_add(a, o);
                }
            }
        }
    }

    pub fn is_pauli(&self) -> bool {
        matches!(self, HermitianTerm::Pauli { .. })
    }
}

/// `amps ← exp(iφP) amps`.
pub(crate) fn pauli_exp(amps: &mut [C64], word: &PauliString, phi: f64) {
    if phi == 0.0 {
        return;
    }
    let m = word.masks();
    let (s, co) = phi.sin_cos();
    if m.x_mask == 0 {
        let plus = cis(phi);
        let minus = cis(-phi);
        for (x, a) in amps.iter_mut().enumerate() {
            *a *= if (x & m.z_mask).count_ones() & 1 == 0 {
                plus
            } else {
                minus
            };
        }
        return;
    }
    let is = c(0.0, s);
    let top = 1usize << (usize::BITS - 1 - m.x_mask.leading_zeros());
    for x in 0..amps.len() {
        if x & top != 0 {
            continue;
        }
        let y = x ^ m.x_mask;
        let ax = amps[x];
        let ay = amps[y];
        amps[x] = ax * co + is * i_pow(m.phase_power(y)) * ay;
        amps[y] = ay * co + is * i_pow(m.phase_power(x)) * ax;
    }
}

/// Apply a `2^k × 2^k` matrix on the ordered `support` of an `n`-qubit register.
pub(crate) fn apply_local_matrix(amps: &mut [C64], n: usize, support: &[usize], u: &CMat) {
    let k = support.len();
    let bits: Vec<usize> = support.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let mask: usize = bits.iter().sum();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|l| {
            bits.iter()
                .enumerate()
                .filter(|(pos, _)| l >> (k - 1 - pos) & 1 == 1)
                .map(|(_, &b)| b)
                .sum()
        })
        .collect();
    let mut buf = vec![C64::new(0.0, 0.0); 1 << k];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, &off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (l, b) in buf.iter().enumerate() {
                acc += u[(r, l)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

/// Ordered sum of Hermitian terms on `n` qubits. Order is significant for
/// product formulas.
#[derive(Debug, Clone)]
pub struct HamiltonianSum {
    n: usize,
    terms: Vec<HermitianTerm>,
}

impl HamiltonianSum {
    pub fn new(n: usize) -> Self {
        Self { n, terms: vec![] }
    }

    pub fn from_terms(n: usize, terms: Vec<HermitianTerm>) -> Result<Self> {
        let mut h = Self::new(n);
        for t in terms {
            h.push(t)?;
        }
        Ok(h)
    }

    /// Parse `(word, coeff)` pairs.
    pub fn from_paulis(pairs: &[(&str, f64)]) -> Result<Self> {
        let n = pairs.first().map(|(w, _)| w.len()).unwrap_or(0);
        let terms = pairs
            .iter()
            .map(|(w, k)| Ok(HermitianTerm::pauli(w.parse()?, *k)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n, terms)
    }

    pub fn push(&mut self, term: HermitianTerm) -> Result<()> {
        if term.num_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: term.num_qubits(),
            });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn terms(&self) -> &[HermitianTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self) -> CMat {
        let dim = self.dim();
        self.terms
            .iter()
            .fold(CMat::zeros(dim, dim), |acc, t| acc + t.to_dense())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|t| t.scaled(s)).collect(),
        }
    }

    /// `|v⟩⟨v| ⊗ H` on `n + 1` qubits, term by term.
    pub fn controlled(&self, value: bool) -> Self {
        Self {
            n: self.n + 1,
            terms: self
                .terms
                .iter()
                .map(|t| t.clone().controlled(value))
                .collect(),
        }
    }

    /// `I_{2^k} ⊗ H` on `n + k` qubits.
    pub fn idle_prefix(&self, k: usize) -> Self {
        Self {
            n: self.n + k,
            terms: self.terms.iter().map(|t| t.clone().idle_prefix(k)).collect(),
        }
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for t in &self.terms {
            t.apply_add(amps, &mut out);
        }
        out
    }

    pub fn norm(&self) -> Result<f64> {
        linalg::hermitian_norm(&self.to_dense())
    }
}

/// `Σ_j ‖H_j‖`.
pub fn lambda_one(h: &HamiltonianSum) -> f64 {
    h.terms.iter().map(HermitianTerm::norm).sum()
}

/// Dense-arithmetic budget for nested commutators: `Γ^j · dim³` flops.
const COMMUTATOR_BUDGET: f64 = 2e10;

/// `Σ_{γ1..γj} ‖[H_γ1,[H_γ2,[…,H_γj]]]‖` over all ordered tuples.
pub fn nested_commutator_norm(h: &HamiltonianSum, j: usize) -> Result<f64> {
    if j == 0 {
        return Err(invalid("j", "must be positive"));
    }
    if h.n > 12 {
        return Err(Error::Budget(format!("{} qubits exceeds dense limit 12", h.n)));
    }
    if j > 6 {
        return Err(Error::Budget(format!("commutator depth {j} exceeds 6")));
    }
    let gamma = h.terms.len() as f64;
    let dim = h.dim() as f64;
    if gamma.powi(j as i32) * dim.powi(3) > COMMUTATOR_BUDGET {
        return Err(Error::Budget(format!(
            "{} terms at depth {j} on {} qubits",
            h.terms.len(),
            h.n
        )));
    }
    let mats: Vec<CMat> = h.terms.iter().map(HermitianTerm::to_dense).collect();
    fn rec(mats: &[CMat], inner: &CMat, depth: usize) -> f64 {
        if depth == 0 {
            return linalg::spectral_norm(inner);
        }
        let mut total = 0.0;
        for m in mats {
            let next = linalg::commutator(m, inner);
            if next.iter().all(|z| z.norm() < 1e-14) {
                continue;
            }
            total += rec(mats, &next, depth - 1);
        }
        total
    }
    Ok(mats.iter().map(|m| rec(&mats, m, j - 1)).sum())
}

/// `4 · max_ℓ Σ_γ ‖H_γ^(ℓ)‖`, the ε-independent bound used for step sizing.
pub fn lambda_comm_bound(hams: &[&HamiltonianSum]) -> Result<f64> {
    if hams.is_empty() {
        return Err(invalid("circuit_hamiltonians", "empty list"));
    }
    Ok(4.0 * hams.iter().map(|h| lambda_one(h)).fold(0.0, f64::max))
}

/// Brute-force `Λ_{j,ℓ}` for order `p` formulas, using
/// `α̃^(q) = max_ℓ α_comm^(q,ℓ)` over the given Hamiltonians.
pub fn lambda_jl(hams: &[&HamiltonianSum], p: usize, j: usize, ell: usize) -> Result<f64> {
    let alpha = |q: usize| -> Result<f64> {
        let mut best = 0.0f64;
        for h in hams {
            best = best.max(nested_commutator_norm(h, q)?);
        }
        Ok(best)
    };
    // Compositions of j into ell even parts, each ≥ p.
    fn compositions(total: usize, parts: usize, min: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if total == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let mut part = if min % 2 == 0 { min } else { min + 1 };
        while part <= total {
            acc.push(part);
            compositions(total - part, parts - 1, min, acc, out);
            acc.pop();
            part += 2;
        }
    }
    let mut comps = vec![];
    compositions(j, ell, p.max(2), &mut vec![], &mut comps);
    let mut cache = std::collections::HashMap::new();
    let mut sum = 0.0;
    for comp in &comps {
        let mut prod = 1.0;
        for &jk in comp {
            let a = match cache.get(&(jk + 1)) {
                Some(&v) => v,
                None => {
                    let v = alpha(jk + 1)?;
                    cache.insert(jk + 1, v);
                    v
                }
            };
            prod *= 2.0 * a / ((jk + 1) as f64).powi(2);
        }
        sum += prod;
    }
    let first = sum.powf(1.0 / (j + ell) as f64);
    let second = alpha(j)?.powf(1.0 / j as f64);
    Ok(first.max(second))
}
