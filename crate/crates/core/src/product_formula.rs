//! Symmetric Trotter–Suzuki product formulas for `e^{−iHt}`.

use serde::Serialize;

use crate::ddouble::{Cdd, Dd, DdMat};
use crate::error::{invalid, Result};
use crate::hamiltonian::{HamiltonianSum, HermitianTerm};
use crate::linalg::{self, CMat};
use crate::state::StateVector;

/// One stage: terms visited in `perm` order with coefficients `coeffs`
/// (`coeffs[i]` multiplies term `perm[i]`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub perm: Vec<usize>,
    pub coeffs: Vec<f64>,
}

/// `P(t) = ∏_ν ∏_γ e^{−i t a_(ν,γ) H_{π_ν(γ)}}`, stages in application order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagedProductFormula {
    pub k: usize,
    pub order: usize,
    pub term_count: usize,
    pub stages: Vec<Stage>,
    pub symmetric: bool,
    pub a_max: f64,
}

/// `u_k = 1/(4 − 4^{1/(2k−1)})`.
pub fn suzuki_u(k: usize) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0)))
}

/// `2k`-th order formula from the Suzuki recursion
/// `S_2k(t) = S_{2k−2}(u t)² S_{2k−2}((1−4u) t) S_{2k−2}(u t)²`.
pub fn suzuki(k: usize, term_count: usize) -> Result<StagedProductFormula> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if term_count == 0 {
        return Err(invalid("term_count", "must be at least 1"));
    }
    let forward: Vec<usize> = (0..term_count).collect();
    let backward: Vec<usize> = forward.iter().rev().copied().collect();
    let mut stages = vec![
        Stage {
            perm: backward,
            coeffs: vec![0.5; term_count],
        },
        Stage {
            perm: forward,
            coeffs: vec![0.5; term_count],
        },
    ];
    for level in 2..=k {
        let u = suzuki_u(level);
        let scale = |st: &[Stage], s: f64| -> Vec<Stage> {
            st.iter()
                .map(|g| Stage {
                    perm: g.perm.clone(),
                    coeffs: g.coeffs.iter().map(|a| a * s).collect(),
                })
                .collect()
        };
        let outer = scale(&stages, u);
        let middle = scale(&stages, 1.0 - 4.0 * u);
        let mut next = Vec::with_capacity(5 * stages.len());
        next.extend(outer.iter().cloned());
        next.extend(outer.iter().cloned());
        next.extend(middle);
        next.extend(outer.iter().cloned());
        next.extend(outer);
        stages = next;
    }
    let a_max = stages
        .iter()
        .flat_map(|s| s.coeffs.iter())
        .fold(0.0f64, |m, a| m.max(a.abs()));
    Ok(StagedProductFormula {
        k,
        order: 2 * k,
        term_count,
        stages,
        symmetric: true,
        a_max,
    })
}

impl StagedProductFormula {
    /// Stage count `Υ`.
    pub fn upsilon(&self) -> usize {
        self.stages.len()
    }

    /// Unmerged exponential count for `steps` repetitions: `r·Υ·Γ`.
    pub fn exponential_count(&self, steps: usize) -> usize {
        steps * self.upsilon() * self.term_count
    }

    /// `(term, coefficient)` pairs of `steps` repetitions of one step, with
    /// adjacent exponentials of the same term merged.
    pub fn schedule(&self, steps: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.exponential_count(steps));
        for _ in 0..steps {
            for st in &self.stages {
                for (&g, &a) in st.perm.iter().zip(&st.coeffs) {
                    match out.last_mut() {
                        Some(last) if last.0 == g => last.1 += a,
                        _ => out.push((g, a)),
                    }
                }
            }
        }
        out
    }

    /// Dense `P(t)`.
    pub fn dense(&self, h: &HamiltonianSum, t: f64) -> Result<CMat> {
        let mats: Vec<CMat> = h.terms().iter().map(|term| term.to_dense()).collect();
        let dim = h.dim();
        let mut u = linalg::identity(dim);
        for st in &self.stages {
            for (&g, &a) in st.perm.iter().zip(&st.coeffs) {
                u = linalg::expm_i(&mats[g], -a * t) * u;
            }
        }
        Ok(u)
    }
}

/// `ψ ← P(t/r)^r ψ`.
pub fn apply_formula(
    state: &mut StateVector,
    h: &HamiltonianSum,
    pf: &StagedProductFormula,
    t: f64,
    steps: usize,
) -> Result<()> {
    if steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }
    if h.len() != pf.term_count {
        return Err(invalid(
            "formula",
            format!("built for {} terms, Hamiltonian has {}", pf.term_count, h.len()),
        ));
    }
    if h.num_qubits() != state.num_qubits() {
        return Err(crate::Error::Dimension {
            expected: h.num_qubits(),
            got: state.num_qubits(),
        });
    }
    let dt = t / steps as f64;
    let amps = state.amplitudes_mut();
    for (g, a) in pf.schedule(steps) {
        h.terms()[g].apply_exp(amps, -a * dt);
    }
    Ok(())
}

/// `‖e^{−iHt} − P(t)‖`.
pub fn formula_error(h: &HamiltonianSum, pf: &StagedProductFormula, t: f64) -> Result<f64> {
    let exact = linalg::expm_i(&h.to_dense(), -t);
    Ok(linalg::spectral_norm(&(exact - pf.dense(h, t)?)))
}

/// [`formula_error`] in double-double arithmetic, resolving errors far below
/// 1e-16. Pauli terms only: each factor is `cos θ I − i sin θ P` exactly.
pub fn formula_error_extended(h: &HamiltonianSum, pf: &StagedProductFormula, t: f64) -> Result<f64> {
    if h.len() != pf.term_count {
        return Err(invalid("pf", "term count does not match the Hamiltonian"));
    }
    let terms = h
        .terms()
        .iter()
        .map(|term| match term {
            HermitianTerm::Pauli { word, coeff } => Ok((DdMat::from_cmat(&word.to_dense()), *coeff)),
            _ => Err(invalid("h", "extended-precision error needs Pauli terms")),
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = h.dim();
    let mut u = DdMat::identity(dim);
    for st in &pf.stages {
        for (&g, &a) in st.perm.iter().zip(&st.coeffs) {
            let (p, coeff) = &terms[g];
            let (s, co) = (Dd::from(a) * Dd::from(t) * Dd::from(*coeff)).sin_cos();
            let factor = DdMat::identity(dim)
                .scale(Cdd::new(co, Dd::ZERO))
                .add(&p.scale(Cdd::new(Dd::ZERO, -s)));
            u = factor.matmul(&u);
        }
    }
    let exact = DdMat::from_cmat(&h.to_dense()).expm_minus_i(t);
    Ok(linalg::spectral_norm(&exact.sub(&u).to_cmat()))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};
    use crate::pauli::{Pauli, PauliString};
    use rand::{Rng, SeedableRng};

    fn random_h(seed: u64, n: usize, terms: usize) -> HamiltonianSum {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut words = vec![];
            while words.len() < terms {
                let w = PauliString::new(
                    (0..n)
                        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
                        .collect(),
                );
                if !w.is_identity() && !words.contains(&w) {
                    words.push(w);
                }
            }
            let commuting = words.iter().all(|a| words.iter().all(|b| a.commutes_with(b)));
            if commuting {
                continue;
            }
            let ts = words
                .into_iter()
                .map(|w| crate::HermitianTerm::pauli(w, rng.random_range(0.3..1.0)))
                .collect();
            return HamiltonianSum::from_terms(n, ts).unwrap();
        }
    }

    #[test]
    fn second_order_structure() {
        let pf = suzuki(1, 3).unwrap();
        assert_eq!(pf.upsilon(), 2);
        assert_eq!(pf.stages[0].perm, vec![2, 1, 0]);
        assert_eq!(pf.stages[1].perm, vec![0, 1, 2]);
        assert!(pf.stages.iter().all(|s| s.coeffs.iter().all(|&a| a == 0.5)));
    }

    #[test]
    fn fourth_order_constants() {
        let pf = suzuki(2, 4).unwrap();
        assert_eq!(pf.upsilon(), 10);
        assert!((suzuki_u(2) - 0.414490).abs() < 1e-6);
        assert!(pf.a_max <= 4.0 / 9.0);
        let pf3 = suzuki(3, 2).unwrap();
        assert_eq!(pf3.upsilon(), 50);
        assert!(pf3.a_max <= 6.0 / 27.0);
    }

    #[test]
    fn coefficients_sum_to_one_per_term() {
        for k in 1..=3 {
            let pf = suzuki(k, 3).unwrap();
            for g in 0..3 {
                let total: f64 = pf
                    .stages
                    .iter()
                    .map(|s| s.perm.iter().zip(&s.coeffs).filter(|(&p, _)| p == g).map(|(_, a)| a).sum::<f64>())
                    .sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commuting_terms_are_exact() {
        let h = HamiltonianSum::from_paulis(&[("ZI", 0.7), ("IZ", -0.4)]).unwrap();
        let pf = suzuki(1, 2).unwrap();
        let psi = StateVector::from_amplitudes(vec![c(1.0, 0.0), c(0.5, 0.5), c(-0.2, 0.0), c(0.0, 1.0)]).unwrap();
        let exact = linalg::expm_i_hermitian(&h.to_dense(), -1.3).unwrap();
        for r in [1, 3, 7] {
            let mut s = psi.clone();
            apply_formula(&mut s, &h, &pf, 1.3, r).unwrap();
            let want = &exact * psi.to_cvec();
            for (a, b) in s.amplitudes().iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
        assert!(formula_error(&h, &pf, 0.9).unwrap() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let h = HamiltonianSum::from_paulis(&[("X", 1.0), ("Z", 1.0)]).unwrap();
        let pf = suzuki(2, 2).unwrap();
        let mut s = StateVector::from_amplitudes(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let before = s.clone();
        apply_formula(&mut s, &h, &pf, 0.0, 3).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn application_matches_dense_product() {
        let h = HamiltonianSum::from_paulis(&[("X", 1.0), ("Z", 1.0)]).unwrap();
        let pf = suzuki(1, 2).unwrap();
        // S2(0.1) = e^{-iZ·0.05} e^{-iX·0.1} e^{-iZ·0.05}
        let x = h.terms()[0].to_dense();
        let z = h.terms()[1].to_dense();
        let ez = linalg::expm_i_hermitian(&z, -0.05).unwrap();
        let ex = linalg::expm_i_hermitian(&x, -0.1).unwrap();
        let want = &ez * &ex * &ez;
        assert!(max_abs_diff(&pf.dense(&h, 0.1).unwrap(), &want) < 1e-14);
        let mut s = StateVector::zero(1);
        apply_formula(&mut s, &h, &pf, 0.1, 1).unwrap();
        assert!((s.amplitudes()[0] - want[(0, 0)]).norm() < 1e-12);
        assert!((s.amplitudes()[1] - want[(1, 0)]).norm() < 1e-12);
    }

    #[test]
    fn symmetric_formula_inverts_under_time_reversal() {
        for k in 1..=2 {
            let h = random_h(k as u64 + 10, 3, 3);
            let pf = suzuki(k, 3).unwrap();
            let prod = pf.dense(&h, -0.37).unwrap() * pf.dense(&h, 0.37).unwrap();
            assert!(max_abs_diff(&prod, &linalg::identity(8)) < 1e-10);
        }
    }

    #[test]
    fn merge_preserves_product() {
        let h = random_h(3, 2, 3);
        let pf = suzuki(2, 3).unwrap();
        let merged = pf.schedule(2);
        assert!(merged.len() < pf.exponential_count(2));
        let mut s = StateVector::zero(2);
        apply_formula(&mut s, &h, &pf, 0.4, 2).unwrap();
        let half = pf.dense(&h, 0.2).unwrap();
        let want = &half * &half * StateVector::zero(2).to_cvec();
        for (a, b) in s.amplitudes().iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn x_plus_z_slopes() {
        let h = HamiltonianSum::from_paulis(&[("X", 1.0), ("Z", 1.0)]).unwrap();
        for (k, want) in [(1usize, 3.0), (2, 5.0)] {
            let pf = suzuki(k, 2).unwrap();
            let ts: Vec<f64> = (0..5).map(|j| 0.2 * 0.5f64.powi(j)).collect();
            let es: Vec<f64> = ts.iter().map(|&t| formula_error(&h, &pf, t).unwrap()).collect();
            let slope = loglog_slope(&ts, &es);
            assert!((slope - want).abs() < 0.3, "k={k} slope={slope}");
        }
    }

    #[test]
    fn error_constant_tracks_commutators() {
        // C = error / (α_comm^(p+1) t^(p+1)) is stable across instances.
        let t = 0.05;
        let pf = suzuki(1, 3).unwrap();
        let consts: Vec<f64> = (0..10)
            .map(|s| {
                let h = random_h(100 + s, 3, 3);
                let alpha = crate::hamiltonian::nested_commutator_norm(&h, 3).unwrap();
                formula_error(&h, &pf, t).unwrap() / (alpha * t.powi(3))
            })
            .collect();
        let max = consts.iter().cloned().fold(0.0, f64::max);
        let min = consts.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 10.0, "{consts:?}");
    }

    #[test]
    fn extended_error_agrees_with_double_where_resolvable() {
        for seed in 0..4 {
            let h = random_h(300 + seed, 3, 3);
            for k in [1, 2] {
                let pf = suzuki(k, 3).unwrap();
                let (a, b) = (formula_error(&h, &pf, 0.2).unwrap(), formula_error_extended(&h, &pf, 0.2).unwrap());
                assert!((a - b).abs() < 1e-13 + 1e-6 * b, "k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn extended_error_keeps_fifth_order_below_epsilon() {
        let h = HamiltonianSum::from_paulis(&[("XI", 0.3), ("ZZ", 0.4), ("IY", 0.2)]).unwrap();
        let pf = suzuki(2, 3).unwrap();
        let ts: Vec<f64> = (0..8).map(|j| 0.2 * 0.5f64.powi(j)).collect();
        let es: Vec<f64> = ts.iter().map(|&t| formula_error_extended(&h, &pf, t).unwrap()).collect();
        assert!(es[7] < 1e-17);
        assert!((loglog_slope(&ts, &es) - 5.0).abs() < 0.05);
    }
}
