//! Richardson extrapolation to the zero-step-size limit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Cancels all powers `s^1..s^{m−1}`; nodes are squared ceilings.
    General,
    /// Cancels even powers `s^2..s^{2(m−1)}` of an even series.
    Even,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolationScheme {
    pub m: usize,
    pub s0: f64,
    /// `1/s0`.
    pub inv_s0: u64,
    pub variant: Variant,
    /// Strictly decreasing integer node divisors.
    pub r: Vec<u64>,
    pub b: Vec<f64>,
    pub b_norm1: f64,
}

fn base_ceiling(m: usize, i: usize) -> u64 {
    let mf = m as f64;
    let x = 8f64.sqrt() * mf
        / (std::f64::consts::PI * (std::f64::consts::PI * (2 * i - 1) as f64 / (8.0 * mf)).sin());
    x.ceil() as u64
}

/// Node divisors `r_1 > … > r_m`.
pub fn nodes(m: usize, variant: Variant) -> Vec<u64> {
    (1..=m)
        .map(|i| {
            let r = base_ceiling(m, i);
            match variant {
                Variant::Even => r,
                Variant::General => r * r,
            }
        })
        .collect()
}

/// Closed-form weights `b_i = ∏_{ℓ≠i} 1/(1 − x_ℓ/x_i)` with `x = r` (general)
/// or `x = r²` (even). Each weight is an exact integer ratio, evaluated in
/// 128-bit arithmetic when it fits.
pub fn closed_form_weights(r: &[u64], variant: Variant) -> Vec<f64> {
    let x: Vec<u128> = r
        .iter()
        .map(|&v| match variant {
            Variant::Even => (v as u128) * (v as u128),
            Variant::General => v as u128,
        })
        .collect();
    (0..x.len())
        .map(|i| {
            let mut num: i128 = 1;
            let mut den: i128 = 1;
            let mut exact = true;
            for (l, &xl) in x.iter().enumerate() {
                if l == i {
                    continue;
                }
                let d = x[i] as i128 - xl as i128;
                match (num.checked_mul(x[i] as i128), den.checked_mul(d)) {
                    (Some(a), Some(b)) => {
                        num = a;
                        den = b;
                    }
                    _ => {
                        exact = false;
                        break;
                    }
                }
            }
            if exact {
                let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
                (num / g) as f64 / (den / g) as f64
            } else {
                x.iter()
                    .enumerate()
                    .filter(|&(l, _)| l != i)
                    .map(|(_, &xl)| 1.0 / (1.0 - xl as f64 / x[i] as f64))
                    .product()
            }
        })
        .collect()
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn moment_powers(m: usize, variant: Variant) -> Vec<i32> {
    (0..m as i32)
        .map(|q| match variant {
            Variant::Even => 2 * q,
            Variant::General => q,
        })
        .collect()
}

/// Weights from the moment (Vandermonde) system `Σ b_i r_i^{−q} = δ_{q0}`.
pub fn vandermonde_weights(r: &[u64], variant: Variant) -> Result<Vec<f64>> {
    let m = r.len();
    let powers = moment_powers(m, variant);
    let a = DMatrix::from_fn(m, m, |row, col| (r[col] as f64).powi(-powers[row]));
    let mut rhs = DVector::zeros(m);
    rhs[0] = 1.0;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Extrapolation("singular Vandermonde system".into()))?;
    Ok(sol.iter().copied().collect())
}

impl ExtrapolationScheme {
    pub fn build(m: usize, s0: f64, variant: Variant) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "must be at least 1"));
        }
        if !(s0 > 0.0 && s0 <= 1.0) {
            return Err(invalid("s0", format!("{s0} not in (0, 1]")));
        }
        let inv = (1.0 / s0).round();
        if ((1.0 / s0) - inv).abs() > 1e-9 * inv {
            return Err(invalid("s0", format!("1/s0 = {} is not an integer", 1.0 / s0)));
        }
        Self::with_inverse_step(m, inv as u64, variant)
    }

    /// Scheme with `s0 = 1/inv_s0`.
    pub fn with_inverse_step(m: usize, inv_s0: u64, variant: Variant) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "must be at least 1"));
        }
        if inv_s0 == 0 {
            return Err(invalid("s0", "1/s0 must be a positive integer"));
        }
        let r = nodes(m, variant);
        if r.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Extrapolation(format!("duplicate or unordered nodes {r:?}")));
        }
        let b = closed_form_weights(&r, variant);
        let b_norm1 = b.iter().map(|x| x.abs()).sum();
        Ok(Self {
            m,
            s0: 1.0 / inv_s0 as f64,
            inv_s0,
            variant,
            r,
            b,
            b_norm1,
        })
    }

    /// Step sizes `s_i = s0 / r_i`.
    pub fn steps(&self) -> Vec<f64> {
        self.r.iter().map(|&r| self.s0 / r as f64).collect()
    }

    /// `1/s_i = r_i / s0`, exact.
    pub fn inverse_steps(&self) -> Vec<u64> {
        self.r.iter().map(|&r| r * self.inv_s0).collect()
    }

    /// `Σ b_i f(s_i)` for samples given in node order.
    pub fn combine(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.m {
            return Err(Error::Extrapolation(format!(
                "expected {} node values, got {}",
                self.m,
                values.len()
            )));
        }
        Ok(self.b.iter().zip(values).map(|(b, f)| b * f).sum())
    }

    /// `Σ b_i f(s_i)` where samples are `(s, f(s))` pairs at the scheme nodes.
    pub fn extrapolate(&self, samples: &[(f64, f64)]) -> Result<f64> {
        let steps = self.steps();
        let mut values = Vec::with_capacity(self.m);
        for (i, &s) in steps.iter().enumerate() {
            let hit = samples
                .iter()
                .find(|(x, _)| (x - s).abs() <= 1e-12 * s)
                .ok_or_else(|| Error::Extrapolation(format!("missing node {i} at s = {s:e}")))?;
            values.push(hit.1);
        }
        self.combine(&values)
    }

    /// Largest `|Σ b_i r_i^{−q}|` over the cancelled powers.
    pub fn moment_residual(&self) -> f64 {
        moment_powers(self.m, self.variant)
            .into_iter()
            .skip(1)
            .map(|q| {
                self.b
                    .iter()
                    .zip(&self.r)
                    .map(|(b, &r)| b * (r as f64).powi(-q))
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `‖b‖₁` for each `m`.
pub fn b_norm_profile(m_list: &[usize], variant: Variant) -> Result<Vec<f64>> {
    m_list
        .iter()
        .map(|&m| Ok(ExtrapolationScheme::with_inverse_step(m, 1, variant)?.b_norm1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_node() {
        let s = ExtrapolationScheme::build(1, 1.0, Variant::Even).unwrap();
        assert_eq!(s.r, vec![3]);
        assert_eq!(s.b, vec![1.0]);
        assert_eq!(s.combine(&[0.42]).unwrap(), 0.42);
    }

    #[test]
    fn two_nodes() {
        let s = ExtrapolationScheme::build(2, 1.0, Variant::Even).unwrap();
        assert_eq!(s.r, vec![10, 4]);
        assert!((s.b[0] - 25.0 / 21.0).abs() < 1e-15);
        assert!((s.b[1] + 4.0 / 21.0).abs() < 1e-15);
        assert!((s.b_norm1 - 1.380952).abs() < 1e-6);
    }

    #[test]
    fn quadratic_is_cancelled() {
        let s = ExtrapolationScheme::build(2, 1.0, Variant::Even).unwrap();
        let f = |x: f64| 1.0 + x * x;
        let samples: Vec<(f64, f64)> = s.steps().into_iter().map(|x| (x, f(x))).collect();
        assert_eq!(samples[0].0, 0.1);
        assert_eq!(samples[1].0, 0.25);
        assert!((s.extrapolate(&samples).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_is_reproduced() {
        for m in 1..=8 {
            for v in [Variant::Even, Variant::General] {
                let s = ExtrapolationScheme::build(m, 0.5, v).unwrap();
                assert!((s.b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let vals = vec![3.25; m];
                assert!((s.combine(&vals).unwrap() - 3.25).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(ExtrapolationScheme::build(0, 1.0, Variant::Even).is_err());
        assert!(ExtrapolationScheme::build(2, 0.3, Variant::Even).is_err());
        assert!(ExtrapolationScheme::build(2, 1.0 / 7.0, Variant::Even).is_ok());
        let s = ExtrapolationScheme::build(2, 1.0, Variant::Even).unwrap();
        assert!(s.extrapolate(&[(0.1, 1.0)]).is_err());
    }

    #[test]
    fn norm_profile_is_sublinear() {
        let p = b_norm_profile(&[1, 2, 4, 8, 16], Variant::Even).unwrap();
        assert_eq!(p[0], 1.0);
        assert!((p[1] - 1.380952).abs() < 1e-6);
        for w in p.windows(2).skip(1) {
            assert!(w[1] / w[0] < 2.0, "{p:?}");
        }
    }

    #[test]
    fn closed_form_matches_vandermonde() {
        for m in 1..=8 {
            for v in [Variant::Even, Variant::General] {
                let s = ExtrapolationScheme::build(m, 1.0, v).unwrap();
                let vm = vandermonde_weights(&s.r, v).unwrap();
                for (a, b) in s.b.iter().zip(&vm) {
                    assert!((a - b).abs() < 1e-9, "m={m} {v:?}: {a} vs {b}");
                }
                assert!(s.moment_residual() < 1e-9);
            }
        }
    }

    #[test]
    fn node_ratio_tables_are_monotone() {
        let mut last = (0u64, 0.0f64);
        for m in 1..=8 {
            let r = nodes(m, Variant::Even);
            assert!(r.windows(2).all(|w| w[0] > w[1]));
            let ratio = r[0] as f64 / r[m - 1] as f64;
            assert!(r[0] >= last.0 && ratio >= last.1);
            // O(m²) envelopes for both the largest node and the spread.
            assert!(r[0] as f64 <= 3.0 * (m * m) as f64 + 3.0);
            assert!(ratio <= 2.0 * (m * m) as f64);
            last = (r[0], ratio);
        }
    }

    proptest! {
        #[test]
        fn even_polynomials_recovered(m in 1usize..=6, seed in proptest::collection::vec(-2.0f64..2.0, 12), inv in 1u64..5) {
            let s = ExtrapolationScheme::with_inverse_step(m, inv, Variant::Even).unwrap();
            let coeffs = &seed[..m];
            let f = |x: f64| coeffs.iter().enumerate().map(|(q, c)| c * x.powi(2 * q as i32)).sum::<f64>();
            let vals: Vec<f64> = s.steps().iter().map(|&x| f(x)).collect();
            prop_assert!((s.combine(&vals).unwrap() - coeffs[0]).abs() < 1e-9);
        }

        #[test]
        fn general_polynomials_recovered(m in 1usize..=6, seed in proptest::collection::vec(-2.0f64..2.0, 12)) {
            let s = ExtrapolationScheme::with_inverse_step(m, 1, Variant::General).unwrap();
            let coeffs = &seed[..m];
            let f = |x: f64| coeffs.iter().enumerate().map(|(q, c)| c * x.powi(q as i32)).sum::<f64>();
            let vals: Vec<f64> = s.steps().iter().map(|&x| f(x)).collect();
            prop_assert!((s.combine(&vals).unwrap() - coeffs[0]).abs() < 1e-9);
        }
    }
}
