//! Double-double arithmetic (about 32 significant digits) for quantities that
//! cancel below double precision, such as high-order Trotter errors at small
//! time steps. Only the operations those computations need are provided.

use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{c, CMat};

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Requires `|a| ≥ |b|`.
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self - Dd::from(q1) * Dd::from(b);
        let q2 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// `(sin x, cos x)` by Taylor series; meant for `|x| ≲ 4`.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let x2 = self * self;
        let (mut s, mut co) = (self, Dd::ONE);
        let (mut ts, mut tc) = (self, Dd::ONE);
        for n in 1..60 {
            ts = -(ts * x2).div_f64(((2 * n) * (2 * n + 1)) as f64);
            tc = -(tc * x2).div_f64(((2 * n - 1) * (2 * n)) as f64);
            s = s + ts;
            co = co + tc;
            if ts.hi.abs() < 1e-34 && tc.hi.abs() < 1e-34 {
                break;
            }
        }
        (s, co)
    }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = self.hi * b.hi;
        let e = self.hi.mul_add(b.hi, -p) + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };

    pub fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, b: Cdd) -> Cdd {
        Cdd::new(self.re + b.re, self.im + b.im)
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, b: Cdd) -> Cdd {
        Cdd::new(self.re - b.re, self.im - b.im)
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, b: Cdd) -> Cdd {
        Cdd::new(self.re * b.re - self.im * b.im, self.re * b.im + self.im * b.re)
    }
}

/// Dense square matrix over [`Cdd`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DdMat {
    dim: usize,
    data: Vec<Cdd>,
}

impl DdMat {
    pub fn zeros(dim: usize) -> Self {
        DdMat {
            dim,
            data: vec![Cdd::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i].re = Dd::ONE;
        }
        m
    }

    /// Exact: every double is a double-double.
    pub fn from_cmat(m: &CMat) -> Self {
        let dim = m.nrows();
        let mut out = Self::zeros(dim);
        for r in 0..dim {
            for col in 0..dim {
                let z = m[(r, col)];
                out.data[r * dim + col] = Cdd::new(z.re.into(), z.im.into());
            }
        }
        out
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.dim, self.dim, |r, col| {
            let z = self.data[r * self.dim + col];
            c(z.re.to_f64(), z.im.to_f64())
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self, s: Cdd) -> DdMat {
        DdMat {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, b: &DdMat) -> DdMat {
        DdMat {
            dim: self.dim,
            data: self.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect(),
        }
    }

    pub fn sub(&self, b: &DdMat) -> DdMat {
        DdMat {
            dim: self.dim,
            data: self.data.iter().zip(&b.data).map(|(&x, &y)| x - y).collect(),
        }
    }

    pub fn matmul(&self, b: &DdMat) -> DdMat {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Cdd::ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * b.data[k * n + j];
                }
            }
        }
        out
    }

    /// Largest entry modulus, rounded to double.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.re.to_f64().hypot(z.im.to_f64()))
            .fold(0.0, f64::max)
    }

    /// `e^{−iMt}` for Hermitian `M` by Taylor series; needs `‖Mt‖ ≲ 4`.
    pub fn expm_minus_i(&self, t: f64) -> DdMat {
        let step = self.scale(Cdd::new(Dd::ZERO, Dd::from(-t)));
        let mut term = Self::identity(self.dim);
        let mut sum = term.clone();
        for n in 1..200 {
            term = step.matmul(&term);
            term.data.iter_mut().for_each(|z| *z = Cdd::new(z.re.div_f64(n as f64), z.im.div_f64(n as f64)));
            sum = sum.add(&term);
            if term.max_abs() < 1e-34 {
                break;
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_below_double_epsilon() {
        let tiny = Dd::from(1e-20);
        let x = (Dd::ONE + tiny) - Dd::ONE;
        assert_eq!(x.to_f64(), 1e-20);
        let third = Dd::ONE.div_f64(3.0);
        let back = third * Dd::from(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sin_cos_pythagoras() {
        for x in [-2.5, -0.3, 1e-3, 0.7, 3.0] {
            let (s, co) = Dd::from(x).sin_cos();
            assert!((s * s + co * co - Dd::ONE).to_f64().abs() < 1e-30);
            assert!((s.to_f64() - x.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn taylor_exponential_matches_closed_form() {
        // Pauli X: e^{−iXt} = cos t I − i sin t X.
        let x = DdMat::from_cmat(&CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
        let t = 0.37;
        let e = x.expm_minus_i(t);
        let (s, co) = Dd::from(t).sin_cos();
        let want = DdMat::identity(2)
            .scale(Cdd::new(co, Dd::ZERO))
            .add(&x.scale(Cdd::new(Dd::ZERO, -s)));
        assert!(e.sub(&want).max_abs() < 1e-30);
    }
}
