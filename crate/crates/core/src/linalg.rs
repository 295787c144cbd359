//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !m.is_square() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((vec![], CMat::zeros(0, 0)));
    }
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolve(format!("no convergence for {n}x{n} block")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

/// `V diag(f(ξ)) V†` for Hermitian input.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> C64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    Ok(apply_spectral(&vals, &vecs, f))
}

pub fn apply_spectral(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let mut scaled = vecs.clone();
    for (k, &x) in vals.iter().enumerate() {
        let fx = f(x);
        scaled.column_mut(k).scale_mut_c(fx);
    }
    scaled * vecs.adjoint()
}

trait ScaleC {
    fn scale_mut_c(&mut self, s: C64);
}

impl<S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>> ScaleC
    for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_c(&mut self, s: C64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

/// `exp(i θ M)` for Hermitian `M`.
pub fn expm_i_hermitian(m: &CMat, theta: f64) -> Result<CMat> {
    hermitian_function(m, |x| cis(theta * x))
}

/// `e^{iθM}` by Padé scaling and squaring. Accurate to machine precision for
/// small `‖θM‖`, where the eigendecomposition route floors near 1e-14.
pub fn expm_i(m: &CMat, theta: f64) -> CMat {
    (m * c(0.0, theta)).exp()
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMat) -> Result<f64> {
    let (vals, _) = eigh(m)?;
    Ok(vals.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
}

/// Spectral norm (largest singular value) of an arbitrary matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().fold(0.0f64, |a, &x| a.max(x))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Single-qubit projector `|v⟩⟨v|`, `v ∈ {0,1}`.
pub fn bit_projector(value: bool) -> CMat {
    let mut p = CMat::zeros(2, 2);
    let k = usize::from(value);
    p[(k, k)] = c(1.0, 0.0);
    p
}

/// Embed an operator acting on `support` (ordered, qubit 0 most significant)
/// into the full `n`-qubit space.
pub fn embed(block: &CMat, support: &[usize], n: usize) -> CMat {
    let dim = 1usize << n;
    let k = support.len();
    let mut out = CMat::zeros(dim, dim);
    let support_mask: usize = support.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let local = |x: usize| -> usize {
        let mut l = 0usize;
        for (pos, &q) in support.iter().enumerate() {
            if x >> (n - 1 - q) & 1 == 1 {
                l |= 1 << (k - 1 - pos);
            }
        }
        l
    };
    let scatter = |l: usize| -> usize {
        let mut x = 0usize;
        for (pos, &q) in support.iter().enumerate() {
            if l >> (k - 1 - pos) & 1 == 1 {
                x |= 1 << (n - 1 - q);
            }
        }
        x
    };
    for col in 0..dim {
        let rest = col & !support_mask;
        let lc = local(col);
        for lr in 0..(1usize << k) {
            let v = block[(lr, lc)];
            if v != C64::new(0.0, 0.0) {
                out[(rest | scatter(lr), col)] += v;
            }
        }
    }
    out
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest entrywise distance.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    spectral_norm(&(u.adjoint() * u - identity(u.nrows())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    #[test]
    fn eigh_sorts_ascending_and_reconstructs() {
        let h: CMat = "XZ".parse::<PauliString>().unwrap().to_dense() * c(0.7, 0.0)
            + "ZI".parse::<PauliString>().unwrap().to_dense() * c(0.2, 0.0);
        let (vals, vecs) = eigh(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let back = apply_spectral(&vals, &vecs, |x| c(x, 0.0));
        assert!(max_abs_diff(&back, &h) < 1e-12);
    }

    #[test]
    fn expm_of_z() {
        let z = "Z".parse::<PauliString>().unwrap().to_dense();
        let u = expm_i_hermitian(&z, 1.0).unwrap();
        assert!((u[(0, 0)] - cis(1.0)).norm() < 1e-14);
        assert!((u[(1, 1)] - cis(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn embed_matches_pauli_tensor() {
        let x = "X".parse::<PauliString>().unwrap().to_dense();
        let z = "Z".parse::<PauliString>().unwrap().to_dense();
        let xz = kron(&x, &z);
        // X on qubit 2, Z on qubit 0 of a 3-qubit register.
        let full = embed(&xz, &[2, 0], 3);
        let expect = "ZIX".parse::<PauliString>().unwrap().to_dense();
        assert!(max_abs_diff(&full, &expect) < 1e-15);
    }

    #[test]
    fn spectral_norm_of_nilpotent() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(3.0, 0.0);
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
    }
}
