//! Bounded Laurent-polynomial approximations for GQSP.
//!
//! Every constructor returns a certified polynomial: its error on the target
//! domain is measured on a Chebyshev grid, and its modulus is checked on the
//! unit circle. Degrees are chosen as the smallest that pass the certificate.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc, erfc_inv};

use crate::error::{invalid, Error, Result};
use crate::gqsp::LaurentPolynomial;
use crate::linalg::c;
use crate::C64;

/// Hard cap on the degree `d` of any constructed polynomial.
pub const DEGREE_CAP: usize = 4096;

/// Domain certification points per report.
pub const DOMAIN_GRID: usize = 2048;

/// Circle admissibility points.
pub const CIRCLE_GRID: usize = 4096;

/// Admissibility slack on `sup |P|`.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub kind: String,
    pub polynomial: LaurentPolynomial,
    /// Certified intervals in the variable `x`, with `z = e^{i·arg_scale·x}`.
    pub target_domain: Vec<(f64, f64)>,
    pub arg_scale: f64,
    pub measured_sup_error: f64,
    pub circle_sup_norm: f64,
    pub eps: f64,
    /// Construction parameters (`delta`, `mu`, `kappa`, `beta`, `t`, `B`, …).
    pub params: BTreeMap<String, f64>,
}

impl ApproximationReport {
    pub fn degree(&self) -> usize {
        self.polynomial.d
    }

    /// `P(e^{i·arg_scale·x})`.
    pub fn eval_x(&self, x: f64) -> C64 {
        self.polynomial.eval_angle(self.arg_scale * x)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn is_admissible(&self) -> bool {
        self.circle_sup_norm <= 1.0 + ADMISSIBLE_TOL
    }
}

/// Piece of a target: `[lo, hi]` and the admissible value band there.
struct Piece<'a> {
    lo: f64,
    hi: f64,
    target: &'a dyn Fn(f64) -> f64,
}

/// Chebyshev–Lobatto points on `[lo, hi]`, endpoints included.
fn chebyshev_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|k| {
            let t = (PI * k as f64 / (n - 1) as f64).cos();
            0.5 * (lo + hi) - 0.5 * (hi - lo) * t
        })
        .collect()
}

/// Grid points per piece, proportional to length, with at least 16 each.
fn piece_grid(pieces: &[Piece<'_>]) -> Vec<Vec<f64>> {
    let total: f64 = pieces.iter().map(|p| (p.hi - p.lo).max(0.0)).sum();
    pieces
        .iter()
        .map(|p| {
            let share = if total > 0.0 {
                ((p.hi - p.lo) / total * DOMAIN_GRID as f64) as usize
            } else {
                1
            };
            chebyshev_points(p.lo, p.hi, share.max(16))
        })
        .collect()
}

fn domain_error(p: &LaurentPolynomial, scale: f64, pieces: &[Piece<'_>]) -> f64 {
    let grids = piece_grid(pieces);
    let mut worst = 0.0f64;
    for (piece, grid) in pieces.iter().zip(&grids) {
        for &x in grid {
            let v = p.eval_angle(scale * x);
            worst = worst.max((v - (piece.target)(x)).norm());
        }
    }
    worst
}

fn circle_sup(p: &LaurentPolynomial) -> f64 {
    p.sup_circle(CIRCLE_GRID)
}

fn report(
    kind: &str,
    polynomial: LaurentPolynomial,
    scale: f64,
    pieces: &[Piece<'_>],
    eps: f64,
    params: &[(&str, f64)],
) -> ApproximationReport {
    let measured_sup_error = domain_error(&polynomial, scale, pieces);
    let circle_sup_norm = circle_sup(&polynomial);
    ApproximationReport {
        kind: kind.to_string(),
        target_domain: pieces.iter().map(|p| (p.lo, p.hi)).collect(),
        arg_scale: scale,
        measured_sup_error,
        circle_sup_norm,
        eps,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        polynomial,
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(invalid(name, format!("{v} not in (0,1)")));
    }
    Ok(())
}

/// Gaussian-damped square-wave series truncated at odd `k ≤ kmax`.
struct SquareWave {
    sigma: f64,
}

impl SquareWave {
    fn weight(&self, k: usize) -> f64 {
        let kf = k as f64;
        4.0 / (PI * kf) * (-0.5 * kf * kf * self.sigma * self.sigma).exp()
    }

    /// `Σ_{k > kmax, odd} |a_k|`.
    fn tail(&self, kmax: usize) -> f64 {
        let mut k = if kmax % 2 == 0 { kmax + 1 } else { kmax + 2 };
        let mut sum = 0.0;
        loop {
            let w = self.weight(k);
            sum += w;
            if w < 1e-18 * sum.max(1e-300) || w < 1e-30 {
                return sum;
            }
            k += 2;
        }
    }

    fn polynomial(&self, kmax: usize) -> LaurentPolynomial {
        let norm = 1.0 / (1.0 + self.tail(kmax));
        let mut p = LaurentPolynomial::zero(kmax);
        // sin(kx) = (z^k − z^{−k}) / 2i.
        for k in (1..=kmax).step_by(2) {
            let a = self.weight(k) * norm;
            *p.coeff_mut(k as i64) = c(0.0, -0.5 * a);
            *p.coeff_mut(-(k as i64)) = c(0.0, 0.5 * a);
        }
        p
    }
}

/// Smallest odd degree in `[1, hi]` passing `ok`, assuming monotonicity.
fn smallest_odd_passing(hi: usize, ok: &dyn Fn(usize) -> bool) -> Option<usize> {
    let hi = if hi % 2 == 0 { hi + 1 } else { hi };
    if !ok(hi) {
        return None;
    }
    let (mut lo_i, mut hi_i) = (0usize, hi / 2);
    while lo_i < hi_i {
        let mid = (lo_i + hi_i) / 2;
        if ok(2 * mid + 1) {
            hi_i = mid;
        } else {
            lo_i = mid + 1;
        }
    }
    Some(2 * hi_i + 1)
}

/// Odd approximation of `sgn(x)` on `[−π+Δ′, −Δ′] ∪ [Δ′, π−Δ′]` with
/// `|P| ≤ 1` on the circle.
///
/// Gaussian smoothing of the square wave keeps values in `[−1, 1]`; `σ`
/// makes the smoothing error `≤ ε′/2` at distance `Δ′` from the jumps and
/// the series is cut where the tail is `≤ ε′/4`.
pub fn sign_approx(delta_prime: f64, eps_prime: f64) -> Result<ApproximationReport> {
    check_unit("delta_prime", delta_prime)?;
    check_unit("eps_prime", eps_prime)?;
    let sigma = delta_prime / (2f64.sqrt() * erfc_inv(eps_prime / 4.0));
    let wave = SquareWave { sigma };
    let mut kmax = 1usize;
    while wave.tail(kmax) > eps_prime / 4.0 {
        kmax += 2;
        if kmax > DEGREE_CAP {
            return Err(Error::Budget(format!("sign degree exceeds {DEGREE_CAP}")));
        }
    }
    let plus = |_: f64| 1.0;
    let minus = |_: f64| -1.0;
    let pieces = [
        Piece {
            lo: -PI + delta_prime,
            hi: -delta_prime,
            target: &minus,
        },
        Piece {
            lo: delta_prime,
            hi: PI - delta_prime,
            target: &plus,
        },
    ];
    let ok = |k: usize| {
        let p = wave.polynomial(k);
        domain_error(&p, 1.0, &pieces) <= eps_prime && circle_sup(&p) <= 1.0 + ADMISSIBLE_TOL
    };
    let mut top = kmax;
    while !ok(top) {
        top = top * 5 / 4 + 2;
        if top > DEGREE_CAP {
            return Err(Error::Budget(format!("sign degree exceeds {DEGREE_CAP}")));
        }
    }
    let k = smallest_odd_passing(top, &ok).expect("top passes");
    Ok(report(
        "sign",
        wave.polynomial(k),
        1.0,
        &pieces,
        eps_prime,
        &[("delta_prime", delta_prime), ("sigma", sigma)],
    ))
}

/// `Δ′` shared by the sign-derived constructions.
fn derived_delta(delta: f64) -> f64 {
    (PI - 2.0).min(delta / 2.0)
}

/// Step: `P ∈ [1−ε, 1]` on `[−1, μ−Δ/2]`, `P ∈ [0, ε]` on `[μ+Δ/2, 1]`.
/// Built as `(1 + P₁(e^{i(μ−x)}))/2` from `P₁ = sign_approx(Δ′, 2ε)`.
pub fn shifted_sign(mu: f64, delta: f64, eps: f64) -> Result<ApproximationReport> {
    check_unit("delta", delta)?;
    check_unit("eps", eps)?;
    if !(-1.0..=1.0).contains(&mu) {
        return Err(invalid("mu", format!("{mu} not in [-1,1]")));
    }
    if delta > 2.0 * (mu - 1.0).abs().min((mu + 1.0).abs()) + 1e-15 {
        return Err(invalid("delta", "needs Δ ≤ 2·min(|μ−1|, |μ+1|)"));
    }
    let dp = derived_delta(delta);
    let base = sign_approx(dp, 2.0 * eps)?;
    let p = shifted_sign_from(&base.polynomial, mu);
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let pieces = [
        Piece {
            lo: -1.0,
            hi: mu - delta / 2.0,
            target: &one,
        },
        Piece {
            lo: mu + delta / 2.0,
            hi: 1.0,
            target: &zero,
        },
    ];
    Ok(report(
        "shifted-sign",
        p,
        1.0,
        &pieces,
        eps,
        &[("mu", mu), ("delta", delta), ("delta_prime", dp), ("eps_prime", 2.0 * eps)],
    ))
}

/// `(1 + P₁(e^{i(μ−x)}))/2`: coefficient `c_k e^{ikμ}` moves to `z^{−k}`.
pub fn shifted_sign_from(p1: &LaurentPolynomial, mu: f64) -> LaurentPolynomial {
    let mut out = LaurentPolynomial::zero(p1.d);
    for k in -(p1.d as i64)..=p1.d as i64 {
        *out.coeff_mut(-k) = p1.coeff(k) * C64::from_polar(0.5, k as f64 * mu);
    }
    *out.coeff_mut(0) += 0.5;
    out
}

/// `P₁(e^{i(x+a)}) + P₁(e^{i(a−x)})`, halved.
fn symmetric_pair(p1: &LaurentPolynomial, a: f64) -> LaurentPolynomial {
    let mut out = LaurentPolynomial::zero(p1.d);
    for k in -(p1.d as i64)..=p1.d as i64 {
        let w = p1.coeff(k) * C64::from_polar(0.5, k as f64 * a);
        *out.coeff_mut(k) += w;
        *out.coeff_mut(-k) += w;
    }
    out
}

/// Eigenstate filter: `P(1) ∈ [1−ε, 1]` and `P ∈ [−ε/2, ε/2]` on
/// `[−1, −Δ] ∪ [Δ, 1]`, from `(P₁(e^{i(x+Δ/2)}) + P₁(e^{i(Δ/2−x)}))/2`.
pub fn filter(delta: f64, eps: f64) -> Result<ApproximationReport> {
    check_unit("delta", delta)?;
    check_unit("eps", eps)?;
    let dp = derived_delta(delta);
    let base = sign_approx(dp, eps)?;
    let p = symmetric_pair(&base.polynomial, delta / 2.0);
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let pieces = [
        Piece {
            lo: 0.0,
            hi: 0.0,
            target: &one,
        },
        Piece {
            lo: -1.0,
            hi: -delta,
            target: &zero,
        },
        Piece {
            lo: delta,
            hi: 1.0,
            target: &zero,
        },
    ];
    let mut r = report(
        "filter",
        p,
        1.0,
        &pieces,
        eps,
        &[("delta", delta), ("delta_prime", dp), ("eps_prime", eps)],
    );
    // The band outside is ±ε/2; report the error against that stricter band.
    let outside = domain_error(&r.polynomial, 1.0, &pieces[1..]);
    let centre = domain_error(&r.polynomial, 1.0, &pieces[..1]);
    r.measured_sup_error = centre.max(2.0 * outside);
    Ok(r)
}

/// Indicator of `[−t, t]`: `P ∈ [1−ε, 1]` on `[−t+δ, t−δ]`, `P ∈ [0, ε]` on
/// `[−1, −t−δ] ∪ [t+δ, 1]`, even in `x`.
///
/// The base pair has outer values in `[−ε/2, ε/2]`; shifting by `ε/2` and
/// renormalizing moves them into `[0, ε]` and keeps `|P| ≤ 1`.
pub fn rectangle(t: f64, delta: f64, eps: f64) -> Result<ApproximationReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid("delta", format!("{delta} not in (0,1/2)")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("eps", format!("{eps} not in (0,1/2)")));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(invalid("t", format!("{t} not in [-1,1]")));
    }
    let dp = (PI - 2.0).min(delta);
    let base = sign_approx(dp, eps)?;
    let pair = symmetric_pair(&base.polynomial, t);
    let mut p = pair.scaled(c(1.0 / (1.0 + eps / 2.0), 0.0));
    *p.coeff_mut(0) += (eps / 2.0) / (1.0 + eps / 2.0);
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let mut pieces = vec![];
    if t - delta >= -(t - delta) {
        pieces.push(Piece {
            lo: -(t - delta),
            hi: t - delta,
            target: &one as &dyn Fn(f64) -> f64,
        });
    }
    let outer = (t + delta).max(0.0);
    if outer <= 1.0 {
        pieces.push(Piece {
            lo: -1.0,
            hi: -outer,
            target: &zero,
        });
        pieces.push(Piece {
            lo: outer,
            hi: 1.0,
            target: &zero,
        });
    }
    Ok(report(
        "rectangle",
        p,
        1.0,
        &pieces,
        eps,
        &[("t", t), ("delta", delta), ("delta_prime", dp), ("eps_prime", eps)],
    ))
}

/// Fourier approximation of a bounded target `g` on `x ∈ [−1, 1]` under
/// `θ = c·x`, `c = π/(2(1+δ))`.
///
/// The periodic function `(1 − ε/4)·g(clamp(θ/c))·W(θ)` uses an erf window
/// `W` that is `1 − O(ε/8)` on the domain and vanishes beyond `θ = ±π/2`;
/// `g` is evaluated only on `[−1−δ, 1+δ]`, where `|g| ≤ 1`.
struct WindowedFourier<'a> {
    g: &'a dyn Fn(f64) -> f64,
    delta: f64,
    eps: f64,
}

impl WindowedFourier<'_> {
    fn scale(&self) -> f64 {
        PI / (2.0 * (1.0 + self.delta))
    }

    fn window(&self) -> impl Fn(f64) -> f64 {
        let theta0 = self.scale();
        let a = 0.5 * (theta0 + PI / 2.0);
        let gap = a - theta0;
        // erfc(gap/w) ≤ ε/8 on the domain.
        let w = gap / erfc_inv(self.eps / 8.0);
        move |th: f64| 0.5 * (erf((th + a) / w) - erf((th - a) / w))
    }

    fn sampled(&self, n: usize) -> Vec<C64> {
        let c_arg = self.scale();
        let lim = 1.0 + self.delta;
        let win = self.window();
        (0..n)
            .map(|k| {
                let mut th = 2.0 * PI * k as f64 / n as f64;
                if th > PI {
                    th -= 2.0 * PI;
                }
                let x = (th / c_arg).clamp(-lim, lim);
                c((1.0 - self.eps / 4.0) * (self.g)(x) * win(th), 0.0)
            })
            .collect()
    }

    /// All Fourier coefficients `φ_k`, `k = −n/2..n/2`.
    fn coefficients(&self, n: usize) -> Vec<C64> {
        let mut buf = self.sampled(n);
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let s = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
        buf
    }

    fn truncate(coeffs: &[C64], d: usize) -> LaurentPolynomial {
        let n = coeffs.len();
        let mut p = LaurentPolynomial::zero(d);
        for k in 0..=d {
            *p.coeff_mut(k as i64) = coeffs[k];
            if k > 0 {
                *p.coeff_mut(-(k as i64)) = coeffs[n - k];
            }
        }
        p
    }

    /// Smallest `d` with `Σ_{|k|>d} |φ_k| ≤ ε/4`.
    fn tail_degree(coeffs: &[C64], eps: f64) -> usize {
        let n = coeffs.len();
        let half = n / 2;
        let mut tail = 0.0;
        for k in (1..half).rev() {
            tail += coeffs[k].norm() + coeffs[n - k].norm();
            if tail > eps / 4.0 {
                return k;
            }
        }
        0
    }

    fn build(&self, pieces: &[Piece<'_>]) -> Result<LaurentPolynomial> {
        let n = 1usize << 16;
        let coeffs = self.coefficients(n);
        let scale = self.scale();
        let ok = |p: &LaurentPolynomial| {
            domain_error(p, scale, pieces) <= self.eps && circle_sup(p) <= 1.0 + ADMISSIBLE_TOL
        };
        let mut d = Self::tail_degree(&coeffs, self.eps).max(1);
        loop {
            if d > DEGREE_CAP || 2 * d >= n {
                return Err(Error::Budget(format!("degree exceeds {DEGREE_CAP}")));
            }
            let p = Self::truncate(&coeffs, d);
            if ok(&p) {
                // The tail rule is a sufficient bound; tighten against the certificate.
                let (mut lo, mut hi) = (0usize, d);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if ok(&Self::truncate(&coeffs, mid)) {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                return Ok(Self::truncate(&coeffs, hi));
            }
            d = d * 5 / 4 + 1;
        }
    }
}

/// `sup_{|u| ≤ 0.75} |(1 − (1−u²)^b)/u|`, measured on a grid.
fn inverse_peak(b: u32) -> f64 {
    let gb = |u: f64| inverse_kernel(b, u);
    (1..=4000)
        .map(|i| gb(0.75 * i as f64 / 4000.0).abs())
        .fold(0.0, f64::max)
}

fn inverse_kernel(b: u32, u: f64) -> f64 {
    if u.abs() < 1e-12 {
        return 0.0;
    }
    (1.0 - (1.0 - u * u).powi(b as i32)) / u
}

/// Approximation of `1/(Bx)` on `[−1, −1/κ] ∪ [1/κ, 1]` under `θ = πx/3`.
/// Returns the report and `B`.
///
/// The target is `g(x) = g_b(x/2)/B′` with `g_b(u) = (1 − (1−u²)^b)/u` and
/// `B′ = sup_{|u|≤3/4} |g_b|`, so `B = B′/2`; `b` is the least value making
/// the kernel error `≤ ε/2`.
pub fn inverse(kappa: f64, eps: f64) -> Result<(ApproximationReport, f64)> {
    if !(kappa > 1.0) {
        return Err(invalid("kappa", "must exceed 1"));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("eps", format!("{eps} not in (0,1/2)")));
    }
    let mut b = 1u32;
    let mut bp = inverse_peak(b);
    let decay = 1.0 - 1.0 / (4.0 * kappa * kappa);
    while decay.powi(b as i32) * 2.0 * kappa / bp > eps / 2.0 {
        b += 1;
        bp = inverse_peak(b);
        if b > 1 << 22 {
            return Err(Error::Budget("inverse kernel degree".into()));
        }
    }
    let big_b = bp / 2.0;
    let g = move |x: f64| inverse_kernel(b, x / 2.0) / bp;
    let target = move |x: f64| 1.0 / (big_b * x);
    let pieces = [
        Piece {
            lo: -1.0,
            hi: -1.0 / kappa,
            target: &target,
        },
        Piece {
            lo: 1.0 / kappa,
            hi: 1.0,
            target: &target,
        },
    ];
    let engine = WindowedFourier {
        g: &g,
        delta: 0.5,
        eps: eps / 2.0,
    };
    let engine_pieces = [
        Piece {
            lo: -1.0,
            hi: -1.0 / kappa,
            target: &g,
        },
        Piece {
            lo: 1.0 / kappa,
            hi: 1.0,
            target: &g,
        },
    ];
    let p = engine.build(&engine_pieces)?;
    let r = report(
        "inverse",
        p,
        engine.scale(),
        &pieces,
        eps,
        &[("kappa", kappa), ("B", big_b), ("b", b as f64), ("delta", 0.5)],
    );
    Ok((r, big_b))
}

/// `e^{β(x−1)−1}` on `[−1, 1]` under `θ = πx/(2(1+1/β))`.
pub fn exponential(beta: f64, eps: f64) -> Result<ApproximationReport> {
    if !(beta > 1.0) {
        return Err(invalid("beta", "must exceed 1"));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("eps", format!("{eps} not in (0,1/2)")));
    }
    let g = move |x: f64| (beta * (x - 1.0) - 1.0).exp();
    let pieces = [Piece {
        lo: -1.0,
        hi: 1.0,
        target: &g,
    }];
    let engine = WindowedFourier {
        g: &g,
        delta: 1.0 / beta,
        eps,
    };
    let p = engine.build(&pieces)?;
    Ok(report(
        "exponential",
        p,
        engine.scale(),
        &pieces,
        eps,
        &[("beta", beta), ("delta", 1.0 / beta), ("B", 1.0)],
    ))
}

/// `q(x) = Σ_j q_j x^j` on `[−1, 1]` under `θ = πx/(2(1+δ))`.
pub fn poly_to_laurent(q: &[f64], delta: f64, eps: f64) -> Result<ApproximationReport> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid("delta", format!("{delta} not in (0,1/2]")));
    }
    check_unit("eps", eps)?;
    if q.is_empty() {
        return Err(invalid("q", "empty coefficient list"));
    }
    let eval = |x: f64| q.iter().rev().fold(0.0, |acc, a| acc * x + a);
    let lim = 1.0 + delta;
    let peak = chebyshev_points(-lim, lim, 4 * DOMAIN_GRID)
        .into_iter()
        .map(|x| eval(x).abs())
        .fold(0.0, f64::max);
    if peak > 1.0 + 1e-12 {
        return Err(invalid("q", format!("|q| reaches {peak} on [−1−δ, 1+δ]")));
    }
    let pieces = [Piece {
        lo: -1.0,
        hi: 1.0,
        target: &eval,
    }];
    let scale = PI / (2.0 * (1.0 + delta));
    let nonconstant = q.iter().skip(1).any(|a| *a != 0.0);
    let p = if nonconstant {
        WindowedFourier { g: &eval, delta, eps }.build(&pieces)?
    } else {
        LaurentPolynomial::constant(c(q[0], 0.0))
    };
    Ok(report("poly2laurent", p, scale, &pieces, eps, &[("delta", delta)]))
}

/// Erfc-based parameter `σ` of `sign_approx`, exposed for reports.
pub fn sign_sigma(delta_prime: f64, eps_prime: f64) -> f64 {
    delta_prime / (2f64.sqrt() * erfc_inv(eps_prime / 4.0))
}

/// Smoothing error bound `2·erfc(Δ′/(σ√2))` for a given `σ`.
pub fn smoothing_error(delta_prime: f64, sigma: f64) -> f64 {
    2.0 * erfc(delta_prime / (sigma * 2f64.sqrt()))
}
