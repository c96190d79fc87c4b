//! Free holomorphic automorphisms of the noncommutative unit ball.
//!
//! Every automorphism is `Φ_U ∘ Ψ_λ` with `Φ_U(X) = [X_1 ... X_n] U` and the
//! involutive Möbius map
//! `Ψ_λ(X) = λ - Δ_λ (I - Σ λ̄_i X_i)^{-1} [X_1 ... X_n] Δ_{λ*}`.
//! Composition and inversion are carried out on the pair `(U, λ)` and
//! certified by evaluating both sides at random scalar points.

use nalgebra::Schur;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{creation_ops, FockSpace, Side};
use crate::numerics::{
    c, hermitian_eigen, identity, isometry_defect, matmul, op_norm, psd_sqrt, row_norm, zeros, CMatrix,
    Tolerance, C64,
};
use crate::sample::ball_point_within;

/// Seed of the scalar probes used to certify compositions and inverses.
const PROBE_SEED: u64 = 0x5eed_ba11;
pub const PROBE_COUNT: usize = 20;
pub const PROBE_TOL: f64 = 1e-9;

/// `Φ_U ∘ Ψ_λ`, stored as the unitary `U` and the point `λ = φ^{-1}(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AutElement {
    u: CMatrix,
    lambda: Vec<C64>,
}

impl AutElement {
    pub fn new(u: CMatrix, lambda: Vec<C64>) -> Result<Self> {
        let n = lambda.len();
        if n == 0 || u.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "U must be {n}x{n} for λ of length {n}, got {:?}",
                u.shape()
            )));
        }
        let defect = isometry_defect(&u);
        if defect > Tolerance::default().residual_abs {
            return Err(Error::NotUnitary { defect });
        }
        let norm = euclid(&lambda);
        if norm.is_nan() || norm >= 1.0 - 1e-12 {
            return Err(Error::OutsideBall { norm });
        }
        Ok(AutElement { u, lambda })
    }

    /// The identity map `X ↦ X`, which is `Φ_{-I} ∘ Ψ_0` since `Ψ_0(X) = -X`.
    pub fn identity(n: usize) -> Self {
        AutElement { u: -identity(n), lambda: vec![c(0.0, 0.0); n] }
    }

    /// `Ψ_λ` alone.
    pub fn psi(lambda: Vec<C64>) -> Result<Self> {
        let n = lambda.len();
        AutElement::new(identity(n), lambda)
    }

    /// `Φ_U ∘ Ψ_0`, i.e. `X ↦ -XU`.
    pub fn linear(u: CMatrix) -> Result<Self> {
        let n = u.nrows();
        AutElement::new(u, vec![c(0.0, 0.0); n])
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn lambda(&self) -> &[C64] {
        &self.lambda
    }

    pub fn lambda_norm(&self) -> f64 {
        euclid(&self.lambda)
    }
}

pub(crate) fn euclid(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Δ_λ = (1 - ‖λ‖²)^{1/2}`
pub fn delta_lambda(lambda: &[C64]) -> f64 {
    (1.0 - lambda.iter().map(|z| z.norm_sqr()).sum::<f64>()).max(0.0).sqrt()
}

/// `Δ_{λ*} = (I_n - λ^*λ)^{1/2}`
pub fn delta_lambda_star(lambda: &[C64]) -> Result<CMatrix> {
    let n = lambda.len();
    let outer = CMatrix::from_fn(n, n, |i, j| lambda[i].conj() * lambda[j]);
    psd_sqrt(&(identity(n) - outer), &Tolerance::default())
}

fn check_tuple(n: usize, xs: &[CMatrix]) -> Result<usize> {
    if xs.len() != n {
        return Err(Error::DimensionMismatch(format!("expected {n} matrices, got {}", xs.len())));
    }
    let k = xs[0].nrows();
    if xs.iter().any(|x| x.shape() != (k, k)) {
        return Err(Error::ShapeMismatch("tuple entries must share a square shape".into()));
    }
    Ok(k)
}

/// `Ψ_λ(X)` for a tuple of `k x k` matrices.
pub fn psi_eval(lambda: &[C64], xs: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let n = lambda.len();
    let k = check_tuple(n, xs)?;
    let mut a = identity(k);
    for (l, x) in lambda.iter().zip(xs) {
        a -= x * l.conj();
    }
    let resolvent = a.lu().try_inverse();
    let resolvent = match resolvent {
        Some(r) if r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => r,
        _ => return Err(Error::NearSingularResolvent { sigma: 0.0 }),
    };
    // 1/‖R‖_F bounds the smallest singular value from below
    let sigma = 1.0 / resolvent.norm();
    if sigma < 1e-10 {
        return Err(Error::NearSingularResolvent { sigma });
    }
    let dl = delta_lambda(lambda);
    let dls = delta_lambda_star(lambda)?;
    let rx: Vec<CMatrix> = xs.iter().map(|x| matmul(&resolvent, x)).collect();
    Ok((0..n)
        .map(|j| {
            let mut out = identity(k) * lambda[j];
            for (i, m) in rx.iter().enumerate() {
                out -= m * (dls[(i, j)] * dl);
            }
            out
        })
        .collect())
}

/// `φ(X) = Φ_U(Ψ_λ(X))`, componentwise `Σ_i Ψ_λ(X)_i U_{ij}`.
pub fn aut_apply(phi: &AutElement, xs: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let ys = psi_eval(&phi.lambda, xs)?;
    Ok(apply_unitary(&phi.u, &ys))
}

/// `Φ_U(Y)`
pub fn apply_unitary(u: &CMatrix, ys: &[CMatrix]) -> Vec<CMatrix> {
    let k = ys[0].nrows();
    (0..u.ncols())
        .map(|j| {
            let mut out = zeros(k, k);
            for (i, y) in ys.iter().enumerate() {
                out += y * u[(i, j)];
            }
            out
        })
        .collect()
}

/// `φ(x)` at a scalar point of the ball.
pub fn apply_scalar(phi: &AutElement, x: &[C64]) -> Result<Vec<C64>> {
    let xs: Vec<CMatrix> = x.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect();
    Ok(aut_apply(phi, &xs)?.iter().map(|m| m[(0, 0)]).collect())
}

fn psi_scalar(lambda: &[C64], x: &[C64]) -> Result<Vec<C64>> {
    let xs: Vec<CMatrix> = x.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect();
    Ok(psi_eval(lambda, &xs)?.iter().map(|m| m[(0, 0)]).collect())
}

/// Row vector times matrix.
fn row_times(x: &[C64], m: &CMatrix) -> Vec<C64> {
    (0..m.ncols()).map(|j| x.iter().enumerate().map(|(i, v)| v * m[(i, j)]).sum()).collect()
}

/// Standard form `(Ω, z)` of a map whose inverse sends 0 to `z`, read off from
/// `g ∘ Ψ_z = Φ_Ω`, which is linear: `Ω_{i,:} = 2 g(Ψ_z(e_i/2))`.
fn standard_form<F>(n: usize, z: Vec<C64>, g: F) -> Result<AutElement>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let mut omega = zeros(n, n);
    for i in 0..n {
        let mut e = vec![c(0.0, 0.0); n];
        e[i] = c(0.5, 0.0);
        let row = g(&psi_scalar(&z, &e)?)?;
        for (j, v) in row.iter().enumerate() {
            omega[(i, j)] = v * 2.0;
        }
    }
    AutElement::new(omega, z).map_err(|e| Error::CertificationFailed(format!("standard form: {e}")))
}

/// Largest deviation between `lhs` and `rhs` on the fixed scalar probes.
pub fn probe_gap<F, G>(n: usize, lhs: F, rhs: G) -> Result<f64>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
    G: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut worst = 0.0_f64;
    for _ in 0..PROBE_COUNT {
        let x = ball_point_within(n, 0.95, &mut rng);
        let a = lhs(&x)?;
        let b = rhs(&x)?;
        let gap: Vec<C64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        worst = worst.max(euclid(&gap));
    }
    Ok(worst)
}

fn check_same_n(phi: &AutElement, psi: &AutElement) -> Result<()> {
    if phi.n() != psi.n() {
        return Err(Error::DimensionMismatch(format!("n = {} vs n = {}", phi.n(), psi.n())));
    }
    Ok(())
}

/// Standard form of `φ ∘ ψ`.
pub fn compose(phi: &AutElement, psi: &AutElement) -> Result<AutElement> {
    check_same_n(phi, psi)?;
    let n = phi.n();
    // (φ∘ψ)^{-1}(0) = ψ^{-1}(λ) = Ψ_μ(λ W^*)
    let z = psi_scalar(&psi.lambda, &row_times(&phi.lambda, &psi.u.adjoint()))?;
    let both = |x: &[C64]| apply_scalar(phi, &apply_scalar(psi, x)?);
    let out = standard_form(n, z, both)?;
    let gap = probe_gap(n, |x| apply_scalar(&out, x), both)?;
    if gap > PROBE_TOL {
        return Err(Error::CertificationFailed(format!("composition probes differ by {gap:.3e}")));
    }
    Ok(out)
}

/// Standard form of `φ^{-1} = Ψ_λ ∘ Φ_{U^*}`.
pub fn invert(phi: &AutElement) -> Result<AutElement> {
    let n = phi.n();
    let z = row_times(&phi.lambda, &phi.u);
    let uh = phi.u.adjoint();
    let inverse = |x: &[C64]| psi_scalar(&phi.lambda, &row_times(x, &uh));
    let out = standard_form(n, z, inverse)?;
    let gap = probe_gap(n, |x| apply_scalar(&out, &apply_scalar(phi, x)?), |x| Ok(x.to_vec()))?;
    if gap > PROBE_TOL {
        return Err(Error::CertificationFailed(format!("inverse probes differ by {gap:.3e}")));
    }
    Ok(out)
}

/// A closed interval of reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Bounds on `‖φ - ψ‖_∞` from the boundary values at truncated shifts.
///
/// The lower end is attained at `S^{(N)}`, a point of the closed ball. The
/// upper end adds `C ρ^{N-1}/(1-ρ)` with `C = 4/(1-ρ)` and `ρ` the larger of
/// the two `‖λ‖`, following the geometric decay of the `Ψ_λ` series.
pub fn sup_norm_est(phi: &AutElement, psi: &AutElement, depth: usize) -> Result<Interval> {
    check_same_n(phi, psi)?;
    if depth < 2 {
        return Err(Error::DimensionMismatch("sup-norm estimates need depth >= 2".into()));
    }
    let fock = FockSpace::new(phi.n(), depth)?;
    let shifts = creation_ops(&fock, Side::Left);
    let a = aut_apply(phi, &shifts)?;
    let b = aut_apply(psi, &shifts)?;
    let diff: Vec<CMatrix> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let lower = row_norm(&diff);
    let rho = phi.lambda_norm().max(psi.lambda_norm());
    let tail = if rho == 0.0 {
        0.0
    } else {
        4.0 / (1.0 - rho) * rho.powi(depth as i32 - 1) / (1.0 - rho)
    };
    Ok(Interval { lower, upper: lower + tail })
}

/// `d_E(φ, ψ) = ‖φ - ψ‖_∞ + ‖φ^{-1}(0) - ψ^{-1}(0)‖` as an interval.
pub fn d_e(phi: &AutElement, psi: &AutElement, depth: usize) -> Result<Interval> {
    let sup = sup_norm_est(phi, psi, depth)?;
    let diff: Vec<C64> = phi.lambda.iter().zip(&psi.lambda).map(|(a, b)| a - b).collect();
    let e = euclid(&diff);
    Ok(Interval { lower: sup.lower + e, upper: sup.upper + e })
}

/// `‖Σ λ̄_i R_i^{(N)}‖`, which equals `‖λ‖` for the truncated right shifts.
pub fn right_shift_calibration(lambda: &[C64], depth: usize) -> Result<f64> {
    let fock = FockSpace::new(lambda.len(), depth)?;
    let r = creation_ops(&fock, Side::Right);
    let mut acc = zeros(fock.dim(), fock.dim());
    for (l, ri) in lambda.iter().zip(&r) {
        acc += ri * l.conj();
    }
    Ok(op_norm(&acc))
}

/// Principal logarithm of a unitary, a skew-Hermitian matrix.
pub fn unitary_log(u: &CMatrix) -> Result<CMatrix> {
    let defect = isometry_defect(u);
    if defect > Tolerance::default().residual_abs {
        return Err(Error::NotUnitary { defect });
    }
    let n = u.nrows();
    let (q, t) = Schur::new(u.clone()).unpack();
    let logs = CMatrix::from_fn(n, n, |i, j| if i == j { c(0.0, t[(i, i)].arg()) } else { c(0.0, 0.0) });
    let out = &q * logs * q.adjoint();
    Ok((&out - out.adjoint()).scale(0.5))
}

/// `exp(A)` for skew-Hermitian `A`.
pub fn expm_skew(a: &CMatrix) -> CMatrix {
    let h = a * c(0.0, 1.0);
    let (values, vectors) = hermitian_eigen(&h);
    let n = a.nrows();
    let phases = CMatrix::from_fn(n, n, |i, j| if i == j { C64::from_polar(1.0, -values[i]) } else { c(0.0, 0.0) });
    &vectors * phases * vectors.adjoint()
}

/// The point `t ↦ (exp(t log U), tλ)` on a path from `(I, 0)` to `φ`.
pub fn path_point(phi: &AutElement, t: f64) -> Result<AutElement> {
    let log = unitary_log(&phi.u)?;
    let lambda = phi.lambda.iter().map(|z| z * t).collect();
    AutElement::new(expm_skew(&log.scale(t)), lambda)
}
