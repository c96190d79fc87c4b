//! Dense complex matrix kernel.
//!
//! Everything above this module talks about operators on small complex
//! Hilbert spaces, so the kernel is deliberately narrow: Hermitian
//! eigendecomposition, singular values, positive square roots and an
//! orthonormal-frame representation of subspaces. All rank decisions go
//! through [`Tolerance`] so a single configuration governs the whole crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerances shared by every numerical decision in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Absolute residual accepted for identities that hold exactly in theory.
    pub residual_abs: f64,
    /// Step size at which fixed-point iterations stop.
    pub fixed_point_abs: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-9,
            residual_abs: 1e-8,
            fixed_point_abs: 1e-12,
            max_iter: 10_000,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidTolerance(format!("{name} must be positive, got {v}")))
            }
        };
        positive("rank_rel", self.rank_rel)?;
        positive("residual_abs", self.residual_abs)?;
        positive("fixed_point_abs", self.fixed_point_abs)?;
        if self.max_iter == 0 {
            return Err(Error::InvalidTolerance("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Cutoff for singular values of an `rows x cols` matrix whose natural
    /// scale is `scale`.
    pub fn rank_cutoff(&self, scale: f64, rows: usize, cols: usize) -> f64 {
        self.rank_rel * scale * rows.max(cols).max(1) as f64
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Builds a real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Builds a matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols);
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&v| c(v, 0.0)))
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hermitian part `(A + A^*)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues (descending) and eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = hermitian_part(a);
    if let Some((mut values, mut vectors)) = crate::dense::heev(&h) {
        values.reverse();
        let flipped = CMatrix::from_fn(n, n, |i, j| vectors[(i, n - 1 - j)]);
        vectors = flipped;
        return (values, vectors);
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues of the Hermitian part of `a`, descending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    match crate::dense::eigvalsh(&hermitian_part(a)) {
        Some(mut values) => {
            values.reverse();
            values
        }
        None => hermitian_eigen(a).0,
    }
}

/// Largest eigenvalue of the Hermitian part of `a` (0 for the empty matrix).
pub fn lambda_max(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// Largest absolute eigenvalue of a Hermitian matrix, i.e. its operator norm.
pub fn hermitian_norm(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let gram = if a.nrows() <= a.ncols() {
        matmul(a, &a.adjoint())
    } else {
        matmul(&a.adjoint(), a)
    };
    lambda_max(&gram).max(0.0).sqrt()
}

/// Norm of the row operator `[X_1 ... X_n]`, i.e. `||sum X_i X_i^*||^{1/2}`.
pub fn row_norm(xs: &[CMatrix]) -> f64 {
    match xs.first() {
        None => 0.0,
        Some(x0) => {
            let mut acc = zeros(x0.nrows(), x0.nrows());
            for x in xs {
                acc += x * x.adjoint();
            }
            lambda_max(&acc).max(0.0).sqrt()
        }
    }
}

/// Singular values in descending order together with the matching left and
/// right singular vectors (thin factorization).
pub(crate) fn svd_sorted(a: &CMatrix) -> (Vec<f64>, CMatrix, CMatrix) {
    let (r, cols) = a.shape();
    let k = r.min(cols);
    if k == 0 {
        return (Vec::new(), zeros(r, 0), zeros(cols, 0));
    }
    if let Some(out) = crate::dense::svd(a) {
        return out;
    }
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut us = zeros(r, k);
    let mut vs = zeros(cols, k);
    for (slot, &i) in order.iter().enumerate() {
        us.set_column(slot, &u.column(i));
        vs.set_column(slot, &v_t.row(i).adjoint());
    }
    (values, us, vs)
}

/// Singular values and the complete right factor of a wide matrix.
fn right_factor_full(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    if let Some((values, _, v)) = crate::dense::svd_full(a) {
        return (values, v);
    }
    // pad to square so the fallback factorization yields a full right basis
    let cols = a.ncols();
    let mut p = zeros(cols, cols);
    p.view_mut((0, 0), a.shape()).copy_from(a);
    let (values, _, v) = svd_sorted(&p);
    (values, v)
}

/// Positive square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-rank_rel*||A||, 0)` are clamped to zero; anything more
/// negative is reported.
pub fn psd_sqrt(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let scale = hermitian_norm_checked(a, tol)?;
    psd_sqrt_impl(a, tol.rank_rel * scale, false, tol).map(|(root, _)| root)
}

/// Positive square root of `A` together with the closure of its range, for
/// matrices of the form `I - X` whose natural scale is 1.
///
/// Eigenvalues of magnitude at most `rank_rel` are treated as roundoff and
/// set to zero, so the returned range has the same rank as the root.
pub fn defect_root(a: &CMatrix, tol: &Tolerance) -> Result<(CMatrix, Subspace)> {
    let scale = hermitian_norm_checked(a, tol)?.max(1.0);
    psd_sqrt_impl(a, tol.rank_rel * scale, true, tol)
}

fn hermitian_norm_checked(a: &CMatrix, tol: &Tolerance) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "square matrix expected, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let size = max_abs(a);
    let asymmetry = max_abs(&(a - a.adjoint()));
    if asymmetry > tol.residual_abs * size.max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(hermitian_norm(a))
}

fn psd_sqrt_impl(
    a: &CMatrix,
    threshold: f64,
    zero_small_positive: bool,
    tol: &Tolerance,
) -> Result<(CMatrix, Subspace)> {
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(a);
    let mut roots = Vec::with_capacity(n);
    let mut range_cols = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        if v < -threshold {
            return Err(Error::SignificantlyNegativeEigenvalue { value: v, threshold });
        }
        let kept = if zero_small_positive { v > threshold } else { v > 0.0 };
        if kept {
            roots.push(v.sqrt());
            range_cols.push(k);
        } else {
            roots.push(0.0);
        }
    }
    let scaled = CMatrix::from_fn(n, n, |i, j| vectors[(i, j)] * roots[j]);
    let root = hermitian_part(&matmul(&scaled, &vectors.adjoint()));
    let range = Subspace::from_orthonormal(select_columns(&vectors, &range_cols), tol.rank_rel);
    Ok((root, range))
}

pub(crate) fn select_columns(a: &CMatrix, cols: &[usize]) -> CMatrix {
    let mut out = zeros(a.nrows(), cols.len());
    for (k, &j) in cols.iter().enumerate() {
        out.set_column(k, &a.column(j));
    }
    out
}

/// Horizontal concatenation `[A_1 A_2 ...]`.
pub fn hstack(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vstack(blocks: &[CMatrix]) -> CMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Block-diagonal matrix.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut cc) = (0, 0);
    for b in blocks {
        out.view_mut((r, cc), b.shape()).copy_from(b);
        r += b.nrows();
        cc += b.ncols();
    }
    out
}

/// Polar (unitary) factor `U V^*` of a square matrix `U S V^*`.
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    let (_, u, v) = svd_sorted(a);
    u * v.adjoint()
}

/// `A B` computed as four real products, which reach the blocked real kernel
/// and are several times faster than the generic complex product at Fock sizes.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    if a.nrows() * a.ncols() * b.ncols() < 32 * 32 * 32 {
        return a * b;
    }
    crate::dense::gemm(a, b)
}

/// `||A^* A - I||` measured entrywise; zero for exact unitaries/isometries.
pub fn isometry_defect(a: &CMatrix) -> f64 {
    max_abs(&(matmul(&a.adjoint(), a) - identity(a.ncols())))
}

/// A subspace of `C^m` represented by an orthonormal column frame.
///
/// Frames come out of singular-value factorizations and are therefore only
/// defined up to a unitary change of basis; compare subspaces through
/// [`Subspace::projector`] or [`Subspace::same_as`], never through frames.
#[derive(Clone, Debug)]
pub struct Subspace {
    frame: CMatrix,
    tol: f64,
}

impl Subspace {
    /// Wraps a frame already known to have orthonormal columns.
    pub fn from_orthonormal(frame: CMatrix, tol: f64) -> Self {
        Subspace { frame, tol }
    }

    /// Validates orthonormality before wrapping.
    pub fn try_from_frame(frame: CMatrix, tol: &Tolerance) -> Result<Self> {
        let defect = isometry_defect(&frame);
        if defect > tol.residual_abs {
            return Err(Error::CertificationFailed(format!(
                "frame is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Subspace { frame, tol: tol.rank_rel })
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace { frame: zeros(ambient, 0), tol: 0.0 }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { frame: identity(ambient), tol: 0.0 }
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Self {
        let mut frame = zeros(ambient, indices.len());
        for (k, &i) in indices.iter().enumerate() {
            frame[(i, k)] = ONE;
        }
        Subspace { frame, tol: 0.0 }
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn into_frame(self) -> CMatrix {
        self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn projector(&self) -> CMatrix {
        matmul(&self.frame, &self.frame.adjoint())
    }

    /// Distance `||(I - P) F_other||` of another subspace from this one.
    pub fn containment_gap(&self, other: &Subspace) -> f64 {
        if other.is_zero() {
            return 0.0;
        }
        let resid = other.frame() - matmul(&self.frame, &matmul(&self.frame.adjoint(), other.frame()));
        op_norm(&resid)
    }

    /// Projector distance to `other`.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.ambient_dim() != other.ambient_dim() {
            return f64::INFINITY;
        }
        if self.dim() != other.dim() {
            return 1.0;
        }
        hermitian_norm(&(self.projector() - other.projector()))
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Image of the subspace under a unitary (or isometric) map.
    pub fn mapped_by_isometry(&self, u: &CMatrix) -> Subspace {
        Subspace { frame: matmul(u, &self.frame), tol: self.tol }
    }

    /// Embeds `C^m` into `C^total` at row offset `offset`.
    pub fn embedded(&self, total: usize, offset: usize) -> Subspace {
        let mut frame = zeros(total, self.dim());
        frame
            .view_mut((offset, 0), self.frame.shape())
            .copy_from(&self.frame);
        Subspace { frame, tol: self.tol }
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self, tol: &Tolerance) -> Subspace {
        let m = self.ambient_dim();
        if self.is_zero() {
            return Subspace::full(m);
        }
        null_space_scaled(&self.frame.adjoint(), 1.0, tol)
    }
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::AmbientMismatch { left: a.ambient_dim(), right: b.ambient_dim() });
    }
    Ok(())
}

/// Column space with the relative cutoff `rank_rel * sigma_max * max(rows, cols)`.
pub fn col_space(a: &CMatrix, tol: &Tolerance) -> Subspace {
    col_space_scaled(a, 0.0, tol)
}

/// Column space with cutoff `rank_rel * max(sigma_max, scale) * max(rows, cols)`.
///
/// Operator-theoretic constructions pass `scale = 1`: their inputs are
/// contractions applied to orthonormal frames, so roundoff is absolute and
/// a purely relative cutoff would promote noise to rank.
pub fn col_space_scaled(a: &CMatrix, scale: f64, tol: &Tolerance) -> Subspace {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Subspace::zero(rows);
    }
    if cols >= rows {
        if let Some((rank, u)) = gram_split(&matmul(a, &a.adjoint()), scale, rows, cols, tol) {
            return Subspace::from_orthonormal(u.columns(0, rank).into_owned(), tol.rank_rel);
        }
    } else if let Some((rank, v)) = gram_split(&matmul(&a.adjoint(), a), scale, rows, cols, tol) {
        let image = matmul(a, &v.columns(0, rank).into_owned());
        let q = image.qr().q();
        return Subspace::from_orthonormal(q, tol.rank_rel);
    }
    let (values, u, _) = svd_sorted(a);
    let smax = values.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_cutoff(smax.max(scale), rows, cols);
    let rank = values.iter().take_while(|&&s| s > cutoff).count();
    Subspace::from_orthonormal(u.columns(0, rank).into_owned(), tol.rank_rel)
}

/// Kernel of `a` with the relative cutoff.
pub fn null_space(a: &CMatrix, tol: &Tolerance) -> Subspace {
    null_space_scaled(a, 0.0, tol)
}

/// Kernel of `a` with cutoff `rank_rel * max(sigma_max, scale) * max(rows, cols)`.
pub fn null_space_scaled(a: &CMatrix, scale: f64, tol: &Tolerance) -> Subspace {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Subspace::zero(0);
    }
    if rows == 0 {
        return Subspace::full(cols);
    }
    if let Some((rank, v)) = gram_split(&matmul(&a.adjoint(), a), scale, rows, cols, tol) {
        return Subspace::from_orthonormal(v.columns(rank, cols - rank).into_owned(), tol.rank_rel);
    }
    let (values, v) = if rows < cols {
        right_factor_full(a)
    } else {
        let (values, _, v) = svd_sorted(a);
        (values, v)
    };
    let smax = values.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_cutoff(smax.max(scale), rows, cols);
    let rank = values.iter().take_while(|&&s| s > cutoff).count();
    Subspace::from_orthonormal(v.columns(rank, cols - rank).into_owned(), tol.rank_rel)
}

/// Squared singular values below this fraction of the squared scale are
/// too close to the cutoff for a Gram matrix to separate reliably.
const GRAM_GAP: f64 = 1e-4;

/// Rank decision from the Gram matrix `G = A A^*` or `A^* A` of an
/// `rows x cols` matrix `A`: the rank under the singular-value cutoff and
/// the eigenvectors of `G` in descending order.
///
/// Squaring the singular values halves the available precision, so this
/// only answers when every retained singular value sits well above the
/// cutoff and the caller falls back to an SVD otherwise.
fn gram_split(g: &CMatrix, scale: f64, rows: usize, cols: usize, tol: &Tolerance) -> Option<(usize, CMatrix)> {
    let (values, vectors) = hermitian_eigen(g);
    let smax = values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let top = smax.max(scale);
    let cutoff = tol.rank_cutoff(top, rows, cols);
    let rank = values.iter().take_while(|&&l| l > cutoff * cutoff).count();
    let clear = values[..rank].iter().all(|&l| l >= GRAM_GAP * top * top);
    clear.then_some((rank, vectors))
}

/// Closed linear span of two subspaces.
pub fn subspace_sum(s1: &Subspace, s2: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_ambient(s1, s2)?;
    Ok(col_space_scaled(&hstack(&[s1.frame().clone(), s2.frame().clone()]), 1.0, tol))
}

/// Intersection, computed as the part of `s1` annihilated by `I - P_{s2}`.
pub fn subspace_intersect(s1: &Subspace, s2: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_ambient(s1, s2)?;
    if s1.is_zero() || s2.is_zero() {
        return Ok(Subspace::zero(s1.ambient_dim()));
    }
    let leak = s1.frame() - matmul(s2.frame(), &matmul(&s2.frame().adjoint(), s1.frame()));
    let coeffs = null_space_scaled(&leak, 1.0, tol);
    Ok(Subspace::from_orthonormal(s1.frame() * coeffs.frame(), tol.rank_rel))
}

/// `s_big ⊖ s_small`; requires `s_small ⊆ s_big`.
pub fn ortho_complement_in(
    s_small: &Subspace,
    s_big: &Subspace,
    tol: &Tolerance,
) -> Result<Subspace> {
    check_ambient(s_small, s_big)?;
    let gap = s_big.containment_gap(s_small);
    if gap > tol.residual_abs.max(tol.rank_rel * s_big.ambient_dim() as f64) {
        return Err(Error::NotContained { gap });
    }
    Ok(complement_within(s_small, s_big, tol))
}

/// The part of `s_big` orthogonal to `other`, without a containment check.
pub fn complement_within(other: &Subspace, s_big: &Subspace, tol: &Tolerance) -> Subspace {
    if other.is_zero() || s_big.is_zero() {
        return s_big.clone();
    }
    let overlap = matmul(&other.frame().adjoint(), s_big.frame());
    let coeffs = null_space_scaled(&overlap, 1.0, tol);
    Subspace::from_orthonormal(s_big.frame() * coeffs.frame(), tol.rank_rel)
}

/// Compression `F_cod^* A F_dom`.
pub fn compress(a: &CMatrix, dom: &Subspace, cod: &Subspace) -> Result<CMatrix> {
    if a.ncols() != dom.ambient_dim() {
        return Err(Error::AmbientMismatch { left: a.ncols(), right: dom.ambient_dim() });
    }
    if a.nrows() != cod.ambient_dim() {
        return Err(Error::AmbientMismatch { left: a.nrows(), right: cod.ambient_dim() });
    }
    Ok(matmul(&matmul(&cod.frame().adjoint(), a), dom.frame()))
}
