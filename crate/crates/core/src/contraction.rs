//! Row contractions, their defect operators, the noncommutative Poisson
//! kernel and the subspaces built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, Word};
use crate::numerics::{
    block_diag, col_space_scaled, defect_root, hstack, identity, is_finite, lambda_max, matmul,
    null_space_scaled, vstack, zeros, CMatrix, Subspace, Tolerance, C64,
};

/// An `n`-tuple of `d x d` matrices with `Σ T_i T_i^* <= I`.
#[derive(Clone, Debug)]
pub struct RowTuple {
    mats: Vec<CMatrix>,
    tol: Tolerance,
}

impl RowTuple {
    /// Certifies `λ_max(Σ T_i T_i^*) <= 1 + residual_abs`.
    pub fn new(mats: Vec<CMatrix>, tol: Tolerance) -> Result<Self> {
        tol.validate()?;
        let first = mats
            .first()
            .ok_or_else(|| Error::ShapeMismatch("a tuple needs at least one matrix".into()))?;
        let d = first.nrows();
        for (i, m) in mats.iter().enumerate() {
            if m.shape() != (d, d) {
                return Err(Error::ShapeMismatch(format!(
                    "T_{} has shape {:?}, expected {d}x{d}",
                    i + 1,
                    m.shape()
                )));
            }
            if !is_finite(m) {
                return Err(Error::ShapeMismatch(format!("T_{} has non-finite entries", i + 1)));
            }
        }
        let largest = lambda_max(&row_gram(&mats));
        if largest > 1.0 + tol.residual_abs {
            return Err(Error::NotARowContraction { largest });
        }
        Ok(RowTuple { mats, tol })
    }

    /// For tuples whose row-contraction certificate was obtained by other means.
    pub(crate) fn from_certified(mats: Vec<CMatrix>, tol: Tolerance) -> Self {
        RowTuple { mats, tol }
    }

    pub fn zero(n: usize, d: usize) -> Self {
        RowTuple { mats: vec![zeros(d, d); n], tol: Tolerance::default() }
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Result<Self> {
        tol.validate()?;
        self.tol = tol;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    /// `[T_1 ... T_n]` as a `d x nd` matrix.
    pub fn row_operator(&self) -> CMatrix {
        hstack(&self.mats)
    }

    /// `||Σ T_i T_i^*||^{1/2}`
    pub fn row_norm(&self) -> f64 {
        lambda_max(&row_gram(&self.mats)).max(0.0).sqrt()
    }

    /// `(U T_1 U^*, ..., U T_n U^*)`
    pub fn conjugated_by(&self, u: &CMatrix) -> Result<RowTuple> {
        if u.shape() != (self.dim(), self.dim()) {
            return Err(Error::ShapeMismatch("conjugating unitary has the wrong size".into()));
        }
        let mats = self.mats.iter().map(|t| u * t * u.adjoint()).collect();
        RowTuple::new(mats, self.tol)
    }

    /// `r T` for a scalar `|r| <= 1`.
    pub fn scaled(&self, r: C64) -> Result<RowTuple> {
        RowTuple::new(self.mats.iter().map(|t| t * r).collect(), self.tol)
    }

    pub fn direct_sum(&self, other: &RowTuple) -> Result<RowTuple> {
        if self.n() != other.n() {
            return Err(Error::ShapeMismatch(format!(
                "cannot sum tuples with {} and {} entries",
                self.n(),
                other.n()
            )));
        }
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| block_diag(&[a.clone(), b.clone()]))
            .collect();
        RowTuple::new(mats, self.tol)
    }

    /// `Φ(X) = Σ T_i X T_i^*`
    pub fn apply_phi(&self, x: &CMatrix) -> CMatrix {
        let mut acc = zeros(self.dim(), self.dim());
        for t in &self.mats {
            acc += matmul(&matmul(t, x), &t.adjoint());
        }
        acc
    }

    /// `Φ^k(I)`
    pub fn phi_power_identity(&self, k: usize) -> CMatrix {
        (0..k).fold(identity(self.dim()), |q, _| self.apply_phi(&q))
    }

    /// `T_α = T_{α_1} ⋯ T_{α_k}`
    pub fn word_product(&self, w: &Word) -> CMatrix {
        fock::word_product(&self.mats, w)
    }
}

fn row_gram(mats: &[CMatrix]) -> CMatrix {
    let d = mats[0].nrows();
    let mut acc = zeros(d, d);
    for t in mats {
        acc += matmul(t, &t.adjoint());
    }
    acc
}

/// Defect operators and defect spaces of a row contraction.
#[derive(Clone, Debug)]
pub struct DefectData {
    /// `Δ_T = (I - Σ T_i T_i^*)^{1/2}` on `C^d`.
    pub delta_t: CMatrix,
    /// `Δ_{T*} = (I - T^*T)^{1/2}` on `C^{nd}`.
    pub delta_tstar: CMatrix,
    pub d_t: Subspace,
    pub d_tstar: Subspace,
}

/// `Δ_T` together with `D_T`.
pub fn defect_t(t: &RowTuple) -> Result<(CMatrix, Subspace)> {
    let d = t.dim();
    defect_root(&(identity(d) - row_gram(t.mats())), t.tol())
}

pub fn defects(t: &RowTuple) -> Result<DefectData> {
    let (delta_t, d_t) = defect_t(t)?;
    let row = t.row_operator();
    let nd = row.ncols();
    let (delta_tstar, d_tstar) = defect_root(&(identity(nd) - matmul(&row.adjoint(), &row)), t.tol())?;
    Ok(DefectData { delta_t, delta_tstar, d_t, d_tstar })
}

/// Truncated Poisson kernel `h ↦ Σ_{|α| <= N} e_α ⊗ Δ_T T_α^* h`, with the
/// second factor expressed in an orthonormal frame of `D_T`.
///
/// Rows are laid out as `e_α ⊗ D_T` with `e_α` in graded order.
#[derive(Clone, Debug)]
pub struct PoissonKernel {
    pub depth: usize,
    pub fock: FockSpace,
    pub matrix: CMatrix,
    pub defect_space: Subspace,
}

pub fn poisson_kernel(t: &RowTuple, depth: usize) -> Result<PoissonKernel> {
    let (delta, d_t) = defect_t(t)?;
    let head = d_t.frame().adjoint() * delta;
    let fock = FockSpace::new(t.n(), depth)?;
    let matrix = kernel_rows(t.mats(), &fock, head);
    Ok(PoissonKernel { depth, fock, matrix, defect_space: d_t })
}

/// Stacks `head · T_α^*` over all words, using `head·T_{g_j α}^* = (head·T_α^*) T_j^*`.
///
/// Words of length `k + 1` beginning with `g_j` form a contiguous block in
/// the same order as the words of length `k`, so each level is `n` products.
pub(crate) fn kernel_rows(mats: &[CMatrix], fock: &FockSpace, head: CMatrix) -> CMatrix {
    let r = head.nrows();
    let d = head.ncols();
    let adjoints: Vec<CMatrix> = mats.iter().map(|m| m.adjoint()).collect();
    let mut out = zeros(fock.dim() * r, d);
    out.view_mut((0, 0), (r, d)).copy_from(&head);
    for k in 0..fock.depth() {
        let level = fock.degree_range(k);
        let prev = out.rows(level.start * r, level.len() * r).into_owned();
        let next = fock.degree_range(k + 1).start;
        for (j, adj) in adjoints.iter().enumerate() {
            let block = matmul(&prev, adj);
            out.rows_mut((next + j * level.len()) * r, level.len() * r).copy_from(&block);
        }
    }
    out
}

/// Result of the monotone iteration `Q_{k+1} = Φ(Q_k)`, `Q_0 = I`.
#[derive(Clone, Debug)]
pub struct CpLimit {
    pub q: CMatrix,
    pub iterations: usize,
    pub converged: bool,
}

pub fn cp_limit(t: &RowTuple) -> CpLimit {
    let tol = t.tol();
    let mut q = identity(t.dim());
    for k in 1..=tol.max_iter {
        let next = t.apply_phi(&q);
        let step = (&next - &q).norm();
        q = next;
        if step <= tol.fixed_point_abs {
            return CpLimit { q, iterations: k, converged: true };
        }
    }
    CpLimit { q, iterations: tol.max_iter, converged: false }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purity {
    Pure,
    NotPure,
    Indeterminate,
}

pub fn is_pure(t: &RowTuple) -> Purity {
    let lim = cp_limit(t);
    if !lim.converged {
        return Purity::Indeterminate;
    }
    let top = lambda_max(&lim.q);
    if top <= t.tol().residual_abs {
        Purity::Pure
    } else {
        Purity::NotPure
    }
}

/// The largest subspace `W ⊆ ker Δ_T` with `T_i^* W ⊆ W`.
pub fn hc_subspace(t: &RowTuple) -> Result<Subspace> {
    let (_, d_t) = defect_t(t)?;
    let adjoints: Vec<CMatrix> = t.mats().iter().map(|m| m.adjoint()).collect();
    Ok(largest_invariant_within(d_t.complement(t.tol()), &adjoints, t.tol()))
}

/// Largest subspace of `start` invariant under every operator in `ops`.
///
/// `W ⊆ start` is invariant under `A` exactly when `W^⊥ ⊇ start^⊥` is
/// invariant under `A^*`, so this is the complement of a Krylov closure.
pub(crate) fn largest_invariant_within(start: Subspace, ops: &[CMatrix], tol: &Tolerance) -> Subspace {
    let adjoints: Vec<CMatrix> = ops.iter().map(|op| op.adjoint()).collect();
    invariant_closure(&start.complement(tol), &adjoints, tol).complement(tol)
}

/// Smallest subspace containing `start` and invariant under every operator in `ops`.
///
/// Block Krylov iteration: only the directions added in the previous round
/// are pushed through `ops`, and their images are orthogonalized against the
/// basis found so far before the rank decision.
pub(crate) fn invariant_closure(start: &Subspace, ops: &[CMatrix], tol: &Tolerance) -> Subspace {
    let mut basis = start.frame().clone();
    let mut fresh = basis.clone();
    while fresh.ncols() > 0 && basis.ncols() < basis.nrows() {
        let images: Vec<CMatrix> = ops.iter().map(|op| matmul(op, &fresh)).collect();
        let mut residual = hstack(&images);
        // two passes of block Gram-Schmidt keep the new directions orthogonal
        for _ in 0..2 {
            let coeffs = matmul(&basis.adjoint(), &residual);
            residual -= matmul(&basis, &coeffs);
        }
        fresh = col_space_scaled(&residual, 1.0, tol).frame().clone();
        basis = hstack(&[basis, fresh.clone()]);
    }
    Subspace::from_orthonormal(basis, tol.rank_rel)
}

/// `span_i T_i S`
pub(crate) fn joint_image(ops: &[CMatrix], s: &Subspace, tol: &Tolerance) -> Subspace {
    if s.is_zero() {
        return Subspace::zero(ops[0].nrows());
    }
    let blocks: Vec<CMatrix> = ops.iter().map(|op| matmul(op, s.frame())).collect();
    col_space_scaled(&hstack(&blocks), 1.0, tol)
}

/// Smallest `m` with `T_α = 0` for every `|α| = m`, or `None` if the ranges
/// `span{T_α x : |α| = k}` stabilize at a nonzero subspace.
pub fn nilpotent_order(t: &RowTuple) -> Option<usize> {
    let mut range = Subspace::full(t.dim());
    let mut k = 0;
    loop {
        if range.is_zero() {
            return Some(k);
        }
        let next = joint_image(t.mats(), &range, t.tol());
        if next.dim() == range.dim() {
            return None;
        }
        range = next;
        k += 1;
    }
}

/// Largest subspace reducing every `T_i` on which the row operator is unitary.
pub fn unitary_part(t: &RowTuple) -> Result<Subspace> {
    let dd = defects(t)?;
    let d = t.dim();
    let tol = t.tol();
    // h with Δ_T h = 0 and Δ_{T*} J_i h = 0 for every i
    let mut constraints = vec![dd.delta_t.clone()];
    for i in 0..t.n() {
        constraints.push(dd.delta_tstar.columns(i * d, d).into_owned());
    }
    let start = null_space_scaled(&vstack(&constraints), 1.0, tol);
    let mut ops: Vec<CMatrix> = t.mats().to_vec();
    ops.extend(t.mats().iter().map(|m| m.adjoint()));
    Ok(largest_invariant_within(start, &ops, tol))
}

/// No nonzero reducing subspace carries a unitary row action.
pub fn is_cnu(t: &RowTuple) -> Result<bool> {
    Ok(unitary_part(t)?.is_zero())
}

/// `D_T` enlarged to the smallest `T`-invariant subspace containing it.
pub fn defect_krylov(t: &RowTuple) -> Result<Subspace> {
    let (_, d_t) = defect_t(t)?;
    Ok(invariant_closure(&d_t, t.mats(), t.tol()))
}
