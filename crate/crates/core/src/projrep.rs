//! The projective unitary representation `φ ↦ U_φ` on truncated Fock space.
//!
//! For an automorphism `φ` the boundary tuple `φ̂ = φ(S_1, ..., S_n)` is a
//! pure row isometry with a one-dimensional defect space. Its Poisson kernel
//! followed by the identification of that defect line with `C` gives a
//! unitary `U_φ` with `U_φ^* S_i U_φ = φ̂_i`.
//!
//! On `F²_N` every piece is an exact compression of the full-space operator,
//! because `F²_N` is invariant under the adjoints of analytic operators.
//! The only loss is that `U_φ` moves mass out of `F²_N`, so unitarity and the
//! intertwining relation are checked on the interior `|α| <= N - buffer`.

use serde::{Deserialize, Serialize};

use crate::contraction::{kernel_rows, RowTuple};
use crate::error::{Error, Result};
use crate::fock::{creation_ops, FockSpace, Side};
use crate::mobius::{aut_apply, compose, AutElement};
use crate::numerics::{c, identity, matmul, op_norm, select_columns, zeros, CMatrix, CVector, Subspace, Tolerance, C64};

/// `φ̂ = φ(S^{(N)})`, certified to be a row contraction.
pub fn boundary_function(phi: &AutElement, depth: usize) -> Result<RowTuple> {
    Ok(boundary_with_defect(phi, depth)?.tuple)
}

struct Boundary {
    tuple: RowTuple,
    /// `Δ_φ̂² e_∅`, which spans the defect line.
    direction: CVector,
    /// `‖Δ_φ̂²‖`
    top: f64,
    /// Bound on the second singular value of `Δ_φ̂`.
    secondary: f64,
}

/// Evaluates `φ(S^{(N)})` and splits `Δ_φ̂² = μ u u^* + R`.
///
/// `Δ_φ̂²` has rank one, so `Δ_φ̂² e_∅` already spans its range and no
/// eigensolver is needed. `‖R‖_F` bounds both the second eigenvalue and the
/// most negative one, so a small remainder also certifies `Σ φ̂_i φ̂_i^* <= I`.
fn boundary_with_defect(phi: &AutElement, depth: usize) -> Result<Boundary> {
    let fock = FockSpace::new(phi.n(), depth)?;
    let shifts = creation_ops(&fock, Side::Left);
    let mats = aut_apply(phi, &shifts)?;
    let dim = fock.dim();
    let mut defect_sq = identity(dim);
    for m in &mats {
        defect_sq -= matmul(m, &m.adjoint());
    }
    let direction: CVector = defect_sq.column(0).into_owned();
    let norm = direction.norm();
    if norm == 0.0 {
        return Err(Error::Numerical("defect direction is orthogonal to the vacuum".into()));
    }
    let u = &direction / c(norm, 0.0);
    let top = (u.adjoint() * &defect_sq * &u)[(0, 0)].re;
    let remainder = (defect_sq - &u * u.adjoint() * c(top, 0.0)).norm();
    let tol = Tolerance::default();
    let secondary = remainder.sqrt();
    if remainder > tol.residual_abs {
        return Err(Error::DefectNotRankOne { secondary });
    }
    Ok(Boundary { tuple: RowTuple::from_certified(mats, tol), direction: u, top, secondary })
}

#[derive(Clone, Debug)]
pub struct ProjRepElement {
    pub phi: AutElement,
    pub depth: usize,
    pub buffer: usize,
    pub fock: FockSpace,
    pub boundary: RowTuple,
    /// `U_φ` compressed to `F²_N`.
    pub u_op: CMatrix,
    pub interior: Subspace,
    /// `‖Δ_φ̂ e_∅‖`
    pub vacuum_defect: f64,
    /// Second singular value of `Δ_φ̂`, zero in exact arithmetic.
    pub secondary: f64,
}

impl ProjRepElement {
    fn interior_indices(&self) -> Vec<usize> {
        self.fock.up_to_degree(self.depth - self.buffer).collect()
    }

    /// `‖P(U^*U - I)P‖` with `P` the interior projection.
    pub fn isometry_defect(&self) -> f64 {
        let v = select_columns(&self.u_op, &self.interior_indices());
        op_norm(&(v.adjoint() * &v - identity(v.ncols())))
    }

    /// Geometric tail budget `10 ‖λ‖^{N - buffer} / (1 - ‖λ‖)`.
    pub fn tail_budget(&self) -> f64 {
        let rho = self.phi.lambda_norm();
        10.0 * rho.powi((self.depth - self.buffer) as i32) / (1.0 - rho)
    }
}

/// Builds `U_φ = W_φ̂ K_φ̂` on `F²_N`.
pub fn u_operator(phi: &AutElement, depth: usize, buffer: usize) -> Result<ProjRepElement> {
    if buffer < 2 || buffer > depth {
        return Err(Error::DimensionMismatch(format!("buffer must lie in 2..={depth}, got {buffer}")));
    }
    let Boundary { tuple: boundary, direction: u, top, secondary } = boundary_with_defect(phi, depth)?;
    let fock = FockSpace::new(phi.n(), depth)?;
    let dim = fock.dim();
    // u is aligned with Δ e_∅, so its vacuum entry is real and positive.
    let vacuum_defect = top.sqrt() * u[0].norm();
    let head = CMatrix::from_fn(1, dim, |_, j| u[j].conj() * top.sqrt());
    let u_op = kernel_rows(boundary.mats(), &fock, head);
    let interior = fock.interior(buffer);
    Ok(ProjRepElement {
        phi: phi.clone(),
        depth,
        buffer,
        fock,
        boundary,
        u_op,
        interior,
        vacuum_defect,
        secondary,
    })
}

/// `max_i ‖(φ̂_i - U^* S_i U) P‖` over the interior.
pub fn intertwining_residual(el: &ProjRepElement) -> f64 {
    let shifts = creation_ops(&el.fock, Side::Left);
    let idx = el.interior_indices();
    let v = select_columns(&el.u_op, &idx);
    let uh = el.u_op.adjoint();
    shifts
        .iter()
        .zip(el.boundary.mats())
        .map(|(s, b)| op_norm(&(select_columns(b, &idx) - matmul(&uh, &(s * &v)))))
        .fold(0.0, f64::max)
}

/// `‖P_{N-1}(U φ̂_i^* - S_i^* U)‖`, which vanishes exactly on `F²_N`.
pub fn adjoint_intertwining_residual(el: &ProjRepElement) -> f64 {
    let shifts = creation_ops(&el.fock, Side::Left);
    let rows: Vec<usize> = el.fock.up_to_degree(el.depth - 1).collect();
    shifts
        .iter()
        .zip(el.boundary.mats())
        .map(|(s, b)| {
            let diff = matmul(&el.u_op, &b.adjoint()) - matmul(&s.adjoint(), &el.u_op);
            op_norm(&select_columns(&diff.transpose(), &rows))
        })
        .fold(0.0, f64::max)
}

/// `c(φ, ψ)` with `U_φ U_ψ = c U_{φ∘ψ}`.
///
/// `c` is the normalized inner product of the two images of the vacuum, so
/// `|c| = 1` exactly when they are parallel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cocycle {
    pub c: C64,
    pub residual: f64,
}

pub fn cocycle(phi: &AutElement, psi: &AutElement, depth: usize, buffer: usize) -> Result<Cocycle> {
    let a = u_operator(phi, depth, buffer)?;
    let b = u_operator(psi, depth, buffer)?;
    let ab = u_operator(&compose(phi, psi)?, depth, buffer)?;
    Ok(cocycle_of(&a, &b, &ab))
}

/// Cocycle from already built operators for `φ`, `ψ` and `φ∘ψ`.
pub fn cocycle_of(a: &ProjRepElement, b: &ProjRepElement, ab: &ProjRepElement) -> Cocycle {
    let idx = a.interior_indices();
    let prod = matmul(&a.u_op, &select_columns(&b.u_op, &idx));
    let target = select_columns(&ab.u_op, &idx);
    let x = prod.column(0);
    let y = target.column(0);
    let c = y.dotc(&x) / (x.norm() * y.norm());
    let residual = op_norm(&(prod - target * c));
    Cocycle { c, residual }
}

/// `max_v ‖(U_{φ_k}^* - U_φ^*) v‖` over fixed interior probes, one value per `k`.
pub fn continuity_probe(sequence: &[AutElement], limit: &AutElement, depth: usize, buffer: usize) -> Result<Vec<f64>> {
    let target = u_operator(limit, depth, buffer)?;
    let probes = probe_vectors(&target);
    let base = target.u_op.adjoint() * &probes;
    sequence
        .iter()
        .map(|phi| {
            let el = u_operator(phi, depth, buffer)?;
            let diff = el.u_op.adjoint() * &probes - &base;
            Ok(diff.column_iter().map(|col| col.norm()).fold(0.0, f64::max))
        })
        .collect()
}

/// `e_∅`, each `e_{g_i}` and the normalized sum of all interior basis vectors.
fn probe_vectors(el: &ProjRepElement) -> CMatrix {
    let n = el.fock.n();
    let dim = el.fock.dim();
    let interior = el.interior_indices();
    let mut out = zeros(dim, n + 2);
    for j in 0..=n {
        out[(j, j)] = c(1.0, 0.0);
    }
    let w = 1.0 / (interior.len() as f64).sqrt();
    for &i in &interior {
        out[(i, n + 1)] = c(w, 0.0);
    }
    out
}
