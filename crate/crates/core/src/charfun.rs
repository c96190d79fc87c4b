//! The characteristic function of a row contraction: Fourier coefficients,
//! polynomial degree, closed-form evaluation, the factorization identity
//! `I - ΘΘ^* = KK^*` and coincidence of two characteristic functions.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contraction::{defect_t, invariant_closure, joint_image, poisson_kernel, RowTuple};
use crate::error::{Error, Result};
use crate::fock::{right_symbol_matrix, words_of_length, FockSpace, RowSymbol, Word};
use crate::invariants::NatInf;
use crate::numerics::{
    defect_root, hstack, identity, isometry_defect, matmul, max_abs, op_norm, polar_unitary, row_norm,
    subspace_intersect, zeros, CMatrix, Subspace, Tolerance,
};
use crate::sample::random_unitary;

/// Fourier data of `Θ_T` in orthonormal frames of `D_{T*}` (domain) and `D_T`
/// (codomain).
#[derive(Clone, Debug)]
pub struct CharFun {
    /// `-T` restricted to `D_{T*}`.
    pub constant: CMatrix,
    /// `θ_{β g_i} = Δ_T T_{β̃}^* P_i Δ_{T*}` for `1 <= |β g_i| <= cutoff`.
    pub coeffs: BTreeMap<Word, CMatrix>,
    pub cutoff: usize,
    pub n: usize,
    pub d_t: Subspace,
    pub d_tstar: Subspace,
}

impl CharFun {
    pub fn as_symbol(&self) -> RowSymbol {
        RowSymbol { constant: self.constant.clone(), coeffs: self.coeffs.clone() }
    }

    /// `(dim D_T, dim D_{T*})`
    pub fn shape(&self) -> (usize, usize) {
        self.constant.shape()
    }

    pub fn coeff(&self, w: &Word) -> Option<&CMatrix> {
        if w.is_empty() {
            Some(&self.constant)
        } else {
            self.coeffs.get(w)
        }
    }

    /// Constant term followed by the coefficients in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (Word, &CMatrix)> {
        std::iter::once((Word::empty(), &self.constant))
            .chain(self.coeffs.iter().map(|(w, c)| (w.clone(), c)))
    }

    /// Largest length of a coefficient with norm above `threshold` (0 if only
    /// the constant term survives).
    pub fn max_nonzero_len(&self, threshold: f64) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, c)| max_abs(c) > threshold)
            .map(|(w, _)| w.len())
            .max()
            .unwrap_or(0)
    }

    /// Degree read off the coefficients: infinite when a coefficient of the
    /// cutoff length survives, since then no vanishing has been observed.
    pub fn scan_degree(&self, threshold: f64) -> NatInf {
        let top = self.max_nonzero_len(threshold);
        if self.cutoff > 0 && top == self.cutoff {
            NatInf::Infinite
        } else {
            NatInf::Finite(top)
        }
    }
}

pub fn charfun_coeffs(t: &RowTuple, cutoff: usize) -> Result<CharFun> {
    charfun_coeffs_excluding(t, cutoff, None)
}

/// Characteristic function with the domain defect computed on `(E^⊥)^n`.
///
/// Truncated Fock models fail to be isometric only on the excluded top
/// degrees; compressing `I - T^*T` away from them removes that artifact from
/// `D_{T*}` while leaving genuine defects untouched.
pub fn charfun_coeffs_excluding(
    t: &RowTuple,
    cutoff: usize,
    exclude: Option<&Subspace>,
) -> Result<CharFun> {
    let tol = t.tol();
    let (d, n) = (t.dim(), t.n());
    let (delta_t, d_t) = defect_t(t)?;
    let row = t.row_operator();
    let mut defect_sq = identity(n * d) - matmul(&row.adjoint(), &row);
    if let Some(e) = exclude {
        check_exclude(t, e)?;
        let keep = e.complement(tol);
        let q = crate::numerics::block_diag(&vec![keep.projector(); n]);
        defect_sq = matmul(&matmul(&q, &defect_sq), &q);
    }
    let (delta_tstar, d_tstar) = defect_root(&defect_sq, tol)?;
    let f_t = d_t.frame();
    let f_ts = d_tstar.frame();

    let raw_constant = -(&row * f_ts);
    check_residual(&raw_constant, &d_t, &Word::empty(), tol)?;
    let constant = f_t.adjoint() * &raw_constant;

    // G_i = P_i Δ_{T*} F_{T*}
    let tail = &delta_tstar * f_ts;
    let gs: Vec<CMatrix> = (0..n).map(|i| tail.rows(i * d, d).into_owned()).collect();
    let adjoints: Vec<CMatrix> = t.mats().iter().map(|m| m.adjoint()).collect();

    let mut coeffs = BTreeMap::new();
    // raw_β = Δ_T T_{β̃}^*, extended by raw_{β g_j} = raw_β T_j^*
    let mut layer: Vec<(Word, CMatrix)> = vec![(Word::empty(), delta_t)];
    for len in 1..=cutoff {
        let mut next = Vec::with_capacity(layer.len() * n);
        for (beta, raw) in &layer {
            for (i, g) in gs.iter().enumerate() {
                let w = beta.push(i);
                let value = raw * g;
                check_residual(&value, &d_t, &w, tol)?;
                coeffs.insert(w, f_t.adjoint() * value);
            }
            if len < cutoff {
                for (j, a) in adjoints.iter().enumerate() {
                    next.push((beta.push(j), raw * a));
                }
            }
        }
        layer = next;
    }
    Ok(CharFun { constant, coeffs, cutoff, n, d_t, d_tstar })
}

fn check_exclude(t: &RowTuple, e: &Subspace) -> Result<()> {
    if e.ambient_dim() != t.dim() {
        return Err(Error::AmbientMismatch { left: e.ambient_dim(), right: t.dim() });
    }
    Ok(())
}

fn check_residual(raw: &CMatrix, d_t: &Subspace, w: &Word, tol: &Tolerance) -> Result<()> {
    if raw.ncols() == 0 {
        return Ok(());
    }
    let f = d_t.frame();
    let residual = op_norm(&(raw - matmul(f, &matmul(&f.adjoint(), raw))));
    if residual > tol.residual_abs {
        return Err(Error::CompressionResidualExceeded { word: w.to_string(), residual });
    }
    Ok(())
}

/// The chain `D_0 ⊇ D_1 ⊇ ...` and the degree it certifies.
#[derive(Clone, Debug)]
pub struct DegreeReport {
    pub degree: NatInf,
    /// `dim D_k` for `k = 0..=stabilized_at`.
    pub chain: Vec<usize>,
    /// First `k` with `D_{k+1} = D_k`.
    pub stabilized_at: usize,
    pub subspaces: Vec<Subspace>,
}

impl DegreeReport {
    /// `D_k` (the chain is constant after stabilization).
    pub fn subspace(&self, k: usize) -> &Subspace {
        &self.subspaces[k.min(self.subspaces.len() - 1)]
    }
}

/// Largest entry of `B^*(δ_ij I - T_i^*T_j)B` over all `i, j`.
pub fn row_isometry_defect(mats: &[CMatrix], b: &CMatrix) -> f64 {
    if b.ncols() == 0 {
        return 0.0;
    }
    let images: Vec<CMatrix> = mats.iter().map(|m| matmul(m, b)).collect();
    let k = b.ncols();
    let mut worst = 0.0_f64;
    for (i, ti) in images.iter().enumerate() {
        for (j, tj) in images.iter().enumerate() {
            let mut block = -matmul(&ti.adjoint(), tj);
            if i == j {
                block += identity(k);
            }
            worst = worst.max(op_norm(&block));
        }
    }
    worst
}

/// `D_m ∩ E^⊥`
pub(crate) fn minus_exclude(s: &Subspace, exclude: Option<&Subspace>, tol: &Tolerance) -> Result<Subspace> {
    match exclude {
        None => Ok(s.clone()),
        Some(e) if e.is_zero() => Ok(s.clone()),
        Some(e) => subspace_intersect(s, &e.complement(tol), tol),
    }
}

pub fn charfun_degree(t: &RowTuple, exclude: Option<&Subspace>) -> Result<DegreeReport> {
    let tol = t.tol();
    if let Some(e) = exclude {
        check_exclude(t, e)?;
    }
    let (_, d_t) = defect_t(t)?;
    let mut current = invariant_closure(&d_t, t.mats(), tol);
    let mut subspaces = vec![];
    let mut degree = None;
    let mut m = 0;
    loop {
        if degree.is_none() {
            let b = minus_exclude(&current, exclude, tol)?;
            if row_isometry_defect(t.mats(), b.frame()) <= tol.residual_abs {
                degree = Some(m);
            }
        }
        let next = joint_image(t.mats(), &current, tol);
        let stable = next.dim() == current.dim();
        subspaces.push(current);
        if stable {
            break;
        }
        current = next;
        m += 1;
    }
    let chain = subspaces.iter().map(|s| s.dim()).collect();
    Ok(DegreeReport {
        degree: degree.map_or(NatInf::Infinite, NatInf::Finite),
        chain,
        stabilized_at: m,
        subspaces,
    })
}

/// Closed-form `Θ_T(X)` for a strict row contraction `X` of `k x k` matrices,
/// as a map `C^k ⊗ D_{T*} → C^k ⊗ D_T`.
pub fn charfun_eval(t: &RowTuple, xs: &[CMatrix]) -> Result<CMatrix> {
    if xs.len() != t.n() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} matrices, got {}",
            t.n(),
            xs.len()
        )));
    }
    let k = xs[0].nrows();
    if xs.iter().any(|x| x.shape() != (k, k)) {
        return Err(Error::ShapeMismatch("argument matrices must share a square shape".into()));
    }
    let norm = row_norm(xs);
    if norm >= 1.0 {
        return Err(Error::NotStrictlyInsideBall { norm });
    }
    let d = t.dim();
    let dd = crate::contraction::defects(t)?;
    let f_t = dd.d_t.frame();
    let f_ts = dd.d_tstar.frame();
    let constant = -(f_t.adjoint() * t.row_operator() * f_ts);

    let mut resolvent_arg = identity(k * d);
    let mut right = zeros(k * d, k * f_ts.ncols());
    let tail = &dd.delta_tstar * f_ts;
    for (i, (x, ti)) in xs.iter().zip(t.mats()).enumerate() {
        resolvent_arg -= x.kronecker(&ti.adjoint());
        right += x.kronecker(&tail.rows(i * d, d).into_owned());
    }
    let solved = resolvent_arg
        .lu()
        .solve(&right)
        .ok_or_else(|| Error::Numerical("singular resolvent in charfun_eval".into()))?;
    let left = identity(k).kronecker(&(f_t.adjoint() * &dd.delta_t));
    Ok(identity(k).kronecker(&constant) + left * solved)
}

/// Tail bound `‖X‖^{cutoff+1}/(1-‖X‖)·‖Δ_T‖‖Δ_{T*}‖` for comparing the closed
/// form against the Fourier sum truncated at `cutoff`.
pub fn eval_tail_bound(t: &RowTuple, xs: &[CMatrix], cutoff: usize) -> Result<f64> {
    let r = row_norm(xs);
    let dd = crate::contraction::defects(t)?;
    Ok(r.powi(cutoff as i32 + 1) / (1.0 - r) * op_norm(&dd.delta_t) * op_norm(&dd.delta_tstar))
}

/// `‖(I - ΘΘ^*) - KK^*‖` for the tuple `rT` on `F²_N ⊗ D_{rT}`, restricted to
/// degrees `<= N - 1`.
///
/// The norm is the Frobenius norm, an upper bound for the operator norm.
pub fn factorization_residual(t: &RowTuple, r: f64, depth: usize) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidTolerance(format!("radius must lie in (0, 1), got {r}")));
    }
    let rt = t.scaled(crate::numerics::c(r, 0.0))?;
    let cf = charfun_coeffs(&rt, depth)?;
    let space = FockSpace::new(t.n(), depth)?;
    let m = right_symbol_matrix(&space, &cf.as_symbol())?;
    let k = poisson_kernel(&rt, depth)?;
    let dt = cf.shape().0;
    let rows = space.up_to_degree(depth.saturating_sub(1)).end * dt;
    if rows == 0 {
        return Ok(0.0);
    }
    let m_int = m.rows(0, rows);
    let k_int = k.matrix.rows(0, rows);
    let e = identity(rows) - m_int * m_int.adjoint() - k_int * k_int.adjoint();
    Ok(e.norm())
}

/// `max_α ‖τ2 θ_α - θ'_α τ1‖` over the constant term and every coefficient.
pub fn coincidence_verify(c: &CharFun, c2: &CharFun, tau1: &CMatrix, tau2: &CMatrix, tol: &Tolerance) -> Result<f64> {
    if c.cutoff != c2.cutoff {
        return Err(Error::DimensionMismatch(format!(
            "cutoffs differ: {} vs {}",
            c.cutoff, c2.cutoff
        )));
    }
    let (dt, dts) = c.shape();
    let (dt2, dts2) = c2.shape();
    if tau1.shape() != (dts2, dts) || tau2.shape() != (dt2, dt) {
        return Err(Error::DimensionMismatch(format!(
            "τ1 must be {dts2}x{dts} and τ2 must be {dt2}x{dt}, got {:?} and {:?}",
            tau1.shape(),
            tau2.shape()
        )));
    }
    for tau in [tau1, tau2] {
        let defect = isometry_defect(tau);
        if tau.nrows() != tau.ncols() || defect > tol.residual_abs {
            return Err(Error::NotUnitary { defect });
        }
    }
    Ok(coincidence_residual(c, c2, tau1, tau2))
}

fn coincidence_residual(c: &CharFun, c2: &CharFun, tau1: &CMatrix, tau2: &CMatrix) -> f64 {
    let zero = zeros(c.shape().0, c.shape().1);
    let zero2 = zeros(c2.shape().0, c2.shape().1);
    let mut words: Vec<Word> = c.coeffs.keys().chain(c2.coeffs.keys()).cloned().collect();
    words.push(Word::empty());
    words.sort();
    words.dedup();
    words
        .iter()
        .map(|w| {
            let a = c.coeff(w).unwrap_or(&zero);
            let b = c2.coeff(w).unwrap_or(&zero2);
            op_norm(&(tau2 * a - b * tau1))
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub enum CoincidenceOutcome {
    Witness { tau1: CMatrix, tau2: CMatrix, residual: f64 },
    /// Inconclusive: the heuristic search did not find intertwiners.
    NoWitnessFound { best_residual: f64 },
}

impl CoincidenceOutcome {
    pub fn found(&self) -> bool {
        matches!(self, CoincidenceOutcome::Witness { .. })
    }

    pub fn residual(&self) -> f64 {
        match self {
            CoincidenceOutcome::Witness { residual, .. } => *residual,
            CoincidenceOutcome::NoWitnessFound { best_residual } => *best_residual,
        }
    }
}

/// Alternating polar-factor search for unitaries with `θ'_α τ1 = τ2 θ_α`.
///
/// Seeds are the identity followed by eight random unitaries drawn from
/// `seed`; each seed runs `iters` sweeps.
pub fn coincidence_search(c: &CharFun, c2: &CharFun, iters: usize, seed: u64, tol: &Tolerance) -> CoincidenceOutcome {
    let (dt, dts) = c.shape();
    if c2.shape() != (dt, dts) || c.cutoff != c2.cutoff {
        return CoincidenceOutcome::NoWitnessFound { best_residual: f64::INFINITY };
    }
    let pairs: Vec<(CMatrix, CMatrix)> = {
        let mut words: Vec<Word> = c.coeffs.keys().chain(c2.coeffs.keys()).cloned().collect();
        words.push(Word::empty());
        words.sort();
        words.dedup();
        words
            .iter()
            .map(|w| {
                let a = c.coeff(w).cloned().unwrap_or_else(|| zeros(dt, dts));
                let b = c2.coeff(w).cloned().unwrap_or_else(|| zeros(dt, dts));
                (a, b)
            })
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = vec![identity(dts)];
    seeds.extend((0..8).map(|_| random_unitary(dts, &mut rng)));
    let mut best = f64::INFINITY;
    for start in seeds {
        let mut tau1 = start;
        for _ in 0..iters.max(1) {
            let mut acc2 = zeros(dt, dt);
            for (a, b) in &pairs {
                acc2 += b * &tau1 * a.adjoint();
            }
            let tau2 = polar_or_identity(&acc2);
            let mut acc1 = zeros(dts, dts);
            for (a, b) in &pairs {
                acc1 += b.adjoint() * &tau2 * a;
            }
            tau1 = polar_or_identity(&acc1);
            let residual = coincidence_residual(c, c2, &tau1, &tau2);
            best = best.min(residual);
            if residual <= tol.residual_abs {
                return CoincidenceOutcome::Witness { tau1, tau2, residual };
            }
        }
    }
    CoincidenceOutcome::NoWitnessFound { best_residual: best }
}

fn polar_or_identity(a: &CMatrix) -> CMatrix {
    if a.nrows() == 0 {
        return zeros(0, 0);
    }
    if max_abs(a) == 0.0 {
        return identity(a.nrows());
    }
    polar_unitary(a)
}

/// Whether the coefficient family vanishes beyond length `m`, checked against
/// the row-isometry criterion on `D_m`; used as a cross-check of the degree.
pub fn vanishing_matches_isometry(t: &RowTuple, report: &DegreeReport, cf: &CharFun, m: usize) -> bool {
    let threshold = t.tol().residual_abs;
    let vanish = (m + 1..=cf.cutoff)
        .flat_map(|len| words_of_length(t.n(), len))
        .all(|w| cf.coeffs.get(&w).is_none_or(|c| max_abs(c) <= threshold));
    let iso = row_isometry_defect(t.mats(), report.subspace(m).frame()) <= threshold;
    vanish == iso
}

/// Serializable summary of a characteristic function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharFunSummary {
    pub dim_d_t: usize,
    pub dim_d_tstar: usize,
    pub cutoff: usize,
    pub max_nonzero_len: usize,
    pub coefficient_norms: BTreeMap<String, f64>,
}

impl CharFun {
    pub fn summary(&self, threshold: f64) -> CharFunSummary {
        let coefficient_norms = self
            .terms()
            .map(|(w, c)| (w.to_string(), if c.is_empty() { 0.0 } else { op_norm(c) }))
            .collect();
        CharFunSummary {
            dim_d_t: self.shape().0,
            dim_d_tstar: self.shape().1,
            cutoff: self.cutoff,
            max_nonzero_len: self.max_nonzero_len(threshold),
            coefficient_norms,
        }
    }
}

/// Row matrix `[θ_α]` of all coefficients of length `len`, for inspection.
pub fn coefficient_layer(cf: &CharFun, len: usize) -> CMatrix {
    let blocks: Vec<CMatrix> = words_of_length(cf.n, len)
        .iter()
        .filter_map(|w| cf.coeff(w).cloned())
        .collect();
    if blocks.is_empty() {
        zeros(cf.shape().0, 0)
    } else {
        hstack(&blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::eval_symbol;
    use crate::numerics::{c, real_matrix, ONE};
    use crate::sample;
    use rand::SeedableRng;

    fn scalar(v: f64) -> CMatrix {
        real_matrix(1, 1, &[v])
    }

    fn tuple(mats: Vec<CMatrix>) -> RowTuple {
        RowTuple::new(mats, Tolerance::default()).unwrap()
    }

    #[test]
    fn zero_scalar_has_identity_symbol() {
        let cf = charfun_coeffs(&tuple(vec![scalar(0.0)]), 4).unwrap();
        assert!(max_abs(&cf.constant) < 1e-15);
        assert!((cf.coeffs[&Word::letter(0)][(0, 0)] - ONE).norm() < 1e-15);
        assert!(cf.coeffs.iter().filter(|(w, _)| w.len() > 1).all(|(_, c)| max_abs(c) < 1e-15));
        let x = [scalar(0.3)];
        let v = charfun_eval(&tuple(vec![scalar(0.0)]), &x).unwrap();
        assert!((v[(0, 0)] - c(0.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn coisometry_has_empty_codomain() {
        let cf = charfun_coeffs(&tuple(vec![scalar(0.6), scalar(0.8)]), 3).unwrap();
        assert_eq!(cf.shape(), (0, 1));
    }

    #[test]
    fn jordan_coefficients_stop_at_length_two() {
        let j = tuple(vec![real_matrix(2, 2, &[0., 1., 0., 0.])]);
        let cf = charfun_coeffs(&j, 5).unwrap();
        assert_eq!(cf.max_nonzero_len(1e-12), 2);
        assert_eq!(charfun_degree(&j, None).unwrap().degree, NatInf::Finite(2));
    }

    #[test]
    fn degree_examples() {
        let z = charfun_degree(&RowTuple::zero(2, 3), None).unwrap();
        assert_eq!(z.degree, NatInf::Finite(1));
        assert_eq!(z.chain, vec![3, 0]);
        let co = charfun_degree(&tuple(vec![scalar(0.6), scalar(0.8)]), None).unwrap();
        assert_eq!(co.degree, NatInf::Finite(0));
        assert_eq!(co.chain, vec![0]);
        let r = charfun_degree(&tuple(vec![scalar(0.4)]), None).unwrap();
        assert_eq!(r.degree, NatInf::Infinite);
        assert_eq!(r.chain, vec![1]);
    }

    #[test]
    fn eval_at_origin_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let t = sample::random_row_contraction(2, 3, 0.9, &mut rng);
        let cf = charfun_coeffs(&t, 0).unwrap();
        let v = charfun_eval(&t, &[zeros(1, 1), zeros(1, 1)]).unwrap();
        assert!(max_abs(&(v - &cf.constant)) < 1e-13);
    }

    #[test]
    fn eval_rejects_boundary_points() {
        let t = RowTuple::zero(2, 1);
        assert!(matches!(
            charfun_eval(&t, &[scalar(0.6), scalar(0.8)]),
            Err(Error::NotStrictlyInsideBall { .. })
        ));
    }

    #[test]
    fn closed_form_matches_fourier_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let space = FockSpace::new(2, 4).unwrap();
        let shifts = crate::fock::creation_ops(&space, crate::fock::Side::Left);
        let xs: Vec<CMatrix> = shifts.iter().map(|s| s.scale(0.5)).collect();
        for _ in 0..3 {
            let t = sample::random_row_contraction(2, 2, 0.9, &mut rng);
            let cutoff = 10;
            let cf = charfun_coeffs(&t, cutoff).unwrap();
            let series = eval_symbol(&cf.as_symbol(), &xs, cutoff).unwrap();
            let closed = charfun_eval(&t, &xs).unwrap();
            let bound = eval_tail_bound(&t, &xs, cutoff).unwrap();
            assert!(op_norm(&(series - closed)) <= bound + 1e-12);
        }
    }

    #[test]
    fn factorization_examples() {
        let co = tuple(vec![scalar(0.6), scalar(0.8)]);
        assert!(factorization_residual(&co, 0.999_999, 4).unwrap() <= 1e-10);
        assert!(factorization_residual(&RowTuple::zero(1, 1), 0.9, 8).unwrap() <= 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let t = sample::random_row_contraction(2, 2, 1.0, &mut rng);
        assert!(factorization_residual(&t, 0.8, 6).unwrap() <= 1e-6);
    }

    #[test]
    fn coincidence_with_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let t = sample::random_row_contraction(2, 2, 0.9, &mut rng);
        let cf = charfun_coeffs(&t, 3).unwrap();
        let (a, b) = cf.shape();
        let tol = Tolerance::default();
        assert_eq!(coincidence_verify(&cf, &cf, &identity(b), &identity(a), &tol).unwrap(), 0.0);
        assert!(matches!(
            coincidence_verify(&cf, &cf, &identity(b + 1), &identity(a), &tol),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            coincidence_verify(&cf, &cf, &identity(b).scale(2.0), &identity(a), &tol),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn coincidence_of_conjugate_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let tol = Tolerance::default();
        for _ in 0..3 {
            let t = sample::random_row_contraction(2, 3, 0.9, &mut rng);
            let u = sample::random_unitary(3, &mut rng);
            let c1 = charfun_coeffs(&t, 3).unwrap();
            let c2 = charfun_coeffs(&t.conjugated_by(&u).unwrap(), 3).unwrap();
            let out = coincidence_search(&c1, &c2, 200, 0, &tol);
            assert!(out.found(), "best residual {}", out.residual());
            assert!(out.residual() <= 1e-7);
        }
    }

    #[test]
    fn scaled_coefficient_breaks_coincidence() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let tol = Tolerance::default();
        let t = sample::random_row_contraction(2, 2, 0.9, &mut rng);
        let c1 = charfun_coeffs(&t, 2).unwrap();
        let mut c2 = c1.clone();
        let w = Word::letter(0);
        let gap = op_norm(&c1.coeffs[&w]);
        c2.coeffs.insert(w.clone(), c1.coeffs[&w].scale(2.0));
        let (a, b) = c1.shape();
        let r = coincidence_verify(&c1, &c2, &identity(b), &identity(a), &tol).unwrap();
        assert!(r >= gap - 1e-12);
        assert!(!coincidence_search(&c1, &c2, 100, 0, &tol).found());
    }

    #[test]
    fn vanishing_criterion_agrees_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let t = sample::random_nilpotent(2, 4, 3, &mut rng);
        let rep = charfun_degree(&t, None).unwrap();
        let cf = charfun_coeffs(&t, rep.stabilized_at + 2).unwrap();
        for m in 0..=rep.stabilized_at {
            assert!(vanishing_matches_isometry(&t, &rep, &cf, m));
        }
    }
}
