//! The invariant `Γ(T) = (p, m, q)`, classification by `Γ`, the canonical
//! triangularization, the Wold decomposition and structural model tuples.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::charfun::{charfun_degree, minus_exclude, row_isometry_defect, DegreeReport};
use crate::contraction::{
    defect_t, hc_subspace, invariant_closure, joint_image, nilpotent_order, RowTuple,
};
use crate::error::{Error, Result};
use crate::fock::{creation_ops, kron_identity, FockSpace, Side};
use crate::numerics::{
    block_diag, complement_within, compress, hstack, identity, lambda_max, matmul, max_abs, op_norm,
    subspace_sum, zeros, CMatrix, Subspace, Tolerance,
};

/// A value in `ℕ ∪ {∞}`; serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NatInf {
    Finite(usize),
    Infinite,
}

impl NatInf {
    pub fn finite(self) -> Option<usize> {
        match self {
            NatInf::Finite(v) => Some(v),
            NatInf::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, NatInf::Finite(_))
    }
}

impl From<usize> for NatInf {
    fn from(v: usize) -> Self {
        NatInf::Finite(v)
    }
}

impl fmt::Display for NatInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatInf::Finite(v) => write!(f, "{v}"),
            NatInf::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for NatInf {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NatInf::Finite(v) => s.serialize_u64(*v as u64),
            NatInf::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NatInf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(NatInf::Finite(v as usize)),
            Raw::Text(t) if t == "inf" => Ok(NatInf::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a count or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaValue {
    pub p: NatInf,
    pub m: NatInf,
    pub q: NatInf,
}

impl GammaValue {
    pub fn new(p: impl Into<NatInf>, m: impl Into<NatInf>, q: impl Into<NatInf>) -> Self {
        GammaValue { p: p.into(), m: m.into(), q: q.into() }
    }
}

impl fmt::Display for GammaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.p, self.m, self.q)
    }
}

/// `Γ(T)` together with the degree chain it was read from.
pub fn gamma(t: &RowTuple, exclude: Option<&Subspace>) -> Result<GammaValue> {
    gamma_with_report(t, exclude).map(|(g, _)| g)
}

pub fn gamma_with_report(t: &RowTuple, exclude: Option<&Subspace>) -> Result<(GammaValue, DegreeReport)> {
    let tol = t.tol();
    let report = charfun_degree(t, exclude)?;
    // H_c is the complement of the closure of D_T, which heads the chain
    let q = report.subspace(0).complement(tol).dim();
    let p = match report.degree {
        NatInf::Finite(m) => {
            let here = minus_exclude(report.subspace(m), exclude, tol)?.dim();
            let next = if m + 1 < report.subspaces.len() {
                minus_exclude(report.subspace(m + 1), exclude, tol)?.dim()
            } else {
                // the chain is constant from here on
                here
            };
            here - next
        }
        NatInf::Infinite => defect_t(t)?.1.dim(),
    };
    Ok((GammaValue::new(p, report.degree, q), report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    PureIsometry,
    PurePolynomial,
    Cnc,
    ConstantCharfun,
    NilpotentForm,
    CoisometryForm,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::PureIsometry => "pure_isometry",
            Label::PurePolynomial => "pure_polynomial",
            Label::Cnc => "cnc",
            Label::ConstantCharfun => "constant_charfun",
            Label::NilpotentForm => "nilpotent_form",
            Label::CoisometryForm => "coisometry_form",
        };
        f.write_str(s)
    }
}

/// Membership of `Γ` in the classifying sets.
pub fn classify(g: &GammaValue) -> BTreeSet<Label> {
    let zero = NatInf::Finite(0);
    let mut out = BTreeSet::new();
    if g.m == zero && g.q == zero {
        out.insert(Label::PureIsometry);
    }
    if g.m.is_finite() && g.q == zero {
        out.insert(Label::PurePolynomial);
    }
    if g.q == zero {
        out.insert(Label::Cnc);
    }
    if g.m == zero {
        out.insert(Label::ConstantCharfun);
    }
    if g.p == zero && g.m.is_finite() && g.q == zero {
        out.insert(Label::NilpotentForm);
    }
    if g.p == zero && g.m == zero {
        out.insert(Label::CoisometryForm);
    }
    out
}

/// Canonical upper-triangular form on `H_v ⊕ H_nil ⊕ H_c`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub degree: usize,
    pub h_v: Subspace,
    pub h_nil: Subspace,
    pub h_c: Subspace,
    /// Unitary `[F_v F_nil F_c]`.
    pub basis: CMatrix,
    /// `basis^* T_i basis`.
    pub blocks: Vec<CMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    V,
    Nil,
    C,
}

impl Decomposition {
    fn range(&self, part: Part) -> std::ops::Range<usize> {
        let (v, nil) = (self.h_v.dim(), self.h_nil.dim());
        match part {
            Part::V => 0..v,
            Part::Nil => v..v + nil,
            Part::C => v + nil..self.basis.ncols(),
        }
    }

    /// Block `(row, col)` of `T_i` in the adapted basis.
    pub fn block(&self, i: usize, row: Part, col: Part) -> CMatrix {
        let (r, c) = (self.range(row), self.range(col));
        self.blocks[i].view((r.start, c.start), (r.len(), c.len())).into_owned()
    }

    /// Diagonal blocks `(V_i)`, `(N_i)` or `(W_i)`.
    pub fn diagonal(&self, part: Part) -> Vec<CMatrix> {
        (0..self.blocks.len()).map(|i| self.block(i, part, part)).collect()
    }

    /// `basis · blocks_i · basis^*`
    pub fn reassemble(&self) -> Vec<CMatrix> {
        self.blocks.iter().map(|b| &self.basis * b * self.basis.adjoint()).collect()
    }
}

pub fn decompose(t: &RowTuple, exclude: Option<&Subspace>) -> Result<Decomposition> {
    let tol = t.tol();
    let report = charfun_degree(t, exclude)?;
    let m = report.degree.finite().ok_or(Error::NotPolynomial)?;
    let h_v = report.subspace(m).clone();
    let h_c = hc_subspace(t)?;
    let overlap = if h_v.is_zero() || h_c.is_zero() {
        0.0
    } else {
        op_norm(&matmul(&h_v.frame().adjoint(), h_c.frame()))
    };
    if overlap > tol.residual_abs {
        return Err(Error::CertificationFailed(format!(
            "H_v and H_c are not orthogonal (overlap {overlap:.3e})"
        )));
    }
    let both = subspace_sum(&h_v, &h_c, tol)?;
    let h_nil = complement_within(&both, &Subspace::full(t.dim()), tol);
    let basis = hstack(&[h_v.frame().clone(), h_nil.frame().clone(), h_c.frame().clone()]);
    if basis.ncols() != t.dim() {
        return Err(Error::CertificationFailed(format!(
            "subspace dimensions {} + {} + {} do not add up to {}",
            h_v.dim(),
            h_nil.dim(),
            h_c.dim(),
            t.dim()
        )));
    }
    let blocks = t.mats().iter().map(|ti| matmul(&matmul(&basis.adjoint(), ti), &basis)).collect();
    let dec = Decomposition { degree: m, h_v, h_nil, h_c, basis, blocks };
    certify(&dec, t, exclude)?;
    Ok(dec)
}

fn certify(dec: &Decomposition, t: &RowTuple, exclude: Option<&Subspace>) -> Result<()> {
    let tol = t.tol();
    let fail = |what: String| Err(Error::CertificationFailed(what));
    for i in 0..t.n() {
        for (row, col) in [(Part::Nil, Part::V), (Part::C, Part::V), (Part::C, Part::Nil)] {
            let b = dec.block(i, row, col);
            if !b.is_empty() && op_norm(&b) > tol.residual_abs {
                return fail(format!("lower block ({row:?},{col:?}) of T_{} is {:.3e}", i + 1, op_norm(&b)));
            }
        }
    }
    // V row-isometric on H_v modulo the exclusion
    let iso_on = minus_exclude(&dec.h_v, exclude, tol)?;
    let defect = row_isometry_defect(t.mats(), iso_on.frame());
    if defect > tol.residual_abs {
        return fail(format!("V block is not row-isometric (defect {defect:.3e})"));
    }
    if dec.h_nil.dim() > 0 {
        let nil = RowTuple::new(dec.diagonal(Part::Nil), *tol)?;
        match nilpotent_order(&nil) {
            Some(order) if order <= dec.degree.max(1) => {}
            other => return fail(format!("N block has order {other:?}, degree is {}", dec.degree)),
        }
    }
    if dec.h_c.dim() > 0 {
        let w = dec.diagonal(Part::C);
        let mut gram = zeros(dec.h_c.dim(), dec.h_c.dim());
        for wi in &w {
            gram += wi * wi.adjoint();
        }
        let gap = max_abs(&(gram - identity(dec.h_c.dim())));
        if gap > tol.residual_abs {
            return fail(format!("W block is not a coisometry (defect {gap:.3e})"));
        }
    }
    Ok(())
}

/// Wold data of a row isometry acting on an invariant subspace.
#[derive(Clone, Debug)]
pub struct WoldResult {
    pub wandering: Subspace,
    pub pure_part: Subspace,
    pub unitary_part: Subspace,
    pub multiplicity: usize,
}

pub fn wold(v: &RowTuple, on: &Subspace, exclude: Option<&Subspace>) -> Result<WoldResult> {
    let tol = v.tol();
    if on.ambient_dim() != v.dim() {
        return Err(Error::AmbientMismatch { left: on.ambient_dim(), right: v.dim() });
    }
    let image = joint_image(v.mats(), on, tol);
    let leak = on.containment_gap(&image);
    if leak > tol.residual_abs {
        return Err(Error::NotInvariant { leak });
    }
    let checked = minus_exclude(on, exclude, tol)?;
    let defect = row_isometry_defect(v.mats(), checked.frame());
    if defect > tol.residual_abs {
        return Err(Error::NotAnIsometry { defect });
    }
    let wandering = complement_within(&image, on, tol);
    let pure_part = invariant_closure(&wandering, v.mats(), tol);
    let unitary_part = complement_within(&pure_part, on, tol);
    Ok(WoldResult { multiplicity: wandering.dim(), wandering, pure_part, unitary_part })
}

/// Upper-triangular couplings `T_i = [[S_i⊗I, X_i, Y_i], [0, N_i, Z_i], [0, 0, W_i]]`.
#[derive(Clone, Debug, Default)]
pub struct Couplings {
    pub v_nil: Vec<CMatrix>,
    pub v_c: Vec<CMatrix>,
    pub nil_c: Vec<CMatrix>,
}

impl Couplings {
    fn is_zero(&self) -> bool {
        self.v_nil.iter().chain(&self.v_c).chain(&self.nil_c).all(|m| max_abs(m) == 0.0)
    }
}

/// A structural model: truncated shifts of multiplicity `K`, a nilpotent
/// block and a coisometric block.
#[derive(Clone, Debug)]
pub struct ModelTuple {
    pub n: usize,
    pub iso_multiplicity: usize,
    pub nil_block: Option<RowTuple>,
    pub coiso_block: Option<RowTuple>,
    pub couplings: Option<Couplings>,
    pub fock_depth: usize,
}

impl ModelTuple {
    pub fn new(n: usize, iso_multiplicity: usize, fock_depth: usize) -> Self {
        ModelTuple { n, iso_multiplicity, nil_block: None, coiso_block: None, couplings: None, fock_depth }
    }

    pub fn with_nil(mut self, nil: RowTuple) -> Self {
        self.nil_block = Some(nil);
        self
    }

    pub fn with_coiso(mut self, w: RowTuple) -> Self {
        self.coiso_block = Some(w);
        self
    }

    pub fn with_couplings(mut self, c: Couplings) -> Self {
        self.couplings = Some(c);
        self
    }

    fn dims(&self) -> Result<(usize, usize, usize)> {
        let fock = FockSpace::new(self.n, self.fock_depth)?;
        let v = if self.iso_multiplicity == 0 { 0 } else { fock.dim() * self.iso_multiplicity };
        Ok((v, self.nil_block.as_ref().map_or(0, |b| b.dim()), self.coiso_block.as_ref().map_or(0, |b| b.dim())))
    }
}

/// A realized model together with its exclusion subspace and the factor by
/// which the couplings had to be shrunk to keep the row contractive.
#[derive(Clone, Debug)]
pub struct Realization {
    pub tuple: RowTuple,
    pub exclude: Subspace,
    pub coupling_scale: f64,
}

pub fn realize(model: &ModelTuple) -> Result<Realization> {
    let tol = Tolerance::default();
    let (dv, dn, dc) = model.dims()?;
    for (name, block) in [("nilpotent", &model.nil_block), ("coisometric", &model.coiso_block)] {
        if let Some(b) = block {
            if b.n() != model.n {
                return Err(Error::ShapeMismatch(format!(
                    "{name} block has {} entries, model has n = {}",
                    b.n(),
                    model.n
                )));
            }
        }
    }
    let fock = FockSpace::new(model.n, model.fock_depth)?;
    let shifts = creation_ops(&fock, Side::Left);
    let diag: Vec<CMatrix> = (0..model.n)
        .map(|i| {
            let mut parts = Vec::new();
            if dv > 0 {
                parts.push(kron_identity(&shifts[i], model.iso_multiplicity));
            }
            if let Some(b) = &model.nil_block {
                parts.push(b.mats()[i].clone());
            }
            if let Some(b) = &model.coiso_block {
                parts.push(b.mats()[i].clone());
            }
            block_diag(&parts)
        })
        .collect();
    let total = dv + dn + dc;
    let coupling_mats: Option<Vec<CMatrix>> = match &model.couplings {
        None => None,
        Some(c) => {
            let mut out = Vec::with_capacity(model.n);
            for i in 0..model.n {
                let mut m = zeros(total, total);
                let mut place = |blocks: &Vec<CMatrix>, r: usize, col: usize, rows: usize, cols: usize, name: &str| -> Result<()> {
                    if blocks.is_empty() {
                        return Ok(());
                    }
                    let b = blocks.get(i).ok_or_else(|| Error::ShapeMismatch(format!("missing {name} coupling {}", i + 1)))?;
                    if b.shape() != (rows, cols) {
                        return Err(Error::ShapeMismatch(format!(
                            "{name} coupling has shape {:?}, expected {rows}x{cols}",
                            b.shape()
                        )));
                    }
                    m.view_mut((r, col), (rows, cols)).copy_from(b);
                    Ok(())
                };
                place(&c.v_nil, 0, dv, dv, dn, "v_nil")?;
                place(&c.v_c, 0, dv + dn, dv, dc, "v_c")?;
                place(&c.nil_c, dv, dv + dn, dn, dc, "nil_c")?;
                out.push(m);
            }
            Some(out)
        }
    };
    let assemble = |s: f64| -> Vec<CMatrix> {
        match &coupling_mats {
            None => diag.clone(),
            Some(cm) => diag.iter().zip(cm).map(|(d, c)| d + c * crate::numerics::c(s, 0.0)).collect(),
        }
    };
    let fits = |mats: &[CMatrix]| lambda_max(&row_gram(mats)) <= 1.0 + tol.residual_abs;
    let mut scale = 1.0;
    if !fits(&assemble(1.0)) {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fits(&assemble(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        scale = lo;
    }
    let tuple = RowTuple::new(assemble(scale), tol)?;
    let exclude = if dv == 0 {
        Subspace::zero(total)
    } else {
        fock.band_tensor(model.fock_depth, model.fock_depth, model.iso_multiplicity).embedded(total, 0)
    };
    Ok(Realization { tuple, exclude, coupling_scale: scale })
}

fn row_gram(mats: &[CMatrix]) -> CMatrix {
    let d = mats[0].nrows();
    let mut acc = zeros(d, d);
    for m in mats {
        acc += m * m.adjoint();
    }
    acc
}

/// Left shifts compressed to `span{e_α : |α| >= min_degree}` of `F²_N`,
/// with the top degree as exclusion.
pub fn realize_restricted_shifts(n: usize, min_degree: usize, depth: usize) -> Result<(RowTuple, Subspace)> {
    let fock = FockSpace::new(n, depth)?;
    let band = fock.band(min_degree, depth);
    let shifts = creation_ops(&fock, Side::Left);
    let mats = shifts
        .iter()
        .map(|s| compress(s, &band, &band))
        .collect::<Result<Vec<_>>>()?;
    let tuple = RowTuple::new(mats, Tolerance::default())?;
    let top = fock.band(depth, depth);
    let exclude = Subspace::from_orthonormal(band.frame().adjoint() * top.frame(), 0.0);
    Ok((tuple, exclude))
}

/// `Γ` predicted from the block structure of a coupling-free model.
///
/// With a nilpotent block of order `m >= 1` the isometric part seen by the
/// invariant is the shift restricted to degrees `>= m`, whose wandering
/// space has dimension `K n^m`.
pub fn gamma_structural(model: &ModelTuple) -> Result<GammaValue> {
    if model.couplings.as_ref().is_some_and(|c| !c.is_zero()) {
        return Err(Error::CouplingsNotZero);
    }
    let order = match &model.nil_block {
        None => 0,
        Some(b) => nilpotent_order(b).ok_or_else(|| {
            Error::ShapeMismatch("nilpotent block is not nilpotent".into())
        })?,
    };
    let k = model.iso_multiplicity;
    let p = k * model.n.pow(order as u32);
    let q = model.coiso_block.as_ref().map_or(0, |b| b.dim());
    Ok(GammaValue::new(p, order, q))
}
