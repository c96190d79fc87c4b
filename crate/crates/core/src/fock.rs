//! Words over `n` letters and the truncated full Fock space.
//!
//! The basis of the truncated space is `{e_α : |α| <= N}` in graded
//! lexicographic order, so each degree occupies a contiguous block and the
//! vacuum `e_∅` sits at index 0.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::numerics::{identity, zeros, CMatrix, Subspace, ONE};

/// Largest truncated Fock space the dense kernel accepts.
pub const MAX_FOCK_DIM: usize = 200_000;

/// Element of the free monoid on `n` generators, stored with 0-based letters.
///
/// Displayed with 1-based generator names, e.g. `g1g2`; the empty word is `g0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn letter(i: usize) -> Self {
        Word(vec![i])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// `self · g_i`
    pub fn push(&self, i: usize) -> Word {
        let mut letters = self.0.clone();
        letters.push(i);
        Word(letters)
    }

    /// Parses `g0` or a concatenation such as `g1g2g1` (1-based letters).
    pub fn parse(s: &str, n: usize) -> Result<Word> {
        let s = s.trim();
        if s == "g0" || s.is_empty() {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for part in s.split('g').skip(1) {
            let k: usize = part
                .parse()
                .map_err(|_| Error::ShapeMismatch(format!("bad word `{s}`")))?;
            if k == 0 || k > n {
                return Err(Error::ShapeMismatch(format!("letter g{k} out of range 1..={n}")));
            }
            letters.push(k - 1);
        }
        if !s.starts_with('g') {
            return Err(Error::ShapeMismatch(format!("bad word `{s}`")));
        }
        Ok(Word(letters))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "g0");
        }
        for &i in &self.0 {
            write!(f, "g{}", i + 1)?;
        }
        Ok(())
    }
}

/// All words of length `k` in lexicographic order.
pub fn words_of_length(n: usize, k: usize) -> Vec<Word> {
    let count = n.pow(k as u32);
    (0..count)
        .map(|mut r| {
            let mut letters = vec![0; k];
            for slot in letters.iter_mut().rev() {
                *slot = r % n;
                r /= n;
            }
            Word(letters)
        })
        .collect()
}

/// All words of length at most `max_len` in graded order.
pub fn words_up_to(n: usize, max_len: usize) -> Vec<Word> {
    (0..=max_len).flat_map(|k| words_of_length(n, k)).collect()
}

/// The truncated full Fock space `F²_N(H_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    n: usize,
    depth: usize,
    offsets: Vec<usize>,
}

impl FockSpace {
    pub fn new(n: usize, depth: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ShapeMismatch("need at least one generator".into()));
        }
        let mut offsets = vec![0usize];
        let mut level = 1usize;
        for _ in 0..=depth {
            let next = offsets.last().unwrap().checked_add(level);
            match next {
                Some(v) if v <= MAX_FOCK_DIM => offsets.push(v),
                _ => {
                    return Err(Error::FockTooLarge {
                        dim: next.unwrap_or(usize::MAX),
                        limit: MAX_FOCK_DIM,
                    })
                }
            }
            level = level.saturating_mul(n);
        }
        Ok(FockSpace { n, depth, offsets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.depth + 1]
    }

    /// Index range of the degree-`k` block.
    pub fn degree_range(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Index range of all degrees `<= k`.
    pub fn up_to_degree(&self, k: usize) -> Range<usize> {
        0..self.offsets[k.min(self.depth) + 1]
    }

    fn lex_rank(&self, letters: &[usize]) -> usize {
        letters.iter().fold(0, |acc, &l| acc * self.n + l)
    }

    pub fn index(&self, w: &Word) -> Option<usize> {
        if w.len() > self.depth || w.letters().iter().any(|&l| l >= self.n) {
            return None;
        }
        Some(self.offsets[w.len()] + self.lex_rank(w.letters()))
    }

    /// Index of `β·α` computed from the indices of its parts.
    fn concat_index(&self, beta_idx: usize, beta_len: usize, alpha: &Word) -> usize {
        let local = beta_idx - self.offsets[beta_len];
        let shift = self.n.pow(alpha.len() as u32);
        self.offsets[beta_len + alpha.len()] + local * shift + self.lex_rank(alpha.letters())
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        self.offsets.partition_point(|&o| o <= idx) - 1
    }

    pub fn word(&self, idx: usize) -> Word {
        let k = self.degree_of(idx);
        let mut r = idx - self.offsets[k];
        let mut letters = vec![0; k];
        for slot in letters.iter_mut().rev() {
            *slot = r % self.n;
            r /= self.n;
        }
        Word(letters)
    }

    pub fn words(&self) -> Vec<Word> {
        words_up_to(self.n, self.depth)
    }

    /// `span{e_α : |α| <= N - buffer}`.
    pub fn interior(&self, buffer: usize) -> Subspace {
        match self.depth.checked_sub(buffer) {
            Some(k) => self.band(0, k),
            None => Subspace::zero(self.dim()),
        }
    }

    /// `span{e_α : lo <= |α| <= hi}`.
    pub fn band(&self, lo: usize, hi: usize) -> Subspace {
        let hi = hi.min(self.depth);
        let idx: Vec<usize> = if lo > hi {
            Vec::new()
        } else {
            (self.offsets[lo]..self.offsets[hi + 1]).collect()
        };
        Subspace::coordinate(self.dim(), &idx)
    }

    /// Band `lo..=hi` tensored with `C^k` in the layout `e_α ⊗ C^k`.
    pub fn band_tensor(&self, lo: usize, hi: usize, k: usize) -> Subspace {
        let hi = hi.min(self.depth);
        let idx: Vec<usize> = if lo > hi {
            Vec::new()
        } else {
            (self.offsets[lo] * k..self.offsets[hi + 1] * k).collect()
        };
        Subspace::coordinate(self.dim() * k, &idx)
    }

    /// Basis vector `e_α`.
    pub fn basis_vector(&self, w: &Word) -> Option<CMatrix> {
        let i = self.index(w)?;
        let mut v = zeros(self.dim(), 1);
        v[(i, 0)] = ONE;
        Some(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `S_i e_α = e_{g_i α}`
    Left,
    /// `R_i e_α = e_{α g_i}`
    Right,
}

/// Truncated creation operators; top-degree vectors are annihilated.
pub fn creation_ops(space: &FockSpace, side: Side) -> Vec<CMatrix> {
    let dim = space.dim();
    let n = space.n();
    let mut ops = vec![zeros(dim, dim); n];
    for k in 0..space.depth() {
        for idx in space.degree_range(k) {
            let w = space.word(idx);
            for (i, op) in ops.iter_mut().enumerate() {
                let target = match side {
                    Side::Left => Word::letter(i).concat(&w),
                    Side::Right => w.push(i),
                };
                let t = space.index(&target).expect("degree below depth");
                op[(t, idx)] = ONE;
            }
        }
    }
    ops
}

/// `A ⊗ I_k`
pub fn kron_identity(a: &CMatrix, k: usize) -> CMatrix {
    a.kronecker(&identity(k))
}

/// Noncommutative power series with matrix coefficients, `c_out x c_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct RowSymbol {
    pub constant: CMatrix,
    pub coeffs: BTreeMap<Word, CMatrix>,
}

impl RowSymbol {
    pub fn new(constant: CMatrix) -> Self {
        RowSymbol { constant, coeffs: BTreeMap::new() }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.constant.shape()
    }

    fn check(&self) -> Result<()> {
        let shape = self.shape();
        for (w, c) in &self.coeffs {
            if c.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient {w} has shape {:?}, constant has {:?}",
                    c.shape(),
                    shape
                )));
            }
        }
        Ok(())
    }

    /// Coefficient of `α`, with the constant at the empty word.
    pub fn coeff(&self, w: &Word) -> Option<&CMatrix> {
        if w.is_empty() {
            Some(&self.constant)
        } else {
            self.coeffs.get(w)
        }
    }
}

/// Product `X_α = X_{α_1} ⋯ X_{α_k}` (identity for the empty word).
pub fn word_product(xs: &[CMatrix], w: &Word) -> CMatrix {
    let k = xs.first().map_or(0, |x| x.nrows());
    let mut acc = identity(k);
    for &i in w.letters() {
        acc *= &xs[i];
    }
    acc
}

/// `I ⊗ constant + Σ_{1 <= |α| <= max_len} X_α ⊗ coeff(α)`.
pub fn eval_symbol(sym: &RowSymbol, xs: &[CMatrix], max_len: usize) -> Result<CMatrix> {
    sym.check()?;
    let k = match xs.first() {
        Some(x) => x.nrows(),
        None => return Err(Error::ShapeMismatch("empty tuple".into())),
    };
    if xs.iter().any(|x| x.shape() != (k, k)) {
        return Err(Error::ShapeMismatch("tuple entries must share a square shape".into()));
    }
    let mut out = identity(k).kronecker(&sym.constant);
    for (w, coeff) in &sym.coeffs {
        if w.is_empty() || w.len() > max_len {
            continue;
        }
        if w.letters().iter().any(|&l| l >= xs.len()) {
            return Err(Error::ShapeMismatch(format!("word {w} uses a missing letter")));
        }
        out += word_product(xs, w).kronecker(coeff);
    }
    Ok(out)
}

/// Matrix of `Σ_α R_α ⊗ θ_α`, i.e. `e_β ⊗ x ↦ Σ_α e_{βα̃} ⊗ θ_α x`, on
/// `F²_N ⊗ C^{c_in} → F²_N ⊗ C^{c_out}`.
///
/// Because the operator only raises degree, this compression is exact:
/// `P_N M = P_N M P_N`.
pub fn right_symbol_matrix(space: &FockSpace, sym: &RowSymbol) -> Result<CMatrix> {
    sym.check()?;
    let (c_out, c_in) = sym.shape();
    let dim = space.dim();
    let mut out = zeros(dim * c_out, dim * c_in);
    let mut terms: Vec<(Word, &CMatrix)> = vec![(Word::empty(), &sym.constant)];
    // store reversed words: R_α appends α̃
    terms.extend(sym.coeffs.iter().filter(|(w, _)| !w.is_empty()).map(|(w, c)| (w.reverse(), c)));
    for beta_idx in 0..dim {
        let beta_len = space.degree_of(beta_idx);
        for (alpha, theta) in &terms {
            if beta_len + alpha.len() > space.depth() {
                continue;
            }
            if alpha.letters().iter().any(|&l| l >= space.n()) {
                return Err(Error::ShapeMismatch(format!("word {alpha} uses a missing letter")));
            }
            let row = space.concat_index(beta_idx, beta_len, alpha);
            let mut block = out.view_mut((row * c_out, beta_idx * c_in), (c_out, c_in));
            block += *theta;
        }
    }
    Ok(out)
}
