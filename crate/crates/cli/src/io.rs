//! Input files. Complex entries are `[re, im]` pairs.

use std::fs;
use std::path::Path;

use rowball_core::{AutElement, CMatrix, RowTuple, Subspace, Tolerance, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub n: usize,
    pub dim: usize,
    pub matrices: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerance>,
    /// Basis indices spanning the exclusion subspace of a truncated model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutFile {
    pub n: usize,
    pub u: Matrix,
    pub lambda: Vec<[f64; 2]>,
}

/// Structural description of a model tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub iso_multiplicity: usize,
    pub fock_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nil: Option<TupleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coiso: Option<TupleFile>,
}

/// Raw bytes of an input together with their digest.
pub struct Input {
    pub path: String,
    pub text: String,
    pub sha256: String,
}

pub fn read_input(path: &Path) -> Result<Input, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(Input { path: path.display().to_string(), text, sha256 })
}

pub fn parse<T: for<'de> Deserialize<'de>>(input: &Input) -> Result<T, CliError> {
    serde_json::from_str(&input.text).map_err(|e| CliError::Parse(format!("{}: {e}", input.path)))
}

pub fn to_matrix(m: &Matrix, rows: usize, cols: usize, field: &str) -> Result<CMatrix, CliError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(CliError::Parse(format!("{field}: expected a {rows}x{cols} matrix")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| C64::new(m[i][j][0], m[i][j][1])))
}

pub fn from_matrix(m: &CMatrix) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl TupleFile {
    pub fn from_tuple(t: &RowTuple, exclude: Option<&Subspace>) -> Self {
        TupleFile {
            n: t.n(),
            dim: t.dim(),
            matrices: t.mats().iter().map(from_matrix).collect(),
            tolerance: None,
            exclude: exclude.map(coordinate_indices),
        }
    }

    /// Builds the tuple, applying `residual_override` on top of any file tolerance.
    pub fn to_tuple(&self, residual_override: Option<f64>) -> Result<(RowTuple, Option<Subspace>), CliError> {
        if self.matrices.len() != self.n {
            return Err(CliError::Parse(format!("matrices: expected {} entries, found {}", self.n, self.matrices.len())));
        }
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| to_matrix(m, self.dim, self.dim, &format!("matrices[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut tol = self.tolerance.unwrap_or_default();
        if let Some(r) = residual_override {
            tol.residual_abs = r;
        }
        let tuple = RowTuple::new(mats, tol)?;
        let exclude = match &self.exclude {
            None => None,
            Some(idx) => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
                    return Err(CliError::Parse(format!("exclude: index {bad} outside dimension {}", self.dim)));
                }
                Some(Subspace::coordinate(self.dim, idx))
            }
        };
        Ok((tuple, exclude))
    }
}

impl AutFile {
    pub fn from_aut(a: &AutElement) -> Self {
        AutFile { n: a.n(), u: from_matrix(a.u()), lambda: a.lambda().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn to_aut(&self) -> Result<AutElement, CliError> {
        if self.lambda.len() != self.n {
            return Err(CliError::Parse(format!("lambda: expected {} entries, found {}", self.n, self.lambda.len())));
        }
        let u = to_matrix(&self.u, self.n, self.n, "u")?;
        let lambda = self.lambda.iter().map(|p| C64::new(p[0], p[1])).collect();
        Ok(AutElement::new(u, lambda)?)
    }
}

/// Indices `i` whose basis vector lies in a coordinate subspace.
fn coordinate_indices(s: &Subspace) -> Vec<usize> {
    let p = s.projector();
    (0..p.nrows()).filter(|&i| p[(i, i)].re > 0.5).collect()
}
