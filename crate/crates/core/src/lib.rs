//! Unitary invariants of finite-dimensional row contractions and the
//! automorphism group of the noncommutative unit ball.

pub mod charfun;
pub mod contraction;
mod dense;
pub mod error;
pub mod fock;
pub mod invariants;
pub mod mobius;
pub mod numerics;
pub mod projrep;
pub mod sample;

pub use charfun::{CharFun, CoincidenceOutcome, DegreeReport};
pub use contraction::{CpLimit, DefectData, PoissonKernel, Purity, RowTuple};
pub use error::{Error, Result};
pub use fock::{FockSpace, RowSymbol, Side, Word};
pub use invariants::{Decomposition, GammaValue, Label, ModelTuple, NatInf, WoldResult};
pub use mobius::{AutElement, Interval};
pub use numerics::{CMatrix, CVector, Subspace, Tolerance, C64};
pub use projrep::{Cocycle, ProjRepElement};
