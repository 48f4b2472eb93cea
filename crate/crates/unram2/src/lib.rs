//! Counting unramified `(G,H,T)`-extensions of quadratic fields for central
//! extensions `G` of `F₂ⁿ` by `F₂`, with brute-force checks of the supporting
//! combinatorics and discriminant sweeps comparing averages to predictions.

pub mod clgroup;
pub mod count;
pub mod discs;
pub mod forms;
pub mod gf2;
pub mod group;
pub mod par;
pub mod predict;
pub mod sweep;
pub mod unlinked;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("pair is not admissible: {0}")]
    NotAdmissible(String),
    #[error("not a fundamental discriminant: {0}")]
    NotFundamental(i64),
    #[error("search budget exceeded: {0}")]
    Budget(String),
    #[error("internal check failed: {0}")]
    Mismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
