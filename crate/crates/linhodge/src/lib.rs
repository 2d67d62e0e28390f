//! Exact computation of linear Hodge integrals, the Virasoro-type operators that
//! annihilate their generating function, and machinery for checking the
//! identities between them on truncated graded rings.
//!
//! Layout, bottom up: [`exactnum`] (rationals, number families), [`series`]
//! (truncated one-variable series and the named series), [`qring`] (graded
//! polynomial rings in `q_k` or `t_k` with a `u` coefficient), [`diffop`]
//! (differential operators and their action), [`algebra`] (an abstract
//! Heisenberg-Virasoro algebra used as a slow oracle), [`tables`] (intersection
//! numbers and Hodge integrals), [`verify`] (the named checks).

pub mod algebra;
pub mod diffop;
pub mod exactnum;
pub mod exec;
pub mod qring;
pub mod series;
pub mod tables;
pub mod verify;

pub use exactnum::Rational;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("incomplete operator: {0}")]
    Incomplete(String),
    #[error("structural: {0}")]
    Structural(String),
    #[error("missing bracket: {0}")]
    MissingBracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
