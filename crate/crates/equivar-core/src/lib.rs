//! Local complete-intersection equations for phylogenetic varieties of
//! G-equivariant Markov models on trees.
//!
//! The crate is `no_std` with `alloc`. It covers permutation groups and their
//! representations, dense tensors in `⊗ⁿW`, bases of `(⊗ⁿW)^G` adapted to an
//! edge split, thin flattenings and their distinguished minors, the tripod
//! equation sets (general Markov, strand symmetric, Jukes–Cantor), the
//! recursive assembly over a tree, the Markov parametrization and the numeric
//! checks built on top of all of it.
//!
//! Tensor index convention, used everywhere: entry `(x₁,…,xₙ)` lives at
//! `Σ xᵢ·κ^(n−i)`, so leaf 1 is the most significant digit.
#![no_std]

extern crate alloc;

pub mod ci_builder;
pub mod claw_equations;
pub mod flattening;
pub mod linalg;
pub mod model_param;
pub mod perm_rep;
pub mod split_basis;
pub mod tensor;
pub mod tree;
pub mod verify;

use alloc::string::String;

pub use num_complex::Complex64 as C64;

pub use ci_builder::{build_ci, codimension, EquationSystem};
pub use claw_equations::{claw_set, ClawEquationSet};
pub use flattening::{MinorEquation, Provenance};
pub use model_param::{evaluate_psi, random_parameters, Parameters, SampleOptions};
pub use perm_rep::{Model, ModelName, PermGroup, Permutation};
pub use split_basis::{build_split_basis, SplitBasis};
pub use tensor::Tensor;
pub use tree::{parse_newick, EdgeSplit, Tree};

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("characters unavailable for this group")]
    CharactersUnavailable,
    #[error("realization unavailable for irrep {0}")]
    RealizationUnavailable(usize),
    #[error("non-integer multiplicity {value} for irrep {k} (wrong character table?)")]
    NonIntegerMultiplicity { k: usize, value: f64 },
    #[error("invalid character table: {0}")]
    InvalidCharacterTable(String),
    #[error("newick parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("tensor too large: kappa^n must not exceed 2^26")]
    TensorTooLarge,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invariance violation: {0}")]
    InvarianceViolation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("tensor not in invariant subspace (residual {residual:e})")]
    NotInvariant { residual: f64 },
    #[error("claw equations unavailable for ({model}, {degree})")]
    ClawUnavailable { model: String, degree: usize },
    #[error("no generic parameters after {0} attempts")]
    SamplingFailed(usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
