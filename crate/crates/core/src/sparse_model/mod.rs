//! Bounded-variable linear programs and the sparse block constructions that
//! encode a separable 2D transform as constraint rows.
//!
//! With `vec` stacking columns, `G = K F` becomes
//! `vec(G) = diag(K, ..., K) vec(F)` and `Fhat = G K^T` becomes
//! `vec(Fhat) = (K (x) I) vec(G)`. Both matrices are sparse; their product
//! is dense.

mod model;
mod sparse;

pub use model::{
    model_stats, substitute_defined, DefinedVariable, LinearModel, ModelStats, ModelWarning,
    Objective, Row, Sense, Term, VarId, VarKind, Variable,
};
pub use sparse::{blockdiag_rows, kron_identity_rows, SparseMatrix};
