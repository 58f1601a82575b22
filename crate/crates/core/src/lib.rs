//! Fourier-transform factorization, sparse LP modelling of separable
//! transforms, and the apodized-pupil design problem.

pub mod dense;
pub mod error;
pub mod lp_solver;
pub mod mask_lp;
pub mod sparse_model;
pub mod transforms;

pub use error::{Error, Result};
