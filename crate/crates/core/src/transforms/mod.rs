//! Discrete Fourier transforms in executable and operation-count form.
//!
//! Every executable transform returns the number of multiply/adds it
//! performed; [`predict_ops`] gives the same number in closed form.

mod complex1d;
mod cosine2d;
mod grid;
mod ops;

pub use complex1d::{dft_1d_direct, dft_1d_twostep, fft_radix3, ComplexSignal, ComplexSpectrum};
pub use cosine2d::{build_cosine_kernel, dft_2d_direct, dft_2d_twostep, RealImage, RealSpectrum2D};
pub use grid::{
    FactorPlan, SampleGrid, SampleParity, Spacing, SpectrumGrid, SpectrumParity, INTEGRALITY_TOL,
};
pub use ops::{log3_exact, predict_ops, OpCount, Scheme, Sizes, COMPLEX_TO_REAL_COST};
