//! One-dimensional complex transforms on centered odd grids:
//! direct summation, the general two-step factorization, and the recursive
//! radix-3 scheme.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::grid::{
    centered_rem, FactorPlan, SampleGrid, SampleParity, SpectrumGrid, SpectrumParity,
};
use super::ops::{log3_exact, OpCount};
use crate::error::{Error, Result};

/// Samples `f_k`, `k = -n..=n`, stored with offset `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    grid: SampleGrid,
    values: Vec<Complex64>,
}

impl ComplexSignal {
    pub fn new(grid: SampleGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "signal has {} values, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SampleGrid) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at centered index `k`.
    pub fn at(&self, k: i64) -> Complex64 {
        self.values[(k + self.grid.half_count() as i64) as usize]
    }

    /// `sum_k |f_k|`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }
}

/// Transform values `fhat_j`, `j = -m..=m`, stored with offset `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    grid: SpectrumGrid,
    values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn grid(&self) -> &SpectrumGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, j: i64) -> Complex64 {
        self.values[(j + self.grid.half_count() as i64) as usize]
    }

    pub fn max_abs_diff(&self, other: &ComplexSpectrum) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_centered(f: &ComplexSignal, sg: &SpectrumGrid) -> Result<()> {
    if f.grid.parity() != SampleParity::OddCentered {
        return Err(Error::Dimension(
            "1D transforms need an odd-centered sample grid".into(),
        ));
    }
    if sg.parity() != SpectrumParity::OddCentered {
        return Err(Error::Dimension(
            "1D transforms need an odd-centered spectrum grid".into(),
        ));
    }
    Ok(())
}

#[inline]
fn cis(phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, s)
}

/// `fhat_j = sum_k exp(2 pi i x_k xi_j) f_k dx` by direct summation.
pub fn dft_1d_direct(f: &ComplexSignal, sg: &SpectrumGrid) -> Result<(ComplexSpectrum, OpCount)> {
    check_centered(f, sg)?;
    let dx = f.grid.dx();
    let xs = f.grid.coords();
    let mut ops = OpCount::default();
    let values = (0..sg.len())
        .map(|pos| {
            let xi = sg.coord(pos);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, v) in xs.iter().zip(&f.values) {
                acc += cis(TAU * x * xi) * v;
            }
            ops += xs.len() as u64;
            acc * dx
        })
        .collect();
    Ok((ComplexSpectrum { grid: *sg, values }, ops))
}

/// Two-step evaluation with `k = N0 k1 + k0`, `j = M0 j1 + j0`.
///
/// Step one forms `g[j0, k0]` (an `M0 x N0` table, each entry a sum over
/// `k1`); step two combines the `N0` columns with the twiddle
/// `exp(2 pi i k0 dx j dxi)`. Requires `N0 M0 dx dxi` to be an integer so
/// the cross term drops out.
pub fn dft_1d_twostep(
    f: &ComplexSignal,
    sg: &SpectrumGrid,
    plan: &FactorPlan,
) -> Result<(ComplexSpectrum, OpCount)> {
    check_centered(f, sg)?;
    plan.validate(&f.grid, sg)?;
    let xs = f.grid.spacing();
    let xis = sg.spacing();
    let n = f.grid.half_count() as i64;
    let (big_n0, big_m0) = (plan.big_n0() as i64, plan.big_m0() as i64);
    let (n0, n1, m0) = (plan.n0 as i64, plan.n1 as i64, plan.m0 as i64);
    let width = big_n0 as usize;
    let mut ops = OpCount::default();

    // g[(j0 + m0) * N0 + (k0 + n0)]
    let mut g = vec![Complex64::new(0.0, 0.0); (big_m0 * big_n0) as usize];
    for j0 in -m0..=m0 {
        let xi = xis.at(j0 as f64);
        for k0 in -n0..=n0 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in -n1..=n1 {
                let k = big_n0 * k1 + k0;
                let x = xs.at((big_n0 * k1) as f64);
                acc += cis(TAU * x * xi) * f.values[(k + n) as usize];
            }
            ops += (2 * n1 + 1) as u64;
            g[(j0 + m0) as usize * width + (k0 + n0) as usize] = acc * f.grid.dx();
        }
    }

    let m = sg.half_count() as i64;
    let mut values = Vec::with_capacity(sg.len());
    for j in -m..=m {
        let j0 = centered_rem(j, big_m0);
        let xi = xis.at(j as f64);
        let row = &g[(j0 + m0) as usize * width..][..width];
        let mut acc = Complex64::new(0.0, 0.0);
        for k0 in -n0..=n0 {
            acc += cis(TAU * xs.at(k0 as f64) * xi) * row[(k0 + n0) as usize];
        }
        ops += big_n0 as u64;
        values.push(acc);
    }
    Ok((ComplexSpectrum { grid: *sg, values }, ops))
}

/// Recursive radix-3 transform for `N = 3^p` with `N dx dxi = 1`.
pub fn fft_radix3(f: &ComplexSignal, sg: &SpectrumGrid) -> Result<(ComplexSpectrum, OpCount)> {
    check_centered(f, sg)?;
    let big_n = f.grid.len();
    if log3_exact(big_n).is_none() {
        return Err(Error::Size(format!("radix-3 needs N = 3^p, got {big_n}")));
    }
    if sg.len() != big_n {
        return Err(Error::Grid(format!(
            "radix-3 needs M = N, got M = {}",
            sg.len()
        )));
    }
    let product = f.grid.dx() * sg.dxi() * big_n as f64;
    if (product - 1.0).abs() > 1e-12 {
        return Err(Error::Grid(format!(
            "radix-3 needs N dx dxi = 1, got {product}"
        )));
    }
    let mut ops = OpCount::default();
    let ctx = Radix3 {
        values: &f.values,
        xs: f.grid.spacing(),
        xis: sg.spacing(),
        dx: f.grid.dx(),
    };
    let values = ctx.transform(
        f.grid.half_count() as i64,
        1,
        f.grid.half_count() as i64,
        &mut ops,
    );
    Ok((ComplexSpectrum { grid: *sg, values }, ops))
}

struct Radix3<'a> {
    values: &'a [Complex64],
    xs: super::grid::Spacing,
    xis: super::grid::Spacing,
    dx: f64,
}

impl Radix3<'_> {
    /// Transform of the strided view `values[center + stride * k]`,
    /// `k = -half..=half`, whose sample positions are `stride * k * dx`.
    /// Returns outputs for `j = -half..=half`.
    fn transform(&self, center: i64, stride: i64, half: i64, ops: &mut OpCount) -> Vec<Complex64> {
        if half == 0 {
            *ops += 1;
            return vec![self.values[center as usize] * self.dx];
        }
        let len = 2 * half + 1;
        let sub_len = len / 3;
        let sub_half = sub_len / 2;
        let subs: Vec<Vec<Complex64>> = (-1..=1)
            .map(|k0| self.transform(center + stride * k0, 3 * stride, sub_half, ops))
            .collect();
        let mut out = Vec::with_capacity(len as usize);
        for j in -half..=half {
            let j0 = centered_rem(j, sub_len);
            let xi = self.xis.at(j as f64);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k0, sub) in (-1..=1).zip(&subs) {
                acc += cis(TAU * self.xs.at((stride * k0) as f64) * xi)
                    * sub[(j0 + sub_half) as usize];
            }
            *ops += 3;
            out.push(acc);
        }
        out
    }
}
