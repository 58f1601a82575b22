//! Two-dimensional transforms of functions that are even in both axes.
//!
//! Only the positive quadrant is stored; the transform is real and reduces
//! to a product of cosine kernels.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use super::grid::{SampleGrid, SampleParity, SpectrumGrid, SpectrumParity};
use super::ops::OpCount;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Quarter-plane image `F[k1, k2] = f(x_k1, y_k2)`; rows follow `x`,
/// columns follow `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    pub values: DenseMatrix,
    pub xgrid: SampleGrid,
    pub ygrid: SampleGrid,
}

impl RealImage {
    pub fn new(values: DenseMatrix, xgrid: SampleGrid, ygrid: SampleGrid) -> Result<Self> {
        for g in [&xgrid, &ygrid] {
            if g.parity() != SampleParity::EvenOffset {
                return Err(Error::Dimension(
                    "quarter-plane images need even-offset grids".into(),
                ));
            }
        }
        if values.nrows() != xgrid.len() || values.ncols() != ygrid.len() {
            return Err(Error::Dimension(format!(
                "image is {}x{}, grids are {}x{}",
                values.nrows(),
                values.ncols(),
                xgrid.len(),
                ygrid.len()
            )));
        }
        Ok(Self {
            values,
            xgrid,
            ygrid,
        })
    }
}

/// Transform values `Fhat[j1, j2]` on `(xi, eta)` grids.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSpectrum2D {
    pub values: DenseMatrix,
    pub xigrid: SpectrumGrid,
    pub etagrid: SpectrumGrid,
}

/// `K[j, k] = cos(2 pi x_k xi_j) dx`, rows over transform points.
pub fn build_cosine_kernel(x: &SampleGrid, xi: &SpectrumGrid) -> DenseMatrix {
    let xs = x.coords();
    let dx = x.dx();
    DenseMatrix::from_fn(xi.len(), x.len(), |j, k| {
        let xi_j = xi.coord(j);
        (2.0 * PI * xs[k] * xi_j).cos() * dx
    })
}

fn check_spectrum_grids(sg: &(SpectrumGrid, SpectrumGrid)) -> Result<()> {
    for g in [&sg.0, &sg.1] {
        if g.parity() == SpectrumParity::OddCentered {
            return Err(Error::Dimension(
                "cosine transforms need even-offset or zero-anchored spectrum grids".into(),
            ));
        }
    }
    Ok(())
}

/// `Fhat[j1,j2] = 4 sum_k1 sum_k2 cos(2 pi x xi) cos(2 pi y eta) F[k1,k2] dy dx`,
/// one product-accumulate per term.
pub fn dft_2d_direct(
    image: &RealImage,
    sg: &(SpectrumGrid, SpectrumGrid),
) -> Result<(RealSpectrum2D, OpCount)> {
    check_spectrum_grids(sg)?;
    let kx = build_cosine_kernel(&image.xgrid, &sg.0);
    let ky = build_cosine_kernel(&image.ygrid, &sg.1);
    Ok(direct_with_kernels(image, &kx, &ky, sg))
}

pub(crate) fn direct_with_kernels(
    image: &RealImage,
    kx: &DenseMatrix,
    ky: &DenseMatrix,
    sg: &(SpectrumGrid, SpectrumGrid),
) -> (RealSpectrum2D, OpCount) {
    let f = &image.values;
    let (nx, ny) = (f.nrows(), f.ncols());
    let mut out = DenseMatrix::zeros(kx.nrows(), ky.nrows());
    for j1 in 0..kx.nrows() {
        let kx_row = kx.row(j1);
        for j2 in 0..ky.nrows() {
            let ky_row = ky.row(j2);
            let mut acc = 0.0;
            for k1 in 0..nx {
                let f_row = f.row(k1);
                for k2 in 0..ny {
                    acc += 4.0 * kx_row[k1] * ky_row[k2] * f_row[k2];
                }
            }
            out[(j1, j2)] = acc;
        }
    }
    let ops = OpCount((kx.nrows() * ky.nrows() * nx * ny) as u64);
    (
        RealSpectrum2D {
            values: out,
            xigrid: sg.0,
            etagrid: sg.1,
        },
        ops,
    )
}

/// `G = 2 Kx F`, then `Fhat = 2 G Ky^T`.
pub fn dft_2d_twostep(
    image: &RealImage,
    sg: &(SpectrumGrid, SpectrumGrid),
) -> Result<(RealSpectrum2D, OpCount)> {
    check_spectrum_grids(sg)?;
    let kx = build_cosine_kernel(&image.xgrid, &sg.0);
    let ky = build_cosine_kernel(&image.ygrid, &sg.1);
    Ok(twostep_with_kernels(image, &kx, &ky, sg))
}

pub(crate) fn twostep_with_kernels(
    image: &RealImage,
    kx: &DenseMatrix,
    ky: &DenseMatrix,
    sg: &(SpectrumGrid, SpectrumGrid),
) -> (RealSpectrum2D, OpCount) {
    let f = &image.values;
    let (nx, ny) = (f.nrows(), f.ncols());
    let (mx, my) = (kx.nrows(), ky.nrows());

    let mut g = DenseMatrix::zeros(mx, ny);
    for j1 in 0..mx {
        let kx_row = kx.row(j1);
        for k2 in 0..ny {
            let mut acc = 0.0;
            for k1 in 0..nx {
                acc += 2.0 * kx_row[k1] * f[(k1, k2)];
            }
            g[(j1, k2)] = acc;
        }
    }

    let mut out = DenseMatrix::zeros(mx, my);
    for j1 in 0..mx {
        let g_row = g.row(j1);
        for j2 in 0..my {
            let ky_row = ky.row(j2);
            let mut acc = 0.0;
            for k2 in 0..ny {
                acc += 2.0 * ky_row[k2] * g_row[k2];
            }
            out[(j1, j2)] = acc;
        }
    }
    let ops = OpCount((mx * nx * ny + mx * my * ny) as u64);
    (
        RealSpectrum2D {
            values: out,
            xigrid: sg.0,
            etagrid: sg.1,
        },
        ops,
    )
}
