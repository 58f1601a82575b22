//! Mask and point-spread-function images as 8-bit binary PGM.

use std::collections::HashMap;

use ffopt::dense::DenseMatrix;
use ffopt::lp_solver::Solution;
use ffopt::mask_lp::{enumerate_pupil, pupil_var_name, MaskProblem};
use ffopt::transforms::{dft_2d_twostep, RealImage, Spacing, SpectrumGrid, SpectrumParity};

use crate::error::{CliError, CliResult};

/// Quarter-plane mask `f[k-1, l-1]`; points outside the pupil are 0.
pub fn pupil_image(p: &MaskProblem, sol: &Solution) -> CliResult<DenseMatrix> {
    let lookup: HashMap<&str, f64> = sol
        .variable_names
        .iter()
        .map(String::as_str)
        .zip(sol.values.iter().copied())
        .collect();
    let mut image = DenseMatrix::zeros(p.n, p.n);
    for pt in enumerate_pupil(p) {
        let name = pupil_var_name(pt.k, pt.l);
        let v = lookup
            .get(name.as_str())
            .ok_or_else(|| CliError::Usage(format!("solution has no value for {name}")))?;
        image[(pt.k - 1, pt.l - 1)] = *v;
    }
    Ok(image)
}

/// Reflects a quarter-plane image into the full `2n x 2n` plane.
pub fn mirror_quarter(q: &DenseMatrix) -> DenseMatrix {
    let (r, c) = (q.nrows(), q.ncols());
    let fold = |i: usize, n: usize| if i < n { n - 1 - i } else { i - n };
    DenseMatrix::from_fn(2 * r, 2 * c, |i, j| q[(fold(i, r), fold(j, c))])
}

/// `(fhat / fhat(0,0))^2` on a `size x size` grid spanning `[-rho1, rho1]^2`.
///
/// One quadrant is transformed on a zero-anchored grid and mirrored; a zero
/// peak gives a zero field.
pub fn psf_field(p: &MaskProblem, quarter: &DenseMatrix, size: usize) -> CliResult<DenseMatrix> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "image size must be odd and at least 3, got {size}"
        )));
    }
    let half = (size - 1) / 2;
    let grid = SpectrumGrid::with_spacing(
        half,
        SpectrumParity::ZeroAnchored,
        Spacing::ratio(p.rho1, half as f64),
    )?;
    let pupil = p.pupil_grid();
    let image = RealImage::new(quarter.clone(), pupil, pupil)?;
    let (fhat, _) = dft_2d_twostep(&image, &(grid, grid))?;
    let peak = fhat.values[(0, 0)];
    Ok(DenseMatrix::from_fn(size, size, |i, j| {
        if peak == 0.0 {
            return 0.0;
        }
        let v = fhat.values[(i.abs_diff(half), j.abs_diff(half))] / peak;
        v * v
    }))
}

fn to_byte(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

/// Values in `[0, 1]` mapped linearly to gray levels, row-major.
pub fn linear_stretch(field: &DenseMatrix) -> Vec<u8> {
    field.as_slice().iter().map(|&v| to_byte(v)).collect()
}

/// `log10` of values clipped to `[10^floor, 1]`, mapped to gray levels.
pub fn log_stretch(field: &DenseMatrix, floor: f64) -> CliResult<Vec<u8>> {
    if !(floor < 0.0 && floor.is_finite()) {
        return Err(CliError::Usage(format!(
            "log floor must be negative, got {floor}"
        )));
    }
    let lo = 10f64.powf(floor);
    Ok(field
        .as_slice()
        .iter()
        .map(|&v| to_byte((v.max(lo).log10() - floor) / -floor))
        .collect())
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}
