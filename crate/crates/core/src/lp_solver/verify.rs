use std::collections::HashMap;

use serde::Serialize;

use super::Solution;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::mask_lp::{enumerate_darkhole, enumerate_pupil, pupil_var_name, MaskProblem};
use crate::transforms::{dft_2d_direct, RealImage};

const BINARY_TOL: f64 = 1e-3;

/// Mask quality recomputed from the pupil values alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `max |Fhat| - c Fhat(0,0)` over the dark zone; 0 when it is empty.
    pub max_contrast_violation: f64,
    pub max_bound_violation: f64,
    pub throughput: f64,
    pub binary_fraction: f64,
    /// `Fhat(0,0)`.
    pub peak: f64,
}

/// Checks a solution against the direct transform of its pupil values.
pub fn verify_mask_solution(p: &MaskProblem, sol: &Solution) -> Result<FeasibilityReport> {
    p.validate()?;
    let lookup: HashMap<&str, f64> = sol
        .variable_names
        .iter()
        .map(String::as_str)
        .zip(sol.values.iter().copied())
        .collect();
    let pupil = enumerate_pupil(p);
    let grid = p.pupil_grid();
    let mut image = DenseMatrix::zeros(p.n, p.n);
    let mut bound_violation: f64 = 0.0;
    let mut binary = 0usize;
    let mut total = 0.0;
    for pt in &pupil {
        let name = pupil_var_name(pt.k, pt.l);
        let v = *lookup
            .get(name.as_str())
            .ok_or_else(|| Error::Verification(format!("no value for {name}")))?;
        if !v.is_finite() {
            return Err(Error::Verification(format!("{name} = {v}")));
        }
        image[(pt.k - 1, pt.l - 1)] = v;
        bound_violation = bound_violation.max(-v).max(v - 1.0);
        if v.abs() <= BINARY_TOL || (v - 1.0).abs() <= BINARY_TOL {
            binary += 1;
        }
        total += v;
    }
    let image = RealImage::new(image, grid, grid)?;
    let focal = p.focal_grid();
    let (fhat, _) = dft_2d_direct(&image, &(focal, focal))?;
    let peak = fhat.values[(0, 0)];
    let dark = enumerate_darkhole(p);
    let violation = dark
        .iter()
        .map(|d| fhat.values[(d.j1, d.j2)].abs() - p.contrast * peak)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        })
        .unwrap_or(0.0);
    Ok(FeasibilityReport {
        max_contrast_violation: violation,
        max_bound_violation: bound_violation,
        throughput: total * p.dx() * p.dx(),
        binary_fraction: if pupil.is_empty() {
            0.0
        } else {
            binary as f64 / pupil.len() as f64
        },
        peak,
    })
}
