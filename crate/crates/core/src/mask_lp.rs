//! Apodized-pupil LP for high-contrast imaging.
//!
//! A mask `f(x, y)` in `[0, 1]` over the unit-diameter pupil, symmetric in
//! both axes, maximizes throughput subject to `|fhat(xi, eta)| <= c fhat(0, 0)`
//! on a dark zone made of two annular sectors. The transform constraints are
//! generated either as one dense block (every dark-zone row carries every
//! pupil variable) or as two sparse blocks with auxiliary variables `g` and
//! `fhat`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse_model::{
    substitute_defined, DefinedVariable, LinearModel, ModelStats, ModelWarning, Sense, Term, VarId,
};
use crate::transforms::{
    build_cosine_kernel, SampleGrid, SampleParity, Spacing, SpectrumGrid, SpectrumParity,
};

/// Initial value of every pupil variable, recorded as a start hint.
pub const START_HINT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskProblem {
    /// Pupil half-resolution: `dx = dy = 1/(2n)`.
    pub n: usize,
    /// Transform resolution: `xi_j = eta_j = j*rho1/m`, `j = 0..=m`.
    pub m: usize,
    pub rho0: f64,
    pub rho1: f64,
    /// Relative amplitude bound.
    pub contrast: f64,
}

impl MaskProblem {
    pub const DEFAULT_RHO0: f64 = 4.0;
    pub const DEFAULT_RHO1: f64 = 20.0;
    pub const DEFAULT_CONTRAST: f64 = 1e-5;

    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            rho0: Self::DEFAULT_RHO0,
            rho1: Self::DEFAULT_RHO1,
            contrast: Self::DEFAULT_CONTRAST,
        }
    }

    pub fn with_radii(mut self, rho0: f64, rho1: f64) -> Self {
        self.rho0 = rho0;
        self.rho1 = rho1;
        self
    }

    pub fn with_contrast(mut self, contrast: f64) -> Self {
        self.contrast = contrast;
        self
    }

    /// `c = 1` is accepted: it makes every dark-zone row redundant.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Argument("n and m must be at least 1".into()));
        }
        if !(self.rho0 > 0.0 && self.rho0 < self.rho1 && self.rho1.is_finite()) {
            return Err(Error::Argument(format!(
                "need 0 < rho0 < rho1, got rho0 = {}, rho1 = {}",
                self.rho0, self.rho1
            )));
        }
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::Argument(format!(
                "need 0 < contrast <= 1, got {}",
                self.contrast
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        1.0 / (2 * self.n) as f64
    }

    /// Quarter-pupil grid, shared by `x` and `y`.
    pub fn pupil_grid(&self) -> SampleGrid {
        SampleGrid::with_spacing(
            self.n,
            SampleParity::EvenOffset,
            Spacing::ratio(1.0, (2 * self.n) as f64),
        )
        .expect("n >= 1 gives a valid pupil grid")
    }

    /// Zero-anchored focal-plane grid, shared by `xi` and `eta`.
    pub fn focal_grid(&self) -> SpectrumGrid {
        SpectrumGrid::with_spacing(
            self.m,
            SpectrumParity::ZeroAnchored,
            Spacing::ratio(self.rho1, self.m as f64),
        )
        .expect("rho1 > 0 gives a valid focal grid")
    }
}

/// Quarter-plane pupil sample; `k`, `l` are 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupilPoint {
    pub k: usize,
    pub l: usize,
    pub x: f64,
    pub y: f64,
}

/// Dark-zone sample; `j1`, `j2` are 0-based indices into the focal grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkPoint {
    pub j1: usize,
    pub j2: usize,
    pub xi: f64,
    pub eta: f64,
}

#[inline]
pub fn in_pupil(x: f64, y: f64) -> bool {
    x * x + y * y < 0.25
}

#[inline]
pub fn in_dark_zone(p: &MaskProblem, xi: f64, eta: f64) -> bool {
    let r2 = xi * xi + eta * eta;
    r2 >= p.rho0 * p.rho0 && r2 <= p.rho1 * p.rho1 && eta <= xi
}

/// Pupil points in row-major `(k, l)` order.
pub fn enumerate_pupil(p: &MaskProblem) -> Vec<PupilPoint> {
    let grid = p.pupil_grid();
    let coords = grid.coords();
    let mut out = Vec::new();
    for (ki, &x) in coords.iter().enumerate() {
        for (li, &y) in coords.iter().enumerate() {
            if in_pupil(x, y) {
                out.push(PupilPoint {
                    k: ki + 1,
                    l: li + 1,
                    x,
                    y,
                });
            }
        }
    }
    out
}

/// Dark-zone points in row-major `(j1, j2)` order.
pub fn enumerate_darkhole(p: &MaskProblem) -> Vec<DarkPoint> {
    let coords = p.focal_grid().coords();
    let mut out = Vec::new();
    for (j1, &xi) in coords.iter().enumerate() {
        for (j2, &eta) in coords.iter().enumerate() {
            if in_dark_zone(p, xi, eta) {
                out.push(DarkPoint { j1, j2, xi, eta });
            }
        }
    }
    out
}

pub fn pupil_var_name(k: usize, l: usize) -> String {
    format!("f[{k},{l}]")
}

fn add_pupil_variables(
    p: &MaskProblem,
    model: &mut LinearModel,
    pupil: &[PupilPoint],
) -> Result<Vec<VarId>> {
    let area = p.dx() * p.dx();
    let mut ids = Vec::with_capacity(pupil.len());
    for pt in pupil {
        let id = model.add_variable(pupil_var_name(pt.k, pt.l), 0.0, 1.0)?;
        model.set_start(id, START_HINT);
        ids.push(id);
    }
    model.set_objective(ids.iter().map(|&id| Term::new(id, area)).collect(), 0.0)?;
    Ok(ids)
}

fn degenerate_warnings(model: &mut LinearModel, pupil: &[PupilPoint], dark: &[DarkPoint]) {
    if pupil.is_empty() {
        model.push_warning(ModelWarning::Degenerate("pupil has no grid points".into()));
    }
    if dark.is_empty() {
        model.push_warning(ModelWarning::Degenerate(
            "dark zone has no grid points".into(),
        ));
    }
}

fn sidelobe_rows(
    model: &mut LinearModel,
    p: &MaskProblem,
    dark: &[DarkPoint],
    fhat: impl Fn(usize, usize) -> VarId,
) -> Result<()> {
    let origin = fhat(0, 0);
    for d in dark {
        let v = fhat(d.j1, d.j2);
        model.add_row(
            format!("sidelobe_pos[{},{}]", d.j1, d.j2),
            vec![Term::new(v, 1.0), Term::new(origin, -p.contrast)],
            f64::NEG_INFINITY,
            0.0,
        )?;
        model.add_row(
            format!("sidelobe_neg[{},{}]", d.j1, d.j2),
            vec![Term::new(v, -1.0), Term::new(origin, -p.contrast)],
            f64::NEG_INFINITY,
            0.0,
        )?;
    }
    Ok(())
}

/// Coefficient of pupil sample `(k, l)` in `fhat(xi_j1, eta_j2)`.
#[inline]
pub fn onestep_coefficient(kernel: &DenseMatrix, j1: usize, j2: usize, k: usize, l: usize) -> f64 {
    4.0 * kernel[(j1, k - 1)] * kernel[(j2, l - 1)]
}

/// Dense formulation: `fhat` values are defined variables substituted into
/// the dark-zone rows.
pub fn build_onestep_model(p: &MaskProblem) -> Result<LinearModel> {
    p.validate()?;
    let pupil = enumerate_pupil(p);
    let dark = enumerate_darkhole(p);
    let kernel = build_cosine_kernel(&p.pupil_grid(), &p.focal_grid());

    let mut model = LinearModel::new(format!("onestep_n{}_m{}", p.n, p.m), Sense::Maximize);
    let f = add_pupil_variables(p, &mut model, &pupil)?;

    let mut points: BTreeMap<(usize, usize), VarId> = BTreeMap::new();
    for (j1, j2) in std::iter::once((0, 0)).chain(dark.iter().map(|d| (d.j1, d.j2))) {
        if let Entry::Vacant(slot) = points.entry((j1, j2)) {
            slot.insert(model.add_defined(format!("fhat[{j1},{j2}]"))?);
        }
    }
    sidelobe_rows(&mut model, p, &dark, |a, b| points[&(a, b)])?;

    let defs: Vec<DefinedVariable> = points
        .iter()
        .map(|(&(j1, j2), &id)| DefinedVariable {
            name: model.variable(id).name.clone(),
            terms: pupil
                .iter()
                .zip(&f)
                .map(|(pt, &v)| Term::new(v, onestep_coefficient(&kernel, j1, j2, pt.k, pt.l)))
                .collect(),
        })
        .collect();
    let mut out = substitute_defined(&model, &defs)?;
    degenerate_warnings(&mut out, &pupil, &dark);
    Ok(out)
}

/// Sparse formulation with `g[j, l] = 2 sum_k f[k, l] K[j, k]` and
/// `fhat[j1, j2] = 2 sum_l g[j1, l] K[j2, l]` as explicit equality rows.
pub fn build_twostep_model(p: &MaskProblem) -> Result<LinearModel> {
    p.validate()?;
    let pupil = enumerate_pupil(p);
    let dark = enumerate_darkhole(p);
    let kernel = build_cosine_kernel(&p.pupil_grid(), &p.focal_grid());
    let (n, mp) = (p.n, p.m + 1);

    let mut model = LinearModel::new(format!("twostep_n{}_m{}", p.n, p.m), Sense::Maximize);
    let f = add_pupil_variables(p, &mut model, &pupil)?;

    let mut g = Vec::with_capacity(mp * n);
    for j in 0..mp {
        for l in 1..=n {
            g.push(model.add_variable(format!("g[{j},{l}]"), f64::NEG_INFINITY, f64::INFINITY)?);
        }
    }
    let mut fhat = Vec::with_capacity(mp * mp);
    for j1 in 0..mp {
        for j2 in 0..mp {
            fhat.push(model.add_variable(
                format!("fhat[{j1},{j2}]"),
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?);
        }
    }

    let mut by_column: Vec<Vec<(usize, VarId)>> = vec![Vec::new(); n];
    for (pt, &v) in pupil.iter().zip(&f) {
        by_column[pt.l - 1].push((pt.k, v));
    }

    for j in 0..mp {
        for l in 1..=n {
            let mut terms = Vec::with_capacity(by_column[l - 1].len() + 1);
            terms.push(Term::new(g[j * n + l - 1], 1.0));
            for &(k, v) in &by_column[l - 1] {
                terms.push(Term::new(v, -2.0 * kernel[(j, k - 1)]));
            }
            model.add_row(format!("g_def[{j},{l}]"), terms, 0.0, 0.0)?;
        }
    }
    for j1 in 0..mp {
        for j2 in 0..mp {
            let mut terms = Vec::with_capacity(n + 1);
            terms.push(Term::new(fhat[j1 * mp + j2], 1.0));
            for l in 1..=n {
                terms.push(Term::new(g[j1 * n + l - 1], -2.0 * kernel[(j2, l - 1)]));
            }
            model.add_row(format!("fhat_def[{j1},{j2}]"), terms, 0.0, 0.0)?;
        }
    }
    sidelobe_rows(&mut model, p, &dark, |a, b| fhat[a * mp + b])?;
    degenerate_warnings(&mut model, &pupil, &dark);
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    OneStep,
    TwoStep,
}

impl std::str::FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onestep" => Ok(Formulation::OneStep),
            "twostep" => Ok(Formulation::TwoStep),
            other => Err(Error::Argument(format!("unknown formulation `{other}`"))),
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Formulation::OneStep => "onestep",
            Formulation::TwoStep => "twostep",
        })
    }
}

pub fn build_model(p: &MaskProblem, formulation: Formulation) -> Result<LinearModel> {
    match formulation {
        Formulation::OneStep => build_onestep_model(p),
        Formulation::TwoStep => build_twostep_model(p),
    }
}

/// Model size from the enumerations alone, without materializing any rows.
pub fn predicted_stats(p: &MaskProblem, formulation: Formulation) -> ModelStats {
    let pupil = enumerate_pupil(p);
    let dark = enumerate_darkhole(p).len();
    let (n, mp) = (p.n, p.m + 1);
    match formulation {
        Formulation::OneStep => ModelStats {
            n_constraints: 2 * dark,
            n_variables: pupil.len(),
            n_nonzeros: 2 * dark * pupil.len(),
        },
        Formulation::TwoStep => ModelStats {
            n_constraints: mp * n + mp * mp + 2 * dark,
            n_variables: pupil.len() + mp * n + mp * mp,
            n_nonzeros: mp * (pupil.len() + n) + mp * mp * (n + 1) + 4 * dark,
        },
    }
}
