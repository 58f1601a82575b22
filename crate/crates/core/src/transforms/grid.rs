//! Discretization geometry for the sample (function) side and the spectrum
//! (transform) side of a transform.

use crate::error::{Error, Result};

/// Grid step kept as a ratio; coordinates are formed as
/// `index * numer / denom` (e.g. `j*rho1/m`), not `index * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing {
    numer: f64,
    denom: f64,
}

impl Spacing {
    pub fn new(step: f64) -> Self {
        Self {
            numer: step,
            denom: 1.0,
        }
    }

    pub fn ratio(numer: f64, denom: f64) -> Self {
        Self { numer, denom }
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.numer / self.denom
    }

    /// Coordinate of the (possibly half-integer) position `t`.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        t * self.numer / self.denom
    }

    fn validate(&self, what: &str) -> Result<()> {
        let step = self.step();
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Grid(format!(
                "{what} spacing must be positive, got {step}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleParity {
    /// `N = 2n+1` points at `k*dx`, `k = -n..=n`.
    OddCentered,
    /// `n` positive-quadrant points at `(k - 1/2)*dx`, `k = 1..=n`.
    EvenOffset,
}

/// Function-space grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    n: usize,
    parity: SampleParity,
    spacing: Spacing,
}

impl SampleGrid {
    pub fn odd_centered(n: usize, dx: f64) -> Result<Self> {
        Self::with_spacing(n, SampleParity::OddCentered, Spacing::new(dx))
    }

    pub fn even_offset(n: usize, dx: f64) -> Result<Self> {
        Self::with_spacing(n, SampleParity::EvenOffset, Spacing::new(dx))
    }

    pub fn with_spacing(n: usize, parity: SampleParity, spacing: Spacing) -> Result<Self> {
        spacing.validate("sample")?;
        if parity == SampleParity::EvenOffset && n == 0 {
            return Err(Error::Grid("even-offset grid needs n >= 1".into()));
        }
        Ok(Self { n, parity, spacing })
    }

    /// Centered odd grid with `len` points; `len` must be odd.
    pub fn odd_with_len(len: usize, dx: f64) -> Result<Self> {
        if len.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "odd-centered grid needs an odd point count, got {len}"
            )));
        }
        Self::odd_centered(len / 2, dx)
    }

    pub fn half_count(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> SampleParity {
        self.parity
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn dx(&self) -> f64 {
        self.spacing.step()
    }

    /// Number of stored points.
    pub fn len(&self) -> usize {
        match self.parity {
            SampleParity::OddCentered => 2 * self.n + 1,
            SampleParity::EvenOffset => self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of the point stored at zero-based position `pos`.
    pub fn coord(&self, pos: usize) -> f64 {
        match self.parity {
            SampleParity::OddCentered => self.spacing.at(pos as f64 - self.n as f64),
            SampleParity::EvenOffset => self.spacing.at(pos as f64 + 0.5),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|p| self.coord(p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumParity {
    /// `M = 2m+1` points at `j*dxi`, `j = -m..=m`.
    OddCentered,
    /// `m` points at `(j - 1/2)*dxi`, `j = 1..=m`.
    EvenOffset,
    /// `m+1` points at `j*dxi`, `j = 0..=m`; contains the origin exactly.
    ZeroAnchored,
}

/// Transform-space grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumGrid {
    m: usize,
    parity: SpectrumParity,
    spacing: Spacing,
}

impl SpectrumGrid {
    pub fn odd_centered(m: usize, dxi: f64) -> Result<Self> {
        Self::with_spacing(m, SpectrumParity::OddCentered, Spacing::new(dxi))
    }

    pub fn even_offset(m: usize, dxi: f64) -> Result<Self> {
        Self::with_spacing(m, SpectrumParity::EvenOffset, Spacing::new(dxi))
    }

    pub fn zero_anchored(m: usize, dxi: f64) -> Result<Self> {
        Self::with_spacing(m, SpectrumParity::ZeroAnchored, Spacing::new(dxi))
    }

    pub fn with_spacing(m: usize, parity: SpectrumParity, spacing: Spacing) -> Result<Self> {
        spacing.validate("spectrum")?;
        if parity == SpectrumParity::EvenOffset && m == 0 {
            return Err(Error::Grid("even-offset grid needs m >= 1".into()));
        }
        Ok(Self { m, parity, spacing })
    }

    pub fn odd_with_len(len: usize, dxi: f64) -> Result<Self> {
        if len.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "odd-centered grid needs an odd point count, got {len}"
            )));
        }
        Self::odd_centered(len / 2, dxi)
    }

    pub fn half_count(&self) -> usize {
        self.m
    }

    pub fn parity(&self) -> SpectrumParity {
        self.parity
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn dxi(&self) -> f64 {
        self.spacing.step()
    }

    pub fn len(&self) -> usize {
        match self.parity {
            SpectrumParity::OddCentered => 2 * self.m + 1,
            SpectrumParity::EvenOffset => self.m,
            SpectrumParity::ZeroAnchored => self.m + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, pos: usize) -> f64 {
        match self.parity {
            SpectrumParity::OddCentered => self.spacing.at(pos as f64 - self.m as f64),
            SpectrumParity::EvenOffset => self.spacing.at(pos as f64 + 0.5),
            SpectrumParity::ZeroAnchored => self.spacing.at(pos as f64),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|p| self.coord(p)).collect()
    }
}

/// Tolerance on `|round(v) - v|` for the integrality condition.
pub const INTEGRALITY_TOL: f64 = 1e-9;

/// Odd factorization `N = N0*N1`, `M = M0*M1` used by the two-step
/// transform. Stored by half-counts, so every factor is odd by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactorPlan {
    pub n0: usize,
    pub n1: usize,
    pub m0: usize,
    pub m1: usize,
}

impl FactorPlan {
    pub fn new(n0: usize, n1: usize, m0: usize, m1: usize) -> Self {
        Self { n0, n1, m0, m1 }
    }

    /// Builds a plan from odd factor sizes `(N0, N1, M0, M1)`.
    pub fn from_factors(
        big_n0: usize,
        big_n1: usize,
        big_m0: usize,
        big_m1: usize,
    ) -> Result<Self> {
        for (name, f) in [
            ("N0", big_n0),
            ("N1", big_n1),
            ("M0", big_m0),
            ("M1", big_m1),
        ] {
            if f % 2 == 0 {
                return Err(Error::Factorization(format!("{name} = {f} is not odd")));
            }
        }
        Ok(Self::new(big_n0 / 2, big_n1 / 2, big_m0 / 2, big_m1 / 2))
    }

    pub fn big_n0(&self) -> usize {
        2 * self.n0 + 1
    }
    pub fn big_n1(&self) -> usize {
        2 * self.n1 + 1
    }
    pub fn big_m0(&self) -> usize {
        2 * self.m0 + 1
    }
    pub fn big_m1(&self) -> usize {
        2 * self.m1 + 1
    }

    /// Checks the plan against a sample/spectrum grid pair: the factor
    /// products must match the point counts and `N0*M0*dx*dxi` must be an
    /// integer.
    pub fn validate(&self, x: &SampleGrid, xi: &SpectrumGrid) -> Result<()> {
        if x.parity() != SampleParity::OddCentered || xi.parity() != SpectrumParity::OddCentered {
            return Err(Error::Factorization(
                "two-step plans need odd-centered grids".into(),
            ));
        }
        if self.big_n0() * self.big_n1() != x.len() {
            return Err(Error::Factorization(format!(
                "N0*N1 = {}*{} != N = {}",
                self.big_n0(),
                self.big_n1(),
                x.len()
            )));
        }
        if self.big_m0() * self.big_m1() != xi.len() {
            return Err(Error::Factorization(format!(
                "M0*M1 = {}*{} != M = {}",
                self.big_m0(),
                self.big_m1(),
                xi.len()
            )));
        }
        let v = self.big_n0() as f64 * self.big_m0() as f64 * x.dx() * xi.dxi();
        if (v.round() - v).abs() > INTEGRALITY_TOL {
            return Err(Error::Factorization(format!(
                "N0*M0*dx*dxi = {v} is not an integer"
            )));
        }
        Ok(())
    }

    /// Every odd plan for the given point counts, in lexicographic order of
    /// `(N0, M0)`, that passes [`FactorPlan::validate`].
    pub fn enumerate_valid(x: &SampleGrid, xi: &SpectrumGrid) -> Vec<FactorPlan> {
        let (n, m) = (x.len(), xi.len());
        let divisors = |v: usize| (1..=v).filter(move |d| v.is_multiple_of(*d));
        let mut plans = Vec::new();
        for a in divisors(n) {
            for b in divisors(m) {
                if let Ok(plan) = FactorPlan::from_factors(a, n / a, b, m / b) {
                    if plan.validate(x, xi).is_ok() {
                        plans.push(plan);
                    }
                }
            }
        }
        plans
    }
}

/// Centered remainder of `k` modulo the odd number `big`, in `-(big/2)..=big/2`.
#[inline]
pub(crate) fn centered_rem(k: i64, big: i64) -> i64 {
    let half = big / 2;
    (k + half).rem_euclid(big) - half
}
