//! Closed-form multiply/add counts for every transform scheme.
//!
//! Complex schemes count one complex multiply/add as 1; cosine schemes
//! count one real multiply/add as 1. Complex arithmetic costs roughly four
//! real operations, see [`COMPLEX_TO_REAL_COST`]; that factor is never
//! folded into the counts.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::Serialize;

use super::grid::FactorPlan;
use crate::error::{Error, Result};

/// Approximate cost of one complex multiply/add in real operations.
pub const COMPLEX_TO_REAL_COST: u64 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OpCount(pub u64);

impl OpCount {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl Add for OpCount {
    type Output = OpCount;
    fn add(self, rhs: OpCount) -> OpCount {
        OpCount(self.0 + rhs.0)
    }
}

impl AddAssign<u64> for OpCount {
    fn add_assign(&mut self, rhs: u64) {
        self.0 += rhs;
    }
}

impl Sum for OpCount {
    fn sum<I: Iterator<Item = OpCount>>(iter: I) -> OpCount {
        iter.fold(OpCount(0), Add::add)
    }
}

impl fmt::Display for OpCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Direct1d,
    Twostep1d,
    Radix3,
    Direct2d,
    Twostep2d,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct1d" => Ok(Scheme::Direct1d),
            "twostep1d" => Ok(Scheme::Twostep1d),
            "radix3" => Ok(Scheme::Radix3),
            "direct2d" => Ok(Scheme::Direct2d),
            "twostep2d" => Ok(Scheme::Twostep2d),
            other => Err(Error::Argument(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Problem sizes. For 1D schemes these are the point counts `N` and `M`;
/// for 2D schemes they are the per-axis counts `n` (quarter-plane samples)
/// and `m` (transform points).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sizes {
    pub samples: usize,
    pub spectrum: usize,
}

impl Sizes {
    pub fn new(samples: usize, spectrum: usize) -> Self {
        Self { samples, spectrum }
    }
}

/// Returns `Some(p)` when `n == 3^p`.
pub fn log3_exact(n: usize) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut p = 0;
    let mut v = n;
    while v.is_multiple_of(3) {
        v /= 3;
        p += 1;
    }
    (v == 1).then_some(p)
}

pub fn predict_ops(scheme: Scheme, sizes: Sizes, plan: Option<&FactorPlan>) -> Result<OpCount> {
    let n = sizes.samples as u64;
    let m = sizes.spectrum as u64;
    if n == 0 || m == 0 {
        return Err(Error::Argument("sizes must be positive".into()));
    }
    match scheme {
        Scheme::Direct1d => Ok(OpCount(n * m)),
        Scheme::Twostep1d => {
            let plan =
                plan.ok_or_else(|| Error::Argument("twostep1d needs a factor plan".into()))?;
            if (plan.big_n0() * plan.big_n1()) as u64 != n
                || (plan.big_m0() * plan.big_m1()) as u64 != m
            {
                return Err(Error::Argument(format!(
                    "plan {plan:?} does not factor N={n}, M={m}"
                )));
            }
            Ok(OpCount(n * plan.big_m0() as u64 + m * plan.big_n0() as u64))
        }
        Scheme::Radix3 => {
            if n != m {
                return Err(Error::Argument("radix3 needs M = N".into()));
            }
            let p = log3_exact(sizes.samples).ok_or_else(|| {
                Error::Argument(format!("radix3 needs a power of three, got {n}"))
            })?;
            Ok(OpCount(n * (1 + 3 * p as u64)))
        }
        Scheme::Direct2d => Ok(OpCount(m * m * n * n)),
        Scheme::Twostep2d => Ok(OpCount(m * n * n + m * m * n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_counts() {
        let s9 = Sizes::new(9, 9);
        assert_eq!(
            predict_ops(Scheme::Direct1d, s9, None).unwrap(),
            OpCount(81)
        );
        let plan = FactorPlan::from_factors(3, 3, 3, 3).unwrap();
        assert_eq!(
            predict_ops(Scheme::Twostep1d, s9, Some(&plan)).unwrap(),
            OpCount(54)
        );
        assert_eq!(
            predict_ops(Scheme::Radix3, Sizes::new(81, 81), None).unwrap(),
            OpCount(1053)
        );
        assert_eq!(
            predict_ops(Scheme::Radix3, Sizes::new(27, 27), None).unwrap(),
            OpCount(270)
        );
        assert_eq!(
            predict_ops(Scheme::Radix3, Sizes::new(3, 3), None).unwrap(),
            OpCount(12)
        );
        assert_eq!(
            predict_ops(Scheme::Radix3, Sizes::new(1, 1), None).unwrap(),
            OpCount(1)
        );
        assert_eq!(
            predict_ops(Scheme::Direct2d, Sizes::new(4, 4), None).unwrap(),
            OpCount(256)
        );
        assert_eq!(
            predict_ops(Scheme::Twostep2d, Sizes::new(4, 4), None).unwrap(),
            OpCount(128)
        );
    }

    #[test]
    fn invalid_combinations() {
        assert!(predict_ops(Scheme::Twostep1d, Sizes::new(9, 9), None).is_err());
        assert!(predict_ops(Scheme::Radix3, Sizes::new(9, 27), None).is_err());
        assert!(predict_ops(Scheme::Radix3, Sizes::new(15, 15), None).is_err());
        assert!(predict_ops(Scheme::Direct1d, Sizes::new(0, 3), None).is_err());
        let plan = FactorPlan::from_factors(3, 3, 3, 3).unwrap();
        assert!(predict_ops(Scheme::Twostep1d, Sizes::new(9, 15), Some(&plan)).is_err());
    }

    #[test]
    fn speedup_ratio_2d() {
        // (m^2 n^2) / (m n^2 + m^2 n) = m n / (m + n)
        let d = predict_ops(Scheme::Direct2d, Sizes::new(150, 35), None)
            .unwrap()
            .get();
        let t = predict_ops(Scheme::Twostep2d, Sizes::new(150, 35), None)
            .unwrap()
            .get();
        assert_eq!(d * (150 + 35), t * 150 * 35);
        let ratio = d as f64 / t as f64;
        assert!((ratio - 28.378).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn log3() {
        assert_eq!(log3_exact(1), Some(0));
        assert_eq!(log3_exact(243), Some(5));
        assert_eq!(log3_exact(105), None);
        assert_eq!(log3_exact(0), None);
    }
}
