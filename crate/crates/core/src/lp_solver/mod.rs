//! Primal-dual interior-point solver for bounded-variable linear programs,
//! MPS interchange, and checks of apodizer solutions against the transform.
//!
//! Rows `lo <= a'x <= hi` gain a bounded slack unless `lo == hi`. The
//! constraint matrix is equilibrated before iterating, and all reported
//! residuals are in the model's own units.

mod ipm;
mod kkt;
mod mps;
mod solution_io;
mod standard;
mod verify;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse_model::LinearModel;
use standard::{StandardForm, VarSlot};

pub use mps::{export_mps, parse_mps, MpsFormat};
pub use solution_io::{read_solution, write_solution, write_solution_csv};
pub use verify::{verify_mask_solution, FeasibilityReport};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub rel_gap_tol: f64,
    pub feas_tol: f64,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
    /// Added to every diagonal entry of the Newton system.
    pub diag_regularization: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            rel_gap_tol: 1e-8,
            feas_tol: 1e-8,
            step_fraction: 0.95,
            diag_regularization: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rel_gap_tol) || !positive(self.feas_tol) {
            return Err(Error::Argument("tolerances must be positive".into()));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(Error::Argument(format!(
                "step fraction {} is not in (0, 1)",
                self.step_fraction
            )));
        }
        if !(self.diag_regularization >= 0.0 && self.diag_regularization.is_finite()) {
            return Err(Error::Argument(
                "diagonal regularization must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical_failure",
        };
        f.write_str(s)
    }
}

/// State at the start of one iteration and the step lengths taken from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// One value per model variable, indexed like the model.
    pub values: Vec<f64>,
    pub variable_names: Vec<String>,
    pub row_names: Vec<String>,
    /// One multiplier per model row, for the model's objective sense.
    pub row_duals: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub dense_normal: bool,
}

impl Solution {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.variable_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs() / (1.0 + self.primal_objective.abs())
    }
}

/// Solves a model with no defined variables.
pub fn solve(model: &LinearModel, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let sf = StandardForm::from_model(model)?;
    let mut out = ipm::run(&sf, config)?;
    if sf.empty_row_violation > config.feas_tol {
        out.status = SolveStatus::Infeasible;
    }
    let values = sf
        .var_map
        .iter()
        .map(|slot| match *slot {
            VarSlot::Column(j) => sf.unscale_col(j, out.z[j]),
            VarSlot::Fixed(x) => x,
        })
        .collect();
    let row_duals = sf
        .row_map
        .iter()
        .map(|r| match *r {
            Some(i) => sf.flip * out.y[i] * sf.row_scale[i] * sf.obj_scale,
            None => 0.0,
        })
        .collect();
    Ok(Solution {
        status: out.status,
        values,
        variable_names: model.variables().iter().map(|v| v.name.clone()).collect(),
        row_names: model.rows().iter().map(|r| r.name.clone()).collect(),
        row_duals,
        primal_objective: out.primal_objective,
        dual_objective: out.dual_objective,
        primal_infeasibility: out.primal_infeasibility,
        dual_infeasibility: out.dual_infeasibility,
        iterations: out.iterations,
        trace: out.trace,
        dense_normal: out.dense_normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse_model::{Sense, Term};

    fn tiny(sense: Sense) -> LinearModel {
        let mut m = LinearModel::new("tiny", sense);
        let x = m.add_variable("x", 0.0, 1.0).unwrap();
        let y = m.add_variable("y", 0.0, 1.0).unwrap();
        m.add_row(
            "cap",
            vec![Term::new(x, 1.0), Term::new(y, 2.0)],
            f64::NEG_INFINITY,
            2.0,
        )
        .unwrap();
        m.set_objective(vec![Term::new(x, 3.0), Term::new(y, 2.0)], 0.0)
            .unwrap();
        m
    }

    #[test]
    fn tiny_max() {
        let sol = solve(&tiny(Sense::Maximize), &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(
            (sol.primal_objective - 4.0).abs() < 1e-7,
            "{}",
            sol.primal_objective
        );
        assert!((sol.value("x").unwrap() - 1.0).abs() < 1e-6);
        assert!((sol.value("y").unwrap() - 0.5).abs() < 1e-6);
        assert!((sol.row_duals[0] - 1.0).abs() < 1e-6, "{:?}", sol.row_duals);
    }

    #[test]
    fn tiny_min() {
        let sol = solve(&tiny(Sense::Minimize), &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.primal_objective.abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SolverConfig {
            step_fraction: 1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve(&tiny(Sense::Maximize), &cfg),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn infeasible_rows() {
        let mut m = LinearModel::new("inf", Sense::Minimize);
        let x = m.add_variable("x", 0.0, 10.0).unwrap();
        m.add_row("lo", vec![Term::new(x, 1.0)], 2.0, f64::INFINITY)
            .unwrap();
        m.add_row("hi", vec![Term::new(x, 1.0)], f64::NEG_INFINITY, 1.0)
            .unwrap();
        m.set_objective(vec![Term::new(x, 1.0)], 0.0).unwrap();
        let sol = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_objective() {
        let mut m = LinearModel::new("unb", Sense::Maximize);
        let x = m.add_variable("x", 0.0, f64::INFINITY).unwrap();
        let y = m.add_variable("y", 0.0, f64::INFINITY).unwrap();
        m.add_row(
            "r",
            vec![Term::new(x, 1.0), Term::new(y, -1.0)],
            f64::NEG_INFINITY,
            1.0,
        )
        .unwrap();
        m.set_objective(vec![Term::new(x, 1.0)], 0.0).unwrap();
        let sol = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn empty_row_violation_is_infeasible() {
        let mut m = LinearModel::new("e", Sense::Minimize);
        let x = m.add_variable("x", 0.0, 1.0).unwrap();
        m.add_row("bad", vec![], 1.0, 2.0).unwrap();
        m.set_objective(vec![Term::new(x, 1.0)], 0.0).unwrap();
        let sol = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }
}
