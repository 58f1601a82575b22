//! Solution dumps: `key=value` text and a two-column CSV.

use super::{Solution, SolveStatus};
use crate::error::{Error, Result};

const VAR_PREFIX: &str = "var.";
const DUAL_PREFIX: &str = "dual.";

/// `key=value` lines; variables as `var.<name>`, row duals as `dual.<name>`.
pub fn write_solution(sol: &Solution) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    kv("status", sol.status.to_string());
    kv("primal_objective", sol.primal_objective.to_string());
    kv("dual_objective", sol.dual_objective.to_string());
    kv("primal_infeasibility", sol.primal_infeasibility.to_string());
    kv("dual_infeasibility", sol.dual_infeasibility.to_string());
    kv("iterations", sol.iterations.to_string());
    for (name, v) in sol.variable_names.iter().zip(&sol.values) {
        kv(&format!("{VAR_PREFIX}{name}"), v.to_string());
    }
    for (name, v) in sol.row_names.iter().zip(&sol.row_duals) {
        kv(&format!("{DUAL_PREFIX}{name}"), v.to_string());
    }
    out
}

fn parse_status(s: &str) -> Option<SolveStatus> {
    Some(match s {
        "optimal" => SolveStatus::Optimal,
        "iteration_limit" => SolveStatus::IterationLimit,
        "infeasible" => SolveStatus::Infeasible,
        "unbounded" => SolveStatus::Unbounded,
        "numerical_failure" => SolveStatus::NumericalFailure,
        _ => return None,
    })
}

/// Inverse of [`write_solution`]; the iteration trace is not stored.
pub fn read_solution(text: &str) -> Result<Solution> {
    let mut sol = Solution {
        status: SolveStatus::NumericalFailure,
        values: Vec::new(),
        variable_names: Vec::new(),
        row_names: Vec::new(),
        row_duals: Vec::new(),
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        primal_infeasibility: f64::NAN,
        dual_infeasibility: f64::NAN,
        iterations: 0,
        trace: Vec::new(),
        dense_normal: false,
    };
    let mut saw_status = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("bad number {value:?} for {key}")))
        };
        if let Some(name) = key.strip_prefix(VAR_PREFIX) {
            sol.variable_names.push(name.to_string());
            sol.values.push(num()?);
            continue;
        }
        if let Some(name) = key.strip_prefix(DUAL_PREFIX) {
            sol.row_names.push(name.to_string());
            sol.row_duals.push(num()?);
            continue;
        }
        match key {
            "status" => {
                sol.status =
                    parse_status(value).ok_or_else(|| err(format!("unknown status {value:?}")))?;
                saw_status = true;
            }
            "primal_objective" => sol.primal_objective = num()?,
            "dual_objective" => sol.dual_objective = num()?,
            "primal_infeasibility" => sol.primal_infeasibility = num()?,
            "dual_infeasibility" => sol.dual_infeasibility = num()?,
            "iterations" => {
                sol.iterations = value
                    .parse()
                    .map_err(|_| err(format!("bad iteration count {value:?}")))?
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    if !saw_status {
        return Err(Error::Parse {
            line: 0,
            message: "missing status".into(),
        });
    }
    Ok(sol)
}

/// `variable,value` rows with a header line.
pub fn write_solution_csv(sol: &Solution) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Export(e.to_string());
    w.write_record(["variable", "value"]).map_err(to_err)?;
    for (name, v) in sol.variable_names.iter().zip(&sol.values) {
        w.write_record([name.as_str(), &v.to_string()])
            .map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}
