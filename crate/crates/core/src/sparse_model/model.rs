use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Decision,
    /// Declared by an equation; must be substituted away before solving.
    Defined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    /// Starting-point hint; solvers may ignore it.
    pub start: Option<f64>,
}

impl Variable {
    pub fn is_free(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub var: VarId,
    pub coef: f64,
}

impl Term {
    pub fn new(var: VarId, coef: f64) -> Self {
        Self { var, coef }
    }
}

/// Ranged constraint `lower <= sum(coef * var) <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<Term>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub terms: Vec<Term>,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelWarning {
    /// The model has no variables or no constraint rows of the kind the
    /// generator expected.
    Degenerate(String),
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelWarning::Degenerate(msg) => write!(f, "degenerate model: {msg}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    pub n_constraints: usize,
    pub n_variables: usize,
    pub n_nonzeros: usize,
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.n_constraints, self.n_variables, self.n_nonzeros
        )
    }
}

/// A variable given by `name = sum(coef * var)` over decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DefinedVariable {
    pub name: String,
    pub terms: Vec<Term>,
}

/// Bounded-variable linear program with ranged rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub name: String,
    variables: Vec<Variable>,
    rows: Vec<Row>,
    objective: Objective,
    index: HashMap<String, VarId>,
    warnings: Vec<ModelWarning>,
}

fn check_range(what: &str, lower: f64, upper: f64) -> Result<()> {
    if lower.is_nan()
        || upper.is_nan()
        || lower > upper
        || lower == f64::INFINITY
        || upper == f64::NEG_INFINITY
    {
        return Err(Error::InvalidModel(format!(
            "{what}: invalid range [{lower}, {upper}]"
        )));
    }
    Ok(())
}

impl LinearModel {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            rows: Vec::new(),
            objective: Objective {
                sense,
                terms: Vec::new(),
                constant: 0.0,
            },
            index: HashMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId> {
        self.push_variable(name.into(), lower, upper, VarKind::Decision)
    }

    pub fn add_defined(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.push_variable(
            name.into(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            VarKind::Defined,
        )
    }

    fn push_variable(
        &mut self,
        name: String,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> Result<VarId> {
        check_range(&name, lower, upper)?;
        let id = VarId(
            u32::try_from(self.variables.len())
                .map_err(|_| Error::InvalidModel("too many variables".into()))?,
        );
        if self.index.insert(name.clone(), id).is_some() {
            return Err(Error::InvalidModel(format!("duplicate variable `{name}`")));
        }
        self.variables.push(Variable {
            name,
            lower,
            upper,
            kind,
            start: None,
        });
        Ok(id)
    }

    pub fn set_start(&mut self, var: VarId, value: f64) {
        self.variables[var.index()].start = Some(value);
    }

    /// Appends a row. Exact-zero coefficients are dropped; repeated or
    /// unknown variables are rejected.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<Term>,
        lower: f64,
        upper: f64,
    ) -> Result<usize> {
        let name = name.into();
        check_range(&name, lower, upper)?;
        let terms = self.checked_terms(&name, terms)?;
        self.rows.push(Row {
            name,
            terms,
            lower,
            upper,
        });
        Ok(self.rows.len() - 1)
    }

    pub fn set_objective(&mut self, terms: Vec<Term>, constant: f64) -> Result<()> {
        let terms = self.checked_terms("objective", terms)?;
        self.objective.terms = terms;
        self.objective.constant = constant;
        Ok(())
    }

    fn checked_terms(&self, what: &str, terms: Vec<Term>) -> Result<Vec<Term>> {
        for t in &terms {
            if t.var.index() >= self.variables.len() {
                return Err(Error::InvalidModel(format!(
                    "{what}: unknown variable id {}",
                    t.var.0
                )));
            }
            if !t.coef.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "{what}: non-finite coefficient"
                )));
            }
        }
        let mut ids: Vec<VarId> = terms.iter().map(|t| t.var).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(format!(
                "{what}: variable `{}` appears twice",
                self.variables[w[0].index()].name
            )));
        }
        Ok(terms.into_iter().filter(|t| t.coef != 0.0).collect())
    }

    pub fn push_warning(&mut self, w: ModelWarning) {
        self.warnings.push(w);
    }

    pub fn warnings(&self) -> &[ModelWarning] {
        &self.warnings
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.objective.sense
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn has_defined(&self) -> bool {
        self.variables.iter().any(|v| v.kind == VarKind::Defined)
    }

    /// Evaluates the objective at `x` (one value per variable).
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.constant
            + self
                .objective
                .terms
                .iter()
                .map(|t| t.coef * x[t.var.index()])
                .sum::<f64>()
    }

    pub fn row_activity(&self, row: &Row, x: &[f64]) -> f64 {
        row.terms.iter().map(|t| t.coef * x[t.var.index()]).sum()
    }
}

/// Counts rows, decision variables and stored row coefficients.
pub fn model_stats(model: &LinearModel) -> ModelStats {
    ModelStats {
        n_constraints: model.rows.len(),
        n_variables: model
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Decision)
            .count(),
        n_nonzeros: model.rows.iter().map(|r| r.terms.len()).sum(),
    }
}

/// Replaces every reference to a defined variable with its expression and
/// drops the defined variables. Coefficients on a shared decision variable
/// are merged by addition, in term order; merged values of exactly `0.0`
/// are dropped.
pub fn substitute_defined(model: &LinearModel, defs: &[DefinedVariable]) -> Result<LinearModel> {
    let nvars = model.variables.len();
    let mut expansion: Vec<Option<&[Term]>> = vec![None; nvars];
    for d in defs {
        let id = model
            .lookup(&d.name)
            .ok_or_else(|| Error::UnresolvedSymbol(d.name.clone()))?;
        for t in &d.terms {
            let v = model
                .variables
                .get(t.var.index())
                .ok_or_else(|| Error::UnresolvedSymbol(format!("variable id {}", t.var.0)))?;
            if v.kind != VarKind::Decision {
                return Err(Error::InvalidModel(format!(
                    "definition of `{}` refers to non-decision variable `{}`",
                    d.name, v.name
                )));
            }
        }
        expansion[id.index()] = Some(&d.terms);
    }

    let mut remap = vec![u32::MAX; nvars];
    let mut out = LinearModel::new(model.name.clone(), model.objective.sense);
    for (i, v) in model.variables.iter().enumerate() {
        match (v.kind, expansion[i]) {
            (VarKind::Decision, None) => {
                let id = out.push_variable(v.name.clone(), v.lower, v.upper, VarKind::Decision)?;
                out.variables[id.index()].start = v.start;
                remap[i] = id.0;
            }
            (VarKind::Decision, Some(_)) => {
                return Err(Error::InvalidModel(format!(
                    "`{}` is a decision variable and has a definition",
                    v.name
                )));
            }
            (VarKind::Defined, _) => {}
        }
    }

    let mut scratch = vec![0.0f64; out.variables.len()];
    let mut touched: Vec<u32> = Vec::new();
    let mut in_touched = vec![false; out.variables.len()];
    let mut expand = |terms: &[Term]| -> Result<Vec<Term>> {
        let mut add = |old: VarId, coef: f64| {
            let new = remap[old.index()];
            if !in_touched[new as usize] {
                in_touched[new as usize] = true;
                touched.push(new);
            }
            scratch[new as usize] += coef;
        };
        for t in terms {
            match (
                model.variables[t.var.index()].kind,
                expansion[t.var.index()],
            ) {
                (VarKind::Decision, _) => add(t.var, t.coef),
                (VarKind::Defined, Some(expr)) => {
                    for e in expr {
                        add(e.var, t.coef * e.coef);
                    }
                }
                (VarKind::Defined, None) => {
                    return Err(Error::UnresolvedSymbol(
                        model.variables[t.var.index()].name.clone(),
                    ));
                }
            }
        }
        touched.sort_unstable();
        let mut merged = Vec::with_capacity(touched.len());
        for &id in &touched {
            let c = std::mem::take(&mut scratch[id as usize]);
            in_touched[id as usize] = false;
            if c != 0.0 {
                merged.push(Term::new(VarId(id), c));
            }
        }
        touched.clear();
        Ok(merged)
    };

    let mut rows = Vec::with_capacity(model.rows.len());
    for r in &model.rows {
        rows.push(Row {
            name: r.name.clone(),
            terms: expand(&r.terms)?,
            lower: r.lower,
            upper: r.upper,
        });
    }
    let obj_terms = expand(&model.objective.terms)?;
    out.rows = rows;
    out.objective.terms = obj_terms;
    out.objective.constant = model.objective.constant;
    out.warnings = model.warnings.clone();
    Ok(out)
}
