//! MPS reader and writer.
//!
//! The fixed layout puts fields at the customary columns but does not
//! truncate: numbers carry 12 significant digits and may run past their
//! field. The reader splits on whitespace, so it accepts both layouts.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sparse_model::{LinearModel, Sense, Term, VarId};

const FIXED_NAME_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpsFormat {
    #[default]
    Fixed,
    Free,
}

/// Formats `v` with 12 significant digits and no trailing zeros.
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..=11).contains(&exp) {
        let prec = (11 - exp) as usize;
        trim(&format!("{v:.prec$}"))
    } else {
        format!("{}e{exp}", trim(mant))
    }
}

struct Writer {
    format: MpsFormat,
    out: String,
}

impl Writer {
    fn header(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn line(&mut self, f1: &str, f2: &str, f3: &str, f4: &str) {
        let mut s = String::new();
        match self.format {
            MpsFormat::Fixed => {
                let _ = write!(s, " {f1:<2} {f2:<8}  {f3:<8}  {f4}");
            }
            MpsFormat::Free => {
                for f in [f1, f2, f3, f4] {
                    if !f.is_empty() {
                        s.push(' ');
                        s.push_str(f);
                    }
                }
            }
        }
        self.out.push_str(s.trim_end());
        self.out.push('\n');
    }
}

fn valid_token(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(char::is_whitespace)
}

/// Final names for one namespace; names that do not fit are replaced by
/// `prefix` and a zero-padded index.
fn mangle(names: &[&str], prefix: char, format: MpsFormat) -> Result<Vec<String>> {
    let fits = |n: &str| valid_token(n) && (format == MpsFormat::Free || n.len() <= FIXED_NAME_LEN);
    let width = FIXED_NAME_LEN - 1;
    let mut out = Vec::with_capacity(names.len());
    let mut seen = HashSet::with_capacity(names.len());
    for (i, &n) in names.iter().enumerate() {
        let name = if fits(n) {
            n.to_string()
        } else {
            if format == MpsFormat::Free || i >= 10usize.pow(width as u32) {
                return Err(Error::Export(format!("cannot write name {n:?}")));
            }
            format!("{prefix}{i:0width$}")
        };
        if !seen.insert(name.clone()) {
            return Err(Error::Export(format!("name collision on {name:?}")));
        }
        out.push(name);
    }
    Ok(out)
}

/// Writes `model` as MPS. Output is a pure function of the model.
pub fn export_mps(model: &LinearModel, format: MpsFormat) -> Result<String> {
    if model.has_defined() {
        return Err(Error::Export(
            "defined variables must be substituted first".into(),
        ));
    }
    let var_names: Vec<&str> = model.variables().iter().map(|v| v.name.as_str()).collect();
    let cols = mangle(&var_names, 'C', format)?;
    let mut row_names: Vec<&str> = model.rows().iter().map(|r| r.name.as_str()).collect();
    let taken: HashSet<&str> = row_names.iter().copied().collect();
    let obj_name = (0..)
        .map(|k| {
            if k == 0 {
                "obj".to_string()
            } else {
                format!("obj{k}")
            }
        })
        .find(|s| !taken.contains(s.as_str()))
        .expect("a free objective name exists");
    row_names.insert(0, &obj_name);
    let rows = mangle(&row_names, 'R', format)?;
    let (obj, rows) = rows.split_first().expect("objective row present");

    let mut w = Writer {
        format,
        out: String::new(),
    };
    let model_name: String = model
        .name
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    match format {
        MpsFormat::Fixed => w.header(format!("NAME          {model_name}").trim_end()),
        MpsFormat::Free => w.header(format!("NAME {model_name}").trim_end()),
    }
    w.header("OBJSENSE");
    w.header(match model.sense() {
        Sense::Maximize => "    MAX",
        Sense::Minimize => "    MIN",
    });

    w.header("ROWS");
    w.line("N", obj, "", "");
    for (row, name) in model.rows().iter().zip(rows) {
        let kind = match (row.lower.is_finite(), row.upper.is_finite()) {
            _ if row.lower == row.upper => "E",
            (false, true) => "L",
            (true, _) => "G",
            (false, false) => "N",
        };
        w.line(kind, name, "", "");
    }

    let n = model.num_variables();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in model.rows().iter().enumerate() {
        for t in &row.terms {
            by_col[t.var.index()].push((i, t.coef));
        }
    }
    let mut obj_coef = vec![0.0; n];
    for t in &model.objective().terms {
        obj_coef[t.var.index()] += t.coef;
    }
    w.header("COLUMNS");
    for j in 0..n {
        let col = &cols[j];
        if obj_coef[j] != 0.0 || by_col[j].is_empty() {
            w.line("", col, obj, &fmt_num(obj_coef[j]));
        }
        for &(i, a) in &by_col[j] {
            w.line("", col, &rows[i], &fmt_num(a));
        }
    }

    w.header("RHS");
    let constant = model.objective().constant;
    if constant != 0.0 {
        w.line("", "RHS", obj, &fmt_num(-constant));
    }
    for (row, name) in model.rows().iter().zip(rows) {
        let rhs = if row.lower.is_finite() {
            row.lower
        } else if row.upper.is_finite() {
            row.upper
        } else {
            0.0
        };
        if rhs != 0.0 {
            w.line("", "RHS", name, &fmt_num(rhs));
        }
    }

    w.header("RANGES");
    for (row, name) in model.rows().iter().zip(rows) {
        if row.lower.is_finite() && row.upper.is_finite() && row.lower != row.upper {
            w.line("", "RNG", name, &fmt_num(row.upper - row.lower));
        }
    }

    w.header("BOUNDS");
    for (v, col) in model.variables().iter().zip(&cols) {
        let (lo, hi) = (v.lower, v.upper);
        if lo == hi {
            w.line("FX", "BND", col, &fmt_num(lo));
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => w.line("FR", "BND", col, ""),
            (false, true) => {
                w.line("MI", "BND", col, "");
                w.line("UP", "BND", col, &fmt_num(hi));
            }
            (true, _) => {
                if lo != 0.0 {
                    w.line("LO", "BND", col, &fmt_num(lo));
                }
                if hi.is_finite() {
                    w.line("UP", "BND", col, &fmt_num(hi));
                }
            }
        }
    }
    w.header("ENDATA");
    Ok(w.out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    N,
    E,
    L,
    G,
}

struct RowState {
    name: String,
    kind: RowKind,
    rhs: f64,
    range: Option<f64>,
    terms: Vec<Term>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| perr(line, format!("bad number {tok:?}")))
}

/// Reads fixed or free MPS into a model; rows and columns keep file order.
pub fn parse_mps(text: &str) -> Result<LinearModel> {
    let mut section = Section::None;
    let mut name = String::new();
    let mut sense = Sense::Minimize;
    let mut objective: Option<String> = None;
    let mut obj_terms: Vec<(usize, f64)> = Vec::new();
    let mut obj_constant = 0.0;
    let mut rows: Vec<RowState> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut bounds: Vec<(f64, f64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            section = match toks[0] {
                "NAME" => {
                    name = toks.get(1..).map(|t| t.join(" ")).unwrap_or_default();
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        sense = parse_sense(s, line_no)?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(perr(line_no, format!("unknown section {other:?}"))),
            };
            continue;
        }
        match section {
            Section::ObjSense => sense = parse_sense(toks[0], line_no)?,
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(perr(line_no, "ROWS entry needs a type and a name"));
                }
                let kind = match toks[0] {
                    "N" => RowKind::N,
                    "E" => RowKind::E,
                    "L" => RowKind::L,
                    "G" => RowKind::G,
                    t => return Err(perr(line_no, format!("unknown row type {t:?}"))),
                };
                let rname = toks[1].to_string();
                if kind == RowKind::N && objective.is_none() {
                    objective = Some(rname);
                    continue;
                }
                if objective.as_deref() == Some(rname.as_str()) || row_index.contains_key(&rname) {
                    return Err(perr(line_no, format!("duplicate row {rname:?}")));
                }
                row_index.insert(rname.clone(), rows.len());
                rows.push(RowState {
                    name: rname,
                    kind,
                    rhs: 0.0,
                    range: None,
                    terms: Vec::new(),
                });
            }
            Section::Columns => {
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(perr(
                        line_no,
                        "COLUMNS entry needs one or two (row, value) pairs",
                    ));
                }
                if toks.contains(&"'MARKER'") {
                    return Err(perr(line_no, "integer markers are not supported"));
                }
                let col = toks[0];
                let j = match col_index.get(col) {
                    Some(&j) if j + 1 == col_names.len() => j,
                    Some(_) => {
                        return Err(perr(line_no, format!("column {col:?} is not contiguous")))
                    }
                    None => {
                        col_index.insert(col.to_string(), col_names.len());
                        col_names.push(col.to_string());
                        bounds.push((0.0, f64::INFINITY));
                        col_names.len() - 1
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = number(pair[1], line_no)?;
                    if objective.as_deref() == Some(pair[0]) {
                        obj_terms.push((j, v));
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        rows[i].terms.push(Term::new(VarId(j as u32), v));
                    } else {
                        return Err(perr(line_no, format!("unknown row {:?}", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = match toks.len() {
                    2 | 4 => &toks[..],
                    3 | 5 => &toks[1..],
                    _ => return Err(perr(line_no, "expected (row, value) pairs")),
                };
                for pair in pairs.chunks(2) {
                    let v = number(pair[1], line_no)?;
                    if objective.as_deref() == Some(pair[0]) {
                        if section == Section::Rhs {
                            obj_constant = -v;
                        }
                        continue;
                    }
                    let i = *row_index
                        .get(pair[0])
                        .ok_or_else(|| perr(line_no, format!("unknown row {:?}", pair[0])))?;
                    if section == Section::Rhs {
                        rows[i].rhs = v;
                    } else {
                        rows[i].range = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0];
                let needs_value = !matches!(kind, "FR" | "MI" | "PL" | "BV");
                let rest = &toks[1..];
                let (col, value) = match (needs_value, rest.len()) {
                    (true, 3) => (rest[1], Some(rest[2])),
                    (true, 2) => (rest[0], Some(rest[1])),
                    (false, 2) => (rest[1], None),
                    (false, 1) => (rest[0], None),
                    _ => return Err(perr(line_no, "malformed BOUNDS entry")),
                };
                let j = *col_index
                    .get(col)
                    .ok_or_else(|| perr(line_no, format!("unknown column {col:?}")))?;
                let v = value.map(|t| number(t, line_no)).transpose()?;
                let b = &mut bounds[j];
                match (kind, v) {
                    ("UP", Some(v)) => {
                        if v < 0.0 && b.0 == 0.0 {
                            b.0 = f64::NEG_INFINITY;
                        }
                        b.1 = v;
                    }
                    ("LO", Some(v)) => b.0 = v,
                    ("FX", Some(v)) => *b = (v, v),
                    ("FR", None) => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    ("MI", None) => b.0 = f64::NEG_INFINITY,
                    ("PL", None) => b.1 = f64::INFINITY,
                    _ => return Err(perr(line_no, format!("unsupported bound type {kind:?}"))),
                }
            }
            Section::None | Section::Name | Section::End => {
                return Err(perr(line_no, "data line outside a section"));
            }
        }
    }
    if section != Section::End {
        return Err(perr(text.lines().count(), "missing ENDATA"));
    }

    let mut model = LinearModel::new(name, sense);
    for (j, cname) in col_names.iter().enumerate() {
        let (lo, hi) = bounds[j];
        model
            .add_variable(cname, lo, hi)
            .map_err(|e| perr(0, format!("column {cname:?}: {e}")))?;
    }
    for row in rows {
        let (lo, hi) = match (row.kind, row.range) {
            (RowKind::N, _) => (f64::NEG_INFINITY, f64::INFINITY),
            (RowKind::E, None) => (row.rhs, row.rhs),
            (RowKind::E, Some(r)) if r >= 0.0 => (row.rhs, row.rhs + r),
            (RowKind::E, Some(r)) => (row.rhs + r, row.rhs),
            (RowKind::L, r) => (r.map_or(f64::NEG_INFINITY, |r| row.rhs - r.abs()), row.rhs),
            (RowKind::G, r) => (row.rhs, r.map_or(f64::INFINITY, |r| row.rhs + r.abs())),
        };
        model
            .add_row(&row.name, row.terms, lo, hi)
            .map_err(|e| perr(0, format!("row {:?}: {e}", row.name)))?;
    }
    let terms = obj_terms
        .into_iter()
        .filter(|t| t.1 != 0.0)
        .map(|(j, v)| Term::new(VarId(j as u32), v))
        .collect();
    model
        .set_objective(terms, obj_constant)
        .map_err(|e| perr(0, format!("objective: {e}")))?;
    Ok(model)
}

fn parse_sense(tok: &str, line: usize) -> Result<Sense> {
    match tok {
        "MAX" | "MAXIMIZE" => Ok(Sense::Maximize),
        "MIN" | "MINIMIZE" => Ok(Sense::Minimize),
        t => Err(perr(line, format!("unknown objective sense {t:?}"))),
    }
}
