#![allow(clippy::needless_range_loop)]
use crate::error::{Error, Result};
use crate::sparse_model::{LinearModel, Sense, VarKind};

const RUIZ_PASSES: usize = 12;

/// Compressed-row matrix.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.vals[r])
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *o = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn mul_t(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * yi;
            }
        }
    }

    /// Column-wise copy: `(col_ptr, row_idx, vals)` with ascending rows.
    pub fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let mut count = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            count[c + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let col_ptr = count.clone();
        let mut next = count;
        let mut row_idx = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vs) = self.row(i);
            for (&c, &v) in cols.iter().zip(vs) {
                row_idx[next[c]] = i;
                vals[next[c]] = v;
                next[c] += 1;
            }
        }
        (col_ptr, row_idx, vals)
    }
}

/// Scaled problem `min c'z  s.t.  A z = b,  l <= z <= u`.
///
/// The first `n_struct` columns are model variables that are not fixed; the
/// rest are row slacks with coefficient -1.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub a: Csr,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub start: Vec<Option<f64>>,
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub obj_scale: f64,
    pub obj_offset: f64,
    pub flip: f64,
    /// For each model variable: a column, or the fixed value.
    pub var_map: Vec<VarSlot>,
    /// For each model row: the standard-form row it became, if any.
    pub row_map: Vec<Option<usize>>,
    /// Largest unscaled right-hand side magnitude, for relative tests.
    pub rhs_norm: f64,
    pub cost_norm: f64,
    pub empty_row_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum VarSlot {
    Column(usize),
    Fixed(f64),
}

impl StandardForm {
    pub fn ncols(&self) -> usize {
        self.c.len()
    }

    pub fn nrows(&self) -> usize {
        self.b.len()
    }

    pub fn from_model(model: &LinearModel) -> Result<Self> {
        if model.has_defined() {
            return Err(Error::InvalidModel(
                "defined variables must be substituted before solving".into(),
            ));
        }
        let flip = match model.sense() {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let mut var_map = Vec::with_capacity(model.num_variables());
        let mut c = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut start = Vec::new();
        for v in model.variables() {
            debug_assert_eq!(v.kind, VarKind::Decision);
            if v.lower == v.upper {
                var_map.push(VarSlot::Fixed(v.lower));
            } else {
                var_map.push(VarSlot::Column(c.len()));
                c.push(0.0);
                lower.push(v.lower);
                upper.push(v.upper);
                start.push(v.start);
            }
        }
        let obj = model.objective();
        let mut obj_offset = obj.constant * flip;
        for t in &obj.terms {
            match var_map[t.var.index()] {
                VarSlot::Column(j) => c[j] += flip * t.coef,
                VarSlot::Fixed(x) => obj_offset += flip * t.coef * x,
            }
        }

        let n_struct = c.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut b = Vec::new();
        let mut row_map = Vec::with_capacity(model.num_rows());
        let mut slack_bounds = Vec::new();
        let mut empty_row_violation: f64 = 0.0;
        let mut rhs_norm: f64 = 0.0;
        for row in model.rows() {
            let mut shift = 0.0;
            let start_len = col_idx.len();
            for t in &row.terms {
                match var_map[t.var.index()] {
                    VarSlot::Column(j) => {
                        col_idx.push(j);
                        vals.push(t.coef);
                    }
                    VarSlot::Fixed(x) => shift += t.coef * x,
                }
            }
            let (lo, hi) = (row.lower - shift, row.upper - shift);
            for v in [lo, hi] {
                if v.is_finite() {
                    rhs_norm = rhs_norm.max(v.abs());
                }
            }
            if col_idx.len() == start_len {
                let viol = (lo.max(0.0) - 0.0).max(0.0 - hi.min(0.0)).max(0.0);
                empty_row_violation = empty_row_violation.max(viol);
                row_map.push(None);
                continue;
            }
            let i = b.len();
            row_map.push(Some(i));
            if lo == hi {
                b.push(lo);
            } else {
                b.push(0.0);
                slack_bounds.push((i, lo, hi));
            }
            let len = col_idx.len() - start_len;
            let mut pairs: Vec<(usize, f64)> = col_idx[start_len..]
                .iter()
                .copied()
                .zip(vals[start_len..].iter().copied())
                .collect();
            pairs.sort_unstable_by_key(|p| p.0);
            for (k, (cidx, v)) in pairs.into_iter().enumerate() {
                col_idx[start_len + k] = cidx;
                vals[start_len + k] = v;
            }
            debug_assert_eq!(len, col_idx.len() - start_len);
            row_ptr.push(col_idx.len());
        }
        let nrows = b.len();
        let ncols = n_struct + slack_bounds.len();

        // Slack columns are appended last in each row, keeping rows sorted.
        if !slack_bounds.is_empty() {
            let mut new_ptr = vec![0];
            let mut new_idx = Vec::with_capacity(col_idx.len() + slack_bounds.len());
            let mut new_vals = Vec::with_capacity(new_idx.capacity());
            let mut s = 0;
            for i in 0..nrows {
                let r = row_ptr[i]..row_ptr[i + 1];
                new_idx.extend_from_slice(&col_idx[r.clone()]);
                new_vals.extend_from_slice(&vals[r]);
                if s < slack_bounds.len() && slack_bounds[s].0 == i {
                    new_idx.push(n_struct + s);
                    new_vals.push(-1.0);
                    s += 1;
                }
                new_ptr.push(new_idx.len());
            }
            row_ptr = new_ptr;
            col_idx = new_idx;
            vals = new_vals;
        }
        for &(_, lo, hi) in &slack_bounds {
            c.push(0.0);
            lower.push(lo);
            upper.push(hi);
            start.push(None);
        }
        let cost_norm = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let mut sf = StandardForm {
            a: Csr {
                nrows,
                ncols,
                row_ptr,
                col_idx,
                vals,
            },
            b,
            c,
            lower,
            upper,
            start,
            row_scale: vec![1.0; nrows],
            col_scale: vec![1.0; ncols],
            obj_scale: 1.0,
            obj_offset,
            flip,
            var_map,
            row_map,
            rhs_norm,
            cost_norm,
            empty_row_violation,
        };
        sf.equilibrate();
        Ok(sf)
    }

    /// Ruiz equilibration of `A`, followed by cost normalization.
    fn equilibrate(&mut self) {
        let (m, n) = (self.nrows(), self.ncols());
        let mut rmax = vec![0.0f64; m];
        let mut cmax = vec![0.0f64; n];
        for _ in 0..RUIZ_PASSES {
            rmax.iter_mut().for_each(|v| *v = 0.0);
            cmax.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..m {
                let (cols, vals) = self.a.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    rmax[i] = rmax[i].max(v.abs());
                    cmax[j] = cmax[j].max(v.abs());
                }
            }
            let spread = |v: &[f64]| {
                let (lo, hi) = v
                    .iter()
                    .filter(|x| **x > 0.0)
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
                        (lo.min(x), hi.max(x))
                    });
                if hi > 0.0 {
                    hi / lo
                } else {
                    1.0
                }
            };
            if spread(&rmax) < 1.5 && spread(&cmax) < 1.5 {
                break;
            }
            let rf: Vec<f64> = rmax
                .iter()
                .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
                .collect();
            let cf: Vec<f64> = cmax
                .iter()
                .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
                .collect();
            for i in 0..m {
                let r = self.a.row_ptr[i]..self.a.row_ptr[i + 1];
                for k in r {
                    let j = self.a.col_idx[k];
                    self.a.vals[k] *= rf[i] * cf[j];
                }
                self.row_scale[i] *= rf[i];
            }
            for j in 0..n {
                self.col_scale[j] *= cf[j];
            }
        }
        for i in 0..m {
            self.b[i] *= self.row_scale[i];
        }
        for j in 0..n {
            let s = self.col_scale[j];
            self.c[j] *= s;
            self.lower[j] /= s;
            self.upper[j] /= s;
            if let Some(x) = self.start[j].as_mut() {
                *x /= s;
            }
        }
        let cmax = self.c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if cmax > 0.0 {
            self.obj_scale = cmax;
            self.c.iter_mut().for_each(|v| *v /= cmax);
        }
    }

    /// Model-space value of scaled column `j`.
    pub fn unscale_col(&self, j: usize, z: f64) -> f64 {
        z * self.col_scale[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse_model::Term;

    #[test]
    fn slacks_and_fixed_variables() {
        let mut m = LinearModel::new("t", Sense::Maximize);
        let x = m.add_variable("x", 0.0, 4.0).unwrap();
        let y = m.add_variable("y", 2.0, 2.0).unwrap();
        m.add_row(
            "r",
            vec![Term::new(x, 1.0), Term::new(y, 1.0)],
            f64::NEG_INFINITY,
            5.0,
        )
        .unwrap();
        m.add_row("e", vec![Term::new(x, 2.0)], 3.0, 3.0).unwrap();
        m.set_objective(vec![Term::new(x, 1.0), Term::new(y, 3.0)], 1.0)
            .unwrap();
        let sf = StandardForm::from_model(&m).unwrap();
        assert_eq!((sf.nrows(), sf.ncols()), (2, 2));
        assert_eq!(sf.var_map[1], VarSlot::Fixed(2.0));
        let slack_ub = sf.upper[1] * sf.col_scale[1];
        assert!((slack_ub - 3.0).abs() < 1e-12);
        assert!((sf.flip * sf.obj_offset - 7.0).abs() < 1e-12);
    }

    #[test]
    fn csc_roundtrip() {
        let a = Csr {
            nrows: 2,
            ncols: 3,
            row_ptr: vec![0, 2, 3],
            col_idx: vec![0, 2, 1],
            vals: vec![1.0, 2.0, 3.0],
        };
        let (p, r, v) = a.to_csc();
        assert_eq!(p, vec![0, 1, 2, 3]);
        assert_eq!(r, vec![0, 1, 0]);
        assert_eq!(v, vec![1.0, 3.0, 2.0]);
        let mut out = vec![0.0; 3];
        a.mul_t(&[1.0, 1.0], &mut out);
        assert_eq!(out, vec![1.0, 3.0, 2.0]);
    }
}
