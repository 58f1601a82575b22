//! Newton systems `[-D A'; A 0] [x; y] = [rt; rp]`.
//!
//! Dense constraint matrices go through the normal equations
//! `A D^-1 A' y = rp + A D^-1 rt`; sparse ones through a regularized
//! quasi-definite `LDL'` of the augmented matrix.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::linalg::cholesky::llt;
use faer::linalg::cholesky::llt::factor::LltRegularization;
use faer::linalg::matmul::triangular::{matmul, BlockStructure};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, LdltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Accum, Conj, Mat, MatMut, Par, Side};

use super::standard::Csr;
use crate::error::{Error, Result};

/// Above this fill of the lower triangle of `A A'` the dense path is used.
const DENSE_THRESHOLD: f64 = 0.3;
const PIVOT_EPS: f64 = 1e-30;
const PIVOT_DELTA: f64 = 1e128;
/// Static regularization of the augmented matrix: the starting level, the
/// ceiling reached by [`KktSolver::escalate`], and the growth per step.
const BASE_REG: f64 = 1e-12;
const MAX_REG: f64 = 1e-8;
const REG_GROWTH: f64 = 100.0;

#[allow(clippy::large_enum_variant)]
pub(crate) enum KktSolver {
    Normal(DenseNormal),
    Augmented(Augmented),
}

/// Lower-triangle nonzeros of `A A'`, or `None` once it exceeds `cap`.
fn normal_fill(a: &Csr, col_ptr: &[usize], row_idx: &[usize], cap: usize) -> Option<usize> {
    let mut mark = vec![usize::MAX; a.nrows];
    let mut total = 0usize;
    for i in 0..a.nrows {
        let (cols, _) = a.row(i);
        for &j in cols {
            for &r in &row_idx[col_ptr[j]..col_ptr[j + 1]] {
                if r >= i && mark[r] != i {
                    mark[r] = i;
                    total += 1;
                }
            }
        }
        if total > cap {
            return None;
        }
    }
    Some(total)
}

impl KktSolver {
    pub fn new(a: &Csr) -> Result<Self> {
        let m = a.nrows;
        if m == 0 {
            return Ok(KktSolver::Normal(DenseNormal::new(a)));
        }
        let (col_ptr, row_idx, vals) = a.to_csc();
        let full = m * (m + 1) / 2;
        let cap = (DENSE_THRESHOLD * full as f64) as usize;
        match normal_fill(a, &col_ptr, &row_idx, cap) {
            None => Ok(KktSolver::Normal(DenseNormal::new(a))),
            Some(_) => Ok(KktSolver::Augmented(Augmented::new(
                m, a.ncols, col_ptr, row_idx, vals,
            )?)),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, KktSolver::Normal(_))
    }

    /// Factors the system for diagonal `d > 0`.
    pub fn factor(&mut self, a: &Csr, d: &[f64]) -> Result<()> {
        match self {
            KktSolver::Normal(s) => s.factor(a, d),
            KktSolver::Augmented(s) => s.factor(d),
        }
    }

    /// Raises the static regularization for the next factorization.
    /// Returns `false` when there is nothing left to raise.
    pub fn escalate(&mut self) -> bool {
        match self {
            KktSolver::Normal(_) => false,
            KktSolver::Augmented(s) if s.reg < MAX_REG => {
                s.reg = (s.reg * REG_GROWTH).min(MAX_REG);
                true
            }
            KktSolver::Augmented(_) => false,
        }
    }

    /// One solve with the current factorization.
    pub fn solve(&mut self, a: &Csr, rt: &[f64], rp: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self {
            KktSolver::Normal(s) => s.solve(a, rt, rp),
            KktSolver::Augmented(s) => s.solve(rt, rp),
        }
    }
}

fn llt_regularization(max_diag: f64) -> LltRegularization<f64> {
    LltRegularization {
        dynamic_regularization_delta: PIVOT_DELTA,
        dynamic_regularization_epsilon: PIVOT_EPS * max_diag.max(1.0),
    }
}

pub(crate) struct DenseNormal {
    scaled: Mat<f64>,
    factor: Mat<f64>,
    dinv: Vec<f64>,
    stack: MemBuffer,
}

impl DenseNormal {
    fn new(a: &Csr) -> Self {
        let (m, n) = (a.nrows, a.ncols);
        let req = llt::factor::cholesky_in_place_scratch::<f64>(m, Par::Seq, Default::default())
            .or(llt::solve::solve_in_place_scratch::<f64>(m, 1, Par::Seq));
        DenseNormal {
            scaled: Mat::zeros(m, n),
            factor: Mat::zeros(m, m),
            dinv: vec![1.0; n],
            stack: MemBuffer::new(req),
        }
    }

    fn factor(&mut self, a: &Csr, d: &[f64]) -> Result<()> {
        let m = a.nrows;
        for (v, dj) in self.dinv.iter_mut().zip(d) {
            *v = 1.0 / dj;
        }
        self.scaled.as_mut().fill(0.0);
        for i in 0..m {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                self.scaled[(i, j)] = v * self.dinv[j].sqrt();
            }
        }
        matmul(
            self.factor.as_mut(),
            BlockStructure::TriangularLower,
            Accum::Replace,
            self.scaled.as_ref(),
            BlockStructure::Rectangular,
            self.scaled.transpose(),
            BlockStructure::Rectangular,
            1.0,
            Par::Seq,
        );
        let max_diag = (0..m).fold(0.0f64, |acc, i| acc.max(self.factor[(i, i)]));
        llt::factor::cholesky_in_place(
            self.factor.as_mut(),
            llt_regularization(max_diag),
            Par::Seq,
            MemStack::new(&mut self.stack),
            Default::default(),
        )
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(())
    }

    fn solve(&mut self, a: &Csr, rt: &[f64], rp: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = rp.len();
        let scaled: Vec<f64> = rt.iter().zip(&self.dinv).map(|(r, d)| r * d).collect();
        let mut y = vec![0.0; m];
        a.mul(&scaled, &mut y);
        for (v, p) in y.iter_mut().zip(rp) {
            *v += p;
        }
        llt::solve::solve_in_place_with_conj(
            self.factor.as_ref(),
            Conj::No,
            MatMut::from_column_major_slice_mut(&mut y, m, 1),
            Par::Seq,
            MemStack::new(&mut self.stack),
        );
        let mut x = vec![0.0; rt.len()];
        a.mul_t(&y, &mut x);
        for j in 0..x.len() {
            x[j] = self.dinv[j] * (x[j] - rt[j]);
        }
        (x, y)
    }
}

pub(crate) struct Augmented {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    a_vals: Vec<f64>,
    scale: Vec<f64>,
    reg: f64,
    /// Level used by the last factorization; decays towards `BASE_REG`.
    last_reg: f64,
    signs: Vec<i8>,
    symbolic: SymbolicCholesky<usize>,
    l_values: Vec<f64>,
    stack: MemBuffer,
}

impl Augmented {
    /// Lower pattern: column `j < n` holds the diagonal then column `j` of
    /// `A` shifted by `n`; column `n + i` holds its diagonal only.
    fn new(
        m: usize,
        n: usize,
        a_ptr: Vec<usize>,
        a_rows: Vec<usize>,
        a_vals: Vec<f64>,
    ) -> Result<Self> {
        let dim = n + m;
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::with_capacity(dim + a_rows.len());
        let mut values = Vec::with_capacity(dim + a_rows.len());
        col_ptr.push(0);
        for j in 0..n {
            row_idx.push(j);
            values.push(0.0);
            for p in a_ptr[j]..a_ptr[j + 1] {
                row_idx.push(n + a_rows[p]);
                values.push(a_vals[p]);
            }
            col_ptr.push(row_idx.len());
        }
        for i in 0..m {
            row_idx.push(n + i);
            values.push(BASE_REG);
            col_ptr.push(row_idx.len());
        }
        let pattern = SymbolicSparseColMatRef::new_checked(dim, dim, &col_ptr, None, &row_idx);
        let symbolic = factorize_symbolic_cholesky(
            pattern,
            Side::Lower,
            SymmetricOrdering::Amd,
            Default::default(),
        )
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let req = symbolic
            .factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default())
            .or(symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        let mut signs = vec![-1i8; n];
        signs.resize(dim, 1);
        Ok(Augmented {
            n,
            a_vals: values.clone(),
            scale: vec![1.0; n],
            reg: BASE_REG,
            last_reg: BASE_REG,
            l_values: vec![0.0; symbolic.len_val()],
            col_ptr,
            row_idx,
            values,
            signs,
            symbolic,
            stack: MemBuffer::new(req),
        })
    }

    /// Columns with `d > 1` are scaled by `1/sqrt(d)`, so the factored
    /// diagonal never exceeds one in magnitude.
    fn factor(&mut self, d: &[f64]) -> Result<()> {
        if self.reg <= self.last_reg {
            self.reg = (self.last_reg / 10.0).max(BASE_REG);
        }
        self.last_reg = self.reg;
        let reg = self.reg;
        let mut max_diag: f64 = reg;
        for (j, &dj) in d.iter().enumerate() {
            let s = if dj > 1.0 { dj.sqrt().recip() } else { 1.0 };
            self.scale[j] = s;
            let (lo, hi) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let v = dj * s * s + reg;
            self.values[lo] = -v;
            for p in lo + 1..hi {
                self.values[p] = self.a_vals[p] * s;
            }
            max_diag = max_diag.max(v);
        }
        for j in self.n..self.signs.len() {
            self.values[self.col_ptr[j]] = reg;
        }
        let dim = self.signs.len();
        let pattern =
            SymbolicSparseColMatRef::new_checked(dim, dim, &self.col_ptr, None, &self.row_idx);
        let a = SparseColMatRef::new(pattern, &self.values);
        self.symbolic
            .factorize_numeric_ldlt(
                &mut self.l_values,
                a,
                Side::Lower,
                LdltRegularization {
                    dynamic_regularization_signs: Some(&self.signs),
                    dynamic_regularization_delta: PIVOT_DELTA,
                    dynamic_regularization_epsilon: PIVOT_EPS * max_diag.max(1.0),
                },
                Par::Seq,
                MemStack::new(&mut self.stack),
                Default::default(),
            )
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(())
    }

    fn solve(&mut self, rt: &[f64], rp: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rhs = Vec::with_capacity(self.signs.len());
        rhs.extend(rt.iter().zip(&self.scale).map(|(r, s)| r * s));
        rhs.extend_from_slice(rp);
        let dim = rhs.len();
        LdltRef::new(&self.symbolic, &self.l_values).solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(&mut rhs, dim, 1),
            Par::Seq,
            MemStack::new(&mut self.stack),
        );
        let y = rhs.split_off(self.n);
        for (x, s) in rhs.iter_mut().zip(&self.scale) {
            *x *= s;
        }
        (rhs, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Csr {
        let mut row_ptr = vec![0usize; nrows + 1];
        for &(i, _, _) in entries {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut sorted = entries.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        Csr {
            nrows,
            ncols,
            row_ptr,
            col_idx: sorted.iter().map(|e| e.1).collect(),
            vals: sorted.iter().map(|e| e.2).collect(),
        }
    }

    fn residual(a: &Csr, d: &[f64], x: &[f64], y: &[f64], rt: &[f64], rp: &[f64]) -> f64 {
        let mut aty = vec![0.0; a.ncols];
        a.mul_t(y, &mut aty);
        let mut ax = vec![0.0; a.nrows];
        a.mul(x, &mut ax);
        let r1 = (0..a.ncols).map(|j| (-d[j] * x[j] + aty[j] - rt[j]).abs());
        let r2 = (0..a.nrows).map(|i| (ax[i] - rp[i]).abs());
        r1.chain(r2).fold(0.0, f64::max)
    }

    #[test]
    fn both_paths_solve_the_same_system() {
        let a = csr(
            2,
            4,
            &[
                (0, 0, 1.0),
                (0, 1, 2.0),
                (1, 1, -1.0),
                (1, 2, 3.0),
                (1, 3, 0.5),
                (0, 3, 1.5),
            ],
        );
        let d = [2.0, 0.5, 1.0, 4.0];
        let rt = [1.0, -2.0, 0.5, 3.0];
        let rp = [0.25, -1.0];
        let (col_ptr, row_idx, vals) = a.to_csc();
        let mut dense = DenseNormal::new(&a);
        dense.factor(&a, &d).unwrap();
        let (xd, yd) = dense.solve(&a, &rt, &rp);
        let mut aug = Augmented::new(2, 4, col_ptr, row_idx, vals).unwrap();
        aug.factor(&d).unwrap();
        let (xa, ya) = aug.solve(&rt, &rp);
        assert!(residual(&a, &d, &xd, &yd, &rt, &rp) < 1e-12);
        assert!(residual(&a, &d, &xa, &ya, &rt, &rp) < 1e-8);
        for (u, v) in xd.iter().zip(&xa) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn extreme_diagonal_and_escalation() {
        let a = csr(
            2,
            4,
            &[
                (0, 0, 1.0),
                (0, 1, 2.0),
                (1, 1, -1.0),
                (1, 2, 3.0),
                (1, 3, 0.5),
                (0, 3, 1.5),
            ],
        );
        let d = [1e16, 0.5, 1e-8, 4.0];
        let rt = [1.0, -2.0, 0.5, 3.0];
        let rp = [0.25, -1.0];
        let (col_ptr, row_idx, vals) = a.to_csc();
        let mut dense = DenseNormal::new(&a);
        dense.factor(&a, &d).unwrap();
        let (xd, _) = dense.solve(&a, &rt, &rp);
        let mut solver =
            KktSolver::Augmented(Augmented::new(2, 4, col_ptr, row_idx, vals).unwrap());
        let tol = 1e-3;
        for _ in 0..4 {
            solver.factor(&a, &d).unwrap();
            let (xa, ya) = solver.solve(&a, &rt, &rp);
            let mut ax = vec![0.0; 2];
            a.mul(&xa, &mut ax);
            assert!((ax[0] - rp[0]).abs() < tol && (ax[1] - rp[1]).abs() < tol);
            for (u, v) in xd.iter().zip(&xa) {
                assert!((u - v).abs() < tol * (1.0 + u.abs()), "{u} vs {v}");
            }
            assert!(ya.iter().all(|v| v.is_finite()));
            solver.escalate();
        }
        assert!(!solver.escalate());
        assert!(!KktSolver::Normal(DenseNormal::new(&a)).escalate());
    }

    #[test]
    fn path_selection() {
        let dense = csr(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(KktSolver::new(&dense).unwrap().is_dense());
        let entries: Vec<_> = (0..50).map(|i| (i, i, 1.0)).collect();
        let diag = csr(50, 50, &entries);
        assert!(!KktSolver::new(&diag).unwrap().is_dense());
    }
}
