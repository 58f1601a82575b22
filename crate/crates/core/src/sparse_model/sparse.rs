use std::collections::HashSet;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Triplet-form sparse matrix. Entries are unique, in range, and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(r, c, v) in &entries {
            if r >= nrows || c >= ncols {
                return Err(Error::Dimension(format!(
                    "entry ({r},{c}) outside {nrows}x{ncols}"
                )));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "entry ({r},{c}) has stored value {v}"
                )));
            }
            if !seen.insert((r, c)) {
                return Err(Error::InvalidModel(format!("duplicate entry ({r},{c})")));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            entries,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![0.0; self.nrows];
        for &(r, c, a) in &self.entries {
            out[r] += a * v[c];
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            d[(r, c)] = v;
        }
        d
    }
}

/// `diag(K, ..., K)` with `blocks` copies, so that
/// `vec(K F) = blockdiag_rows(K, n) vec(F)` for an `n`-column `F`.
pub fn blockdiag_rows(k: &DenseMatrix, blocks: usize) -> SparseMatrix {
    let (mp, n) = (k.nrows(), k.ncols());
    let mut entries = Vec::new();
    for b in 0..blocks {
        for j in 0..mp {
            for (c, &v) in k.row(j).iter().enumerate() {
                if v != 0.0 {
                    entries.push((b * mp + j, b * n + c, v));
                }
            }
        }
    }
    SparseMatrix {
        nrows: blocks * mp,
        ncols: blocks * n,
        entries,
    }
}

/// Block matrix whose `(j, k)` block is `K[j,k] * I`, so that
/// `vec(G K^T) = kron_identity_rows(K, m) vec(G)` for an `m`-row `G`.
pub fn kron_identity_rows(k: &DenseMatrix, ident_dim: usize) -> SparseMatrix {
    let (mp, n) = (k.nrows(), k.ncols());
    let mut entries = Vec::new();
    for j in 0..mp {
        for i in 0..ident_dim {
            for (c, &v) in k.row(j).iter().enumerate() {
                if v != 0.0 {
                    entries.push((j * ident_dim + i, c * ident_dim + i, v));
                }
            }
        }
    }
    SparseMatrix {
        nrows: mp * ident_dim,
        ncols: n * ident_dim,
        entries,
    }
}
