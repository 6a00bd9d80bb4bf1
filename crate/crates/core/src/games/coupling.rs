use crate::error::{check_len, Error, Result};
use crate::numerics::DenseMatrix;

/// Coordinate-list sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, v) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::invalid(
                    "sparse entry",
                    format!("({r}, {c}) outside {rows}x{cols}"),
                ));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("sparse entry"));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m.set(r, c, m.get(r, c) + v);
        }
        m
    }
}

/// A coupling matrix `A_i`, stored densely or sparsely depending on the family.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl Coupling {
    pub fn rows(&self) -> usize {
        match self {
            Coupling::Dense(m) => m.rows(),
            Coupling::Sparse(m) => m.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Coupling::Dense(m) => m.cols(),
            Coupling::Sparse(m) => m.cols,
        }
    }

    /// `out += scale · A v`
    #[inline]
    pub fn mul_add(&self, v: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            Coupling::Dense(m) => m.mul_add(v, scale, out),
            Coupling::Sparse(m) => {
                for &(r, c, a) in &m.entries {
                    out[r] += scale * a * v[c];
                }
            }
        }
    }

    /// `out += scale · Aᵀ v`
    #[inline]
    pub fn tmul_add(&self, v: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            Coupling::Dense(m) => m.tmul_add(v, scale, out),
            Coupling::Sparse(m) => {
                for &(r, c, a) in &m.entries {
                    out[c] += scale * a * v[r];
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Coupling::Dense(m) => m.clone(),
            Coupling::Sparse(m) => m.to_dense(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coupling::Dense(m) => m.max_abs() == 0.0,
            Coupling::Sparse(m) => m.entries.iter().all(|e| e.2 == 0.0),
        }
    }

    /// Row/column support: indices of rows and columns touched by a nonzero.
    pub(crate) fn support(&self) -> (Vec<usize>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        match self {
            Coupling::Dense(m) => {
                for r in 0..m.rows() {
                    for c in 0..m.cols() {
                        if m.get(r, c) != 0.0 {
                            rows.push(r);
                            cols.push(c);
                        }
                    }
                }
            }
            Coupling::Sparse(m) => {
                for &(r, c, v) in &m.entries {
                    if v != 0.0 {
                        rows.push(r);
                        cols.push(c);
                    }
                }
            }
        }
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        (rows, cols)
    }

    pub(crate) fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        check_len("coupling rows", rows, self.rows())?;
        check_len("coupling cols", cols, self.cols())
    }
}
