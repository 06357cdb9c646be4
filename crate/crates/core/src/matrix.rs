//! Dense square complex matrices.
//!
//! [`ComplexMatrix`] wraps a `faer::Mat<c64>` and only admits square matrices
//! with finite entries. Hamiltonians, polar factors and propagators all use it.

use std::fmt::Write as _;
use std::ops::Index;

use faer::{c64, Mat, MatRef};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("malformed matrix text at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(Mat<c64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self(Mat::from_fn(dim, dim, f))
    }

    pub fn from_real_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self(Mat::from_fn(dim, dim, |i, j| c64::new(f(i, j), 0.0)))
    }

    /// Wraps an existing matrix, checking shape and finiteness.
    pub fn from_mat(mat: Mat<c64>) -> Result<Self, MatrixError> {
        if mat.nrows() != mat.ncols() {
            return Err(MatrixError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let m = Self(mat);
        m.check_finite()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_ref(&self) -> MatRef<'_, c64> {
        self.0.as_ref()
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.0
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.0
    }

    pub fn set(&mut self, row: usize, col: usize, value: c64) {
        self.0[(row, col)] = value;
    }

    pub fn add_at(&mut self, row: usize, col: usize, value: c64) {
        self.0[(row, col)] += value;
    }

    pub fn check_finite(&self) -> Result<(), MatrixError> {
        let n = self.dim();
        for col in 0..n {
            for row in 0..n {
                let z = self.0[(row, col)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(MatrixError::NonFinite { row, col });
                }
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose().to_owned())
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint().to_owned())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn scale(&self, factor: c64) -> Self {
        let n = self.dim();
        Self(Mat::from_fn(n, n, |i, j| self.0[(i, j)] * factor))
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.0[(i, j)].norm());
            }
        }
        m
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.0.norm_l2()
    }

    /// Operator 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        op_norm_one(self.as_ref())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let n = self.dim();
        let mut m = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.0[(i, j)] - other.0[(i, j)]).norm());
            }
        }
        m
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint().matmul(self);
        gram.max_abs_diff(&Self::identity(self.dim()))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length mismatch");
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == c64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.0[(i, j)] * vj;
            }
        }
        out
    }

    /// Plain-text form: a header `N=<dim>` followed by one line per row of
    /// space-separated `re,im` pairs.
    pub fn to_text(&self) -> String {
        let n = self.dim();
        let mut s = format!("N={n}\n");
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    s.push(' ');
                }
                let z = self.0[(i, j)];
                let _ = write!(s, "{},{}", z.re, z.im);
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MatrixError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(MatrixError::Parse {
            line: 1,
            reason: "empty input".into(),
        })?;
        let dim: usize = header
            .trim()
            .strip_prefix("N=")
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| MatrixError::Parse {
                line: hline + 1,
                reason: format!("expected header `N=<dim>`, got `{header}`"),
            })?;
        let mut mat = Mat::<c64>::zeros(dim, dim);
        let mut rows = 0;
        for (lineno, line) in lines {
            if rows == dim {
                return Err(MatrixError::Parse {
                    line: lineno + 1,
                    reason: "more rows than declared".into(),
                });
            }
            let entries: Vec<&str> = line.split_whitespace().collect();
            if entries.len() != dim {
                return Err(MatrixError::Parse {
                    line: lineno + 1,
                    reason: format!("expected {dim} entries, found {}", entries.len()),
                });
            }
            for (col, e) in entries.iter().enumerate() {
                let (re, im) = e.split_once(',').ok_or_else(|| MatrixError::Parse {
                    line: lineno + 1,
                    reason: format!("entry `{e}` is not a `re,im` pair"),
                })?;
                let parse = |s: &str| {
                    s.parse::<f64>().map_err(|err| MatrixError::Parse {
                        line: lineno + 1,
                        reason: format!("`{s}`: {err}"),
                    })
                };
                mat[(rows, col)] = c64::new(parse(re)?, parse(im)?);
            }
            rows += 1;
        }
        if rows != dim {
            return Err(MatrixError::Parse {
                line: text.lines().count(),
                reason: format!("expected {dim} rows, found {rows}"),
            });
        }
        Self::from_mat(mat)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = c64;

    fn index(&self, idx: (usize, usize)) -> &c64 {
        &self.0[idx]
    }
}

pub(crate) fn op_norm_one(m: MatRef<'_, c64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
