//! Eigendecomposition and matrix exponential for dense complex matrices.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat, MatRef};
use thiserror::Error;

use crate::matrix::{op_norm_one, ComplexMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("eigensolver did not converge")]
    EigenNoConvergence,
    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
}

/// `H = P·diag(λ)·P⁻¹` with the 1-norm condition number of `P`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<c64>,
    pub vectors: Mat<c64>,
    pub inverse: Mat<c64>,
    pub condition: f64,
}

impl EigenDecomposition {
    /// `e^{-itH}` applied to basis vector `k`, returned as a full column.
    pub fn propagate_basis(&self, k: usize, t: f64) -> Vec<c64> {
        let n = self.values.len();
        let coeff: Vec<c64> = (0..n)
            .map(|m| (c64::new(0.0, -t) * self.values[m]).exp() * self.inverse[(m, k)])
            .collect();
        (0..n)
            .map(|i| (0..n).map(|m| self.vectors[(i, m)] * coeff[m]).sum())
            .collect()
    }

    /// `(e^{-itH})_{jk}`.
    pub fn propagator_entry(&self, j: usize, k: usize, t: f64) -> c64 {
        (0..self.values.len())
            .map(|m| {
                self.vectors[(j, m)]
                    * (c64::new(0.0, -t) * self.values[m]).exp()
                    * self.inverse[(m, k)]
            })
            .sum()
    }
}

pub fn eigen_decompose(h: &ComplexMatrix) -> Result<EigenDecomposition, LinalgError> {
    let evd = h.as_mat().eigen().map_err(|_| LinalgError::EigenNoConvergence)?;
    let vectors = evd.U().to_owned();
    let values: Vec<c64> = (0..h.dim()).map(|i| evd.S()[i]).collect();
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NonFinite("eigenvalues"));
    }
    let inverse = vectors.partial_piv_lu().inverse();
    let condition = op_norm_one(vectors.as_ref()) * op_norm_one(inverse.as_ref());
    let condition = if condition.is_finite() {
        condition
    } else {
        f64::INFINITY
    };
    Ok(EigenDecomposition {
        values,
        vectors,
        inverse,
        condition,
    })
}

pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<c64>, LinalgError> {
    let vals = h
        .as_mat()
        .eigenvalues()
        .map_err(|_| LinalgError::EigenNoConvergence)?;
    if vals.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NonFinite("eigenvalues"));
    }
    Ok(vals)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn scaled(a: MatRef<'_, c64>, s: f64) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

fn add_diag(m: &mut Mat<c64>, s: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += c64::new(s, 0.0);
    }
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = a.dim();
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(LinalgError::NonFinite("expm input"));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let b = &PADE13;
    let a = scaled(a.as_ref(), 0.5f64.powi(s));
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut inner_u = scaled(a6.as_ref(), b[13]) + scaled(a4.as_ref(), b[11]) + scaled(a2.as_ref(), b[9]);
    inner_u = &a6 * &inner_u;
    inner_u = inner_u + scaled(a6.as_ref(), b[7]) + scaled(a4.as_ref(), b[5]) + scaled(a2.as_ref(), b[3]);
    add_diag(&mut inner_u, b[1]);
    let u = &a * &inner_u;

    let mut v = scaled(a6.as_ref(), b[12]) + scaled(a4.as_ref(), b[10]) + scaled(a2.as_ref(), b[8]);
    v = &a6 * &v;
    v = v + scaled(a6.as_ref(), b[6]) + scaled(a4.as_ref(), b[4]) + scaled(a2.as_ref(), b[2]);
    add_diag(&mut v, b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    debug_assert_eq!(r.nrows(), n);
    ComplexMatrix::from_mat(r).map_err(|_| LinalgError::NonFinite("expm"))
}

/// `e^{-itH}`.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, LinalgError> {
    expm(&h.scale(c64::new(0.0, -t)))
}
