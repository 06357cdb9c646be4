//! Real-space winding numbers of chiral chains.
//!
//! The winding is the truncated trace `(1/M′) Σ_j Re(U†[X,U])_jj` of the
//! polar unitary `U` of the sublattice hopping block, with the sum running
//! over the `M′ = M − 2ℓ` interior cells.

use faer::c64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::LinalgError;
use crate::matrix::ComplexMatrix;
use crate::model::{
    sample_noise_seeded, sublattice_blocks, BondNoise, ChainKind, DisorderSpec, ModelError,
    ModelSpec,
};
use crate::seed::derive_seed;
use crate::stats::MeanStderr;

/// Relative singular-value threshold below which `V` counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-10;

/// Residual above which a winding estimate is not considered quantized.
pub const INDETERMINATE_RESIDUAL: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("expected a {expected:?} chain")]
    WrongKind { expected: ChainKind },
    #[error("on-site disorder breaks chiral symmetry; winding is undefined")]
    DiagonalDisorder,
    #[error("disordered J1 mixes the trimer branches; winding is undefined")]
    DisorderedJ1,
    #[error("J1 = 0 with equal on-site energies leaves the branch rotation undefined")]
    DegenerateRotation,
    #[error("truncation ℓ = {trunc_l} leaves no interior cells out of {cells}")]
    Truncation { trunc_l: usize, cells: usize },
    #[error("parameters lie on a phase boundary")]
    Marginal,
}

/// `V = U·P` with `U` unitary and `P` Hermitian positive semi-definite.
#[derive(Clone, Debug)]
pub struct PolarFactor {
    pub unitary: ComplexMatrix,
    /// Descending.
    pub singular_values: Vec<f64>,
}

impl PolarFactor {
    pub fn min_singular(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn max_singular(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value below `SINGULAR_RTOL` times the largest.
    pub fn is_singular(&self) -> bool {
        self.min_singular() < SINGULAR_RTOL * self.max_singular()
    }

    pub fn near_singular_count(&self) -> usize {
        let cut = SINGULAR_RTOL * self.max_singular();
        self.singular_values.iter().filter(|&&s| s < cut).count()
    }
}

/// Polar unitary from the SVD `V = W·Σ·Z†` as `U = W·Z†`.
pub fn polar_unitary(v: &ComplexMatrix) -> Result<PolarFactor, TopologyError> {
    let svd = v.as_mat().svd().map_err(|_| LinalgError::SvdNoConvergence)?;
    let u = svd.U() * svd.V().adjoint();
    let singular_values = (0..v.dim()).map(|i| svd.S()[i].re).collect();
    let unitary = ComplexMatrix::from_mat(u).map_err(|_| LinalgError::NonFinite("polar factor"))?;
    Ok(PolarFactor {
        unitary,
        singular_values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindingResult {
    pub w_real: f64,
    pub w_int: i64,
    pub residual: f64,
    pub trunc_l: usize,
    pub m_prime: usize,
    /// More than one singular value of `V` vanishes.
    pub degenerate: bool,
    pub min_singular: f64,
}

impl WindingResult {
    fn new(w_real: f64, trunc_l: usize, m_prime: usize, polar: &PolarFactor) -> Self {
        let w_int = w_real.round() as i64;
        Self {
            w_real,
            w_int,
            residual: (w_real - w_int as f64).abs(),
            trunc_l,
            m_prime,
            degenerate: polar.near_singular_count() > 1,
            min_singular: polar.min_singular(),
        }
    }

    pub fn is_indeterminate(&self) -> bool {
        self.residual > INDETERMINATE_RESIDUAL
    }
}

pub fn default_trunc(cells: usize) -> usize {
    cells / 4
}

fn resolve_trunc(trunc_l: Option<usize>, cells: usize) -> Result<(usize, usize), TopologyError> {
    let l = trunc_l.unwrap_or_else(|| default_trunc(cells));
    if 2 * l >= cells {
        return Err(TopologyError::Truncation { trunc_l: l, cells });
    }
    Ok((l, cells - 2 * l))
}

/// `(1/M′) Σ_{j=ℓ}^{M−ℓ−1} Re(U†[X,U])_jj` with `X = diag(1..M)`.
///
/// Uses `(U†[X,U])_jj = Σ_i (x_i − x_j)|U_ij|²`.
pub fn truncated_winding(u: &ComplexMatrix, trunc_l: usize) -> f64 {
    let m = u.dim();
    let m_prime = m - 2 * trunc_l;
    let mut sum = 0.0;
    for j in trunc_l..m - trunc_l {
        let mut d = 0.0;
        for i in 0..m {
            d += (i as f64 - j as f64) * u[(i, j)].norm_sqr();
        }
        sum += d;
    }
    sum / m_prime as f64
}

fn winding_of(v: &ComplexMatrix, trunc_l: Option<usize>) -> Result<WindingResult, TopologyError> {
    let (l, m_prime) = resolve_trunc(trunc_l, v.dim())?;
    let polar = polar_unitary(v)?;
    let w = truncated_winding(&polar.unitary, l);
    Ok(WindingResult::new(w, l, m_prime, &polar))
}

fn reject_diagonal(noise: &BondNoise) -> Result<(), TopologyError> {
    if noise.has_diagonal_disorder() {
        return Err(TopologyError::DiagonalDisorder);
    }
    Ok(())
}

pub fn winding_real_space_dimer(
    spec: &ModelSpec,
    noise: &BondNoise,
    trunc_l: Option<usize>,
) -> Result<WindingResult, TopologyError> {
    if spec.kind != ChainKind::Dimer {
        return Err(TopologyError::WrongKind {
            expected: ChainKind::Dimer,
        });
    }
    reject_diagonal(noise)?;
    let blocks = sublattice_blocks(spec, noise)?;
    winding_of(&blocks.v_blocks[0], trunc_l)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrimerWinding {
    pub total: WindingResult,
    pub plus: WindingResult,
    pub minus: WindingResult,
}

/// Components `(e_A, e_B)` of the two eigenvectors of the on-site block
/// `[[ε_A, J1], [J1, ε_B]]`, with `φ = atan2(2J1, ε_A − ε_B)`:
/// `e₊ = (cos φ/2, sin φ/2)` and `e₋ = (−sin φ/2, cos φ/2)`.
pub fn branch_rotation(j1: f64, eps_a: f64, eps_b: f64) -> Result<([f64; 2], [f64; 2]), TopologyError> {
    if j1 == 0.0 && eps_a == eps_b {
        return Err(TopologyError::DegenerateRotation);
    }
    let half = 0.5 * (2.0 * j1).atan2(eps_a - eps_b);
    let (s, c) = half.sin_cos();
    Ok(([c, s], [-s, c]))
}

pub fn winding_real_space_trimer(
    spec: &ModelSpec,
    noise: &BondNoise,
    trunc_l: Option<usize>,
) -> Result<TrimerWinding, TopologyError> {
    if spec.kind != ChainKind::Trimer {
        return Err(TopologyError::WrongKind {
            expected: ChainKind::Trimer,
        });
    }
    reject_diagonal(noise)?;
    if noise.j1.iter().any(|&x| x != 0.0) {
        return Err(TopologyError::DisorderedJ1);
    }
    let (e_plus, e_minus) = branch_rotation(spec.j1, spec.eps_a, spec.eps_b)?;
    let blocks = sublattice_blocks(spec, noise)?;
    let (hac, hbc) = (&blocks.v_blocks[0], &blocks.v_blocks[1]);
    let combine = |e: [f64; 2]| {
        ComplexMatrix::from_fn(hac.dim(), |i, j| {
            hac[(i, j)] * c64::new(e[0], 0.0) + hbc[(i, j)] * c64::new(e[1], 0.0)
        })
    };
    let plus = winding_of(&combine(e_plus), trunc_l)?;
    let minus = winding_of(&combine(e_minus), trunc_l)?;
    let w_real = plus.w_real + minus.w_real;
    let w_int = w_real.round() as i64;
    let total = WindingResult {
        w_real,
        w_int,
        residual: (w_real - w_int as f64).abs(),
        trunc_l: plus.trunc_l,
        m_prime: plus.m_prime,
        degenerate: plus.degenerate || minus.degenerate,
        min_singular: plus.min_singular.min(minus.min_singular),
    };
    Ok(TrimerWinding { total, plus, minus })
}

/// Total real-space winding for either chain kind.
pub fn winding_real_space(
    spec: &ModelSpec,
    noise: &BondNoise,
    trunc_l: Option<usize>,
) -> Result<WindingResult, TopologyError> {
    match spec.kind {
        ChainKind::Dimer => winding_real_space_dimer(spec, noise, trunc_l),
        ChainKind::Trimer => Ok(winding_real_space_trimer(spec, noise, trunc_l)?.total),
    }
}

const MARGINAL_RTOL: f64 = 1e-12;

fn heaviside(a: f64, b: f64) -> Result<i64, TopologyError> {
    // Θ(|a| − |b|)
    let (a, b) = (a.abs(), b.abs());
    if (a - b).abs() <= MARGINAL_RTOL * a.max(b) {
        return Err(TopologyError::Marginal);
    }
    Ok(i64::from(a > b))
}

/// Clean dimer winding `Θ(|J2| − |J1|)`.
pub fn winding_clean_dimer(j1: f64, j2: f64) -> Result<i64, TopologyError> {
    heaviside(j2, j1)
}

/// Clean trimer branch windings `(W₊, W₋)`:
/// `Θ(|J3| − |J + J2 tan(φ/2)|)` and `Θ(|J3| − |J − J2 cot(φ/2)|)`.
pub fn winding_clean_trimer_branches(
    j1: f64,
    j2: f64,
    j3: f64,
    j: f64,
    eps_a: f64,
    eps_b: f64,
) -> Result<(i64, i64), TopologyError> {
    let ([c, s], _) = branch_rotation(j1, eps_a, eps_b)?;
    let plus = heaviside(c * j3, c * j + s * j2)?;
    let minus = heaviside(s * j3, c * j2 - s * j)?;
    Ok((plus, minus))
}

pub fn winding_clean_trimer(
    j1: f64,
    j2: f64,
    j3: f64,
    j: f64,
    eps_a: f64,
    eps_b: f64,
) -> Result<i64, TopologyError> {
    let (p, m) = winding_clean_trimer_branches(j1, j2, j3, j, eps_a, eps_b)?;
    Ok(p + m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindingStats {
    pub w: MeanStderr,
    /// Realizations with a degenerate polar factor.
    pub flagged: usize,
    /// Realizations whose decomposition failed; excluded from the mean.
    pub failed: usize,
}

/// Disorder-averaged winding for realizations `0..realizations` of grid cell
/// `cell`, each seeded with `derive_seed(base_seed, cell.0, cell.1, r)`.
pub fn winding_mean_cell(
    spec: &ModelSpec,
    dspec: &DisorderSpec,
    realizations: usize,
    trunc_l: Option<usize>,
    cell: (u64, u64),
) -> Result<WindingStats, TopologyError> {
    spec.validate()?;
    dspec.validate()?;
    spec.cells()?;
    if spec.kind == ChainKind::Trimer && dspec.mu1 != 0.0 {
        return Err(TopologyError::DisorderedJ1);
    }
    if dspec.mu_diag != 0.0 {
        return Err(TopologyError::DiagonalDisorder);
    }
    resolve_trunc(trunc_l, spec.cells()?)?;
    let results: Vec<Result<WindingResult, TopologyError>> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(dspec.base_seed, cell.0, cell.1, r);
            let noise = sample_noise_seeded(spec, dspec, seed);
            winding_real_space(spec, &noise, trunc_l)
        })
        .collect();
    let mut samples = Vec::with_capacity(realizations);
    let mut flagged = 0;
    let mut failed = 0;
    for res in results {
        match res {
            Ok(w) => {
                flagged += usize::from(w.degenerate);
                samples.push(w.w_real);
            }
            Err(TopologyError::Linalg(_)) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(WindingStats {
        w: MeanStderr::from_samples(&samples),
        flagged,
        failed,
    })
}

pub fn winding_mean(
    spec: &ModelSpec,
    dspec: &DisorderSpec,
    realizations: usize,
    trunc_l: Option<usize>,
) -> Result<WindingStats, TopologyError> {
    winding_mean_cell(spec, dspec, realizations, trunc_l, (0, 0))
}
