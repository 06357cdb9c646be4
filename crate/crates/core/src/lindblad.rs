//! Master-equation integration on the vacuum plus single-excitation sector.
//!
//! Basis `{|0⟩, |1⟩, …, |N⟩}`: the vacuum and one excitation on site `j`.
//! Each leaky site `l` decays through `a_l = |0⟩⟨l|` at rate `Γ`:
//!
//! `ρ' = −i[H, ρ] + Σ_l Γ (2 a_l ρ a_l† − {a_l†a_l, ρ})`
//!
//! The coherence of the first site is `2|⟨0|ρ|1⟩|`.

use faer::{c64, Mat, Side};
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{coherence_trace, DynamicsError};
use crate::matrix::ComplexMatrix;
use crate::model::{build_hamiltonian, BondNoise, ModelError, ModelSpec};
use crate::ode::{integrate, OdeError, Rk4Options};

pub const MAX_SITES: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum LindbladError {
    #[error("master-equation oracle is limited to {MAX_SITES} sites, got {0}")]
    TooLarge(usize),
    #[error("density matrix has dimension {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Density matrix on the `(N+1)`-dimensional sector.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix01(pub ComplexMatrix);

impl DensityMatrix01 {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `½(|0⟩ + |1⟩)(⟨0| + ⟨1|)`: the first qubit in an equal superposition,
    /// every other site empty.
    pub fn initial(n_sites: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n_sites + 1);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, c64::new(0.5, 0.0));
            }
        }
        Self(m)
    }

    pub fn pure(n_sites: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n_sites + 1);
        m.set(k, k, c64::new(1.0, 0.0));
        Self(m)
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.0.max_abs_diff(&self.0.adjoint())
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let herm = Mat::from_fn(n, n, |i, j| (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5);
        match herm.self_adjoint_eigenvalues(Side::Lower) {
            Ok(vals) => vals.into_iter().fold(f64::INFINITY, f64::min),
            Err(_) => f64::NAN,
        }
    }

    /// `2|⟨0|ρ|1⟩|`.
    pub fn coherence(&self) -> f64 {
        2.0 * self.0[(0, 1)].norm()
    }

    fn to_vec(&self) -> Vec<c64> {
        let n = self.dim();
        (0..n * n).map(|k| self.0[(k % n, k / n)]).collect()
    }

    fn from_slice(n: usize, v: &[c64]) -> Self {
        Self(ComplexMatrix::from_fn(n, |i, j| v[i + j * n]))
    }
}

/// Hermitian Hamiltonian and decay rates on the sector.
#[derive(Clone, Debug)]
pub struct LindbladSystem {
    /// `(N+1)×(N+1)`, vacuum row and column zero.
    pub h: ComplexMatrix,
    /// Decay rate per sector index (`0` for the vacuum).
    pub rates: Vec<f64>,
}

impl LindbladSystem {
    pub fn new(spec: &ModelSpec, noise: &BondNoise) -> Result<Self, LindbladError> {
        if spec.n_sites > MAX_SITES {
            return Err(LindbladError::TooLarge(spec.n_sites));
        }
        let chain = build_hamiltonian(spec, noise)?;
        let n = spec.n_sites;
        let h = ComplexMatrix::from_fn(n + 1, |i, j| {
            if i == 0 || j == 0 {
                c64::new(0.0, 0.0)
            } else {
                let z = chain[(i - 1, j - 1)];
                // The loss lives in the dissipator, not in H.
                c64::new(z.re, if i == j { 0.0 } else { z.im })
            }
        });
        let rates = (0..=n)
            .map(|k| {
                if k > 0 && spec.is_leaky(k - 1) {
                    spec.gamma
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { h, rates })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    fn rhs_into(&self, rho: &[c64], out: &mut [c64]) {
        let n = self.dim();
        let at = |i: usize, j: usize| rho[i + j * n];
        let minus_i = c64::new(0.0, -1.0);
        for j in 0..n {
            for i in 0..n {
                let mut comm = c64::new(0.0, 0.0);
                for k in 0..n {
                    comm += self.h[(i, k)] * at(k, j) - at(i, k) * self.h[(k, j)];
                }
                let mut d = minus_i * comm;
                // −Γ{n_l, ρ}: row and column l.
                d -= at(i, j) * (self.rates[i] + self.rates[j]);
                out[i + j * n] = d;
            }
        }
        // 2Γ a_l ρ a_l† = 2Γ ρ_ll |0⟩⟨0|.
        for (l, &g) in self.rates.iter().enumerate() {
            if g != 0.0 {
                out[0] += at(l, l) * (2.0 * g);
            }
        }
    }

    pub fn rhs(&self, rho: &DensityMatrix01) -> Result<DensityMatrix01, LindbladError> {
        let n = self.dim();
        if rho.dim() != n {
            return Err(LindbladError::Dimension {
                expected: n,
                found: rho.dim(),
            });
        }
        let mut out = vec![c64::new(0.0, 0.0); n * n];
        self.rhs_into(&rho.to_vec(), &mut out);
        Ok(DensityMatrix01::from_slice(n, &out))
    }

    pub fn evolve(
        &self,
        rho0: &DensityMatrix01,
        times: &[f64],
        tol: f64,
    ) -> Result<Vec<DensityMatrix01>, LindbladError> {
        let n = self.dim();
        if rho0.dim() != n {
            return Err(LindbladError::Dimension {
                expected: n,
                found: rho0.dim(),
            });
        }
        let opts = Rk4Options {
            tol,
            ..Rk4Options::default()
        };
        let (states, _) = integrate(
            |_t, y, dy| self.rhs_into(y, dy),
            0.0,
            &rho0.to_vec(),
            times,
            opts,
        )?;
        Ok(states
            .iter()
            .map(|s| DensityMatrix01::from_slice(n, s))
            .collect())
    }
}

/// Right-hand side of the master equation for the clean chain `spec`.
pub fn lindblad_rhs(rho: &DensityMatrix01, spec: &ModelSpec) -> Result<DensityMatrix01, LindbladError> {
    LindbladSystem::new(spec, &BondNoise::zeros(spec))?.rhs(rho)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub times: Vec<f64>,
    /// `2|⟨0|ρ(t)|1⟩|` from the master equation.
    pub oracle: Vec<f64>,
    /// `|(e^{-itH})₁₁|` from the restricted non-Hermitian Hamiltonian.
    pub reduced: Vec<f64>,
    pub max_deviation: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

/// Integrates the master equation from the superposition initial state and
/// compares its coherence with the restricted-Hamiltonian trace.
pub fn evolve_and_compare(
    spec: &ModelSpec,
    noise: &BondNoise,
    times: &[f64],
    tol: f64,
) -> Result<OracleReport, LindbladError> {
    let system = LindbladSystem::new(spec, noise)?;
    let states = system.evolve(&DensityMatrix01::initial(spec.n_sites), times, tol)?;
    let oracle: Vec<f64> = states.iter().map(DensityMatrix01::coherence).collect();
    let reduced = coherence_trace(&build_hamiltonian(spec, noise)?, times)?;
    let max_deviation = oracle
        .iter()
        .zip(&reduced)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(OracleReport {
        times: times.to_vec(),
        max_deviation,
        max_trace_error: states
            .iter()
            .map(|s| (s.trace() - c64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max),
        max_hermiticity_defect: states
            .iter()
            .map(DensityMatrix01::hermiticity_defect)
            .fold(0.0, f64::max),
        min_eigenvalue: states
            .iter()
            .map(DensityMatrix01::min_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        oracle,
        reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_is_stationary() {
        let spec = ModelSpec::dimer(4, 0.5, 1.0, 0.5);
        let d = lindblad_rhs(&DensityMatrix01::pure(4, 0), &spec).unwrap();
        assert_eq!(d.0.norm_max(), 0.0);
    }

    #[test]
    fn leaky_population_decays_at_twice_gamma() {
        let spec = ModelSpec::dimer(2, 0.0, 0.0, 0.5);
        // Sector index 2 is site B1.
        let d = lindblad_rhs(&DensityMatrix01::pure(2, 2), &spec).unwrap();
        assert!((d.0[(2, 2)] - c64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((d.0[(0, 0)] - c64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_large_chains() {
        let spec = ModelSpec::dimer(14, 0.5, 1.0, 0.5);
        assert_eq!(
            lindblad_rhs(&DensityMatrix01::initial(14), &spec),
            Err(LindbladError::TooLarge(14))
        );
    }

    #[test]
    fn two_site_agreement() {
        let spec = ModelSpec::dimer(2, 0.5, 1.0, 0.5);
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
        let r = evolve_and_compare(&spec, &BondNoise::zeros(&spec), &times, 1e-10).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
        assert!(r.max_trace_error < 1e-8);
        assert!(r.min_eigenvalue > -1e-8);
    }
}
