//! Fiducial-qubit coherence `C(t) = |(e^{-itH})₁₁|`, complex spectra and
//! coherence times.

use std::collections::HashMap;

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigen_decompose, eigenvalues, propagator, LinalgError};
use crate::matrix::ComplexMatrix;
use crate::model::{build_hamiltonian, sample_noise_seeded, DisorderSpec, ModelError, ModelSpec};
use crate::seed::derive_seed;
use crate::stats::MeanStderr;

/// Eigenvector condition number above which the exponential is used instead
/// of the eigendecomposition.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Fraction of grid points, counted from the end, averaged by the long-time
/// estimator.
pub const TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Hamiltonian has non-finite entries")]
    NonFiniteHamiltonian,
    #[error("time grid must be finite, non-negative and ascending")]
    BadTimes,
    #[error("state has length {found}, expected {expected}")]
    StateLength { expected: usize, found: usize },
    #[error("bad histogram bins: {0}")]
    BadBins(String),
    #[error("realizations must be at least 1")]
    NoRealizations,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Eigendecomposition when well conditioned, exponential otherwise.
    #[default]
    Auto,
    Eigen,
    Expm,
}

fn check_times(times: &[f64]) -> Result<(), DynamicsError> {
    let ok = times.iter().all(|t| t.is_finite() && *t >= 0.0)
        && times.windows(2).all(|w| w[0] <= w[1]);
    if ok {
        Ok(())
    } else {
        Err(DynamicsError::BadTimes)
    }
}

/// Propagates by `t_{k+1} − t_k` with one exponential per distinct step.
struct StepPropagator<'a> {
    h: &'a ComplexMatrix,
    cache: HashMap<u64, ComplexMatrix>,
}

impl<'a> StepPropagator<'a> {
    fn new(h: &'a ComplexMatrix) -> Self {
        Self {
            h,
            cache: HashMap::new(),
        }
    }

    fn step(&mut self, psi: &[c64], dt: f64) -> Result<Vec<c64>, LinalgError> {
        if dt == 0.0 {
            return Ok(psi.to_vec());
        }
        // Steps equal to ~13 significant digits share one propagator.
        let key = dt.to_bits() >> 8;
        if !self.cache.contains_key(&key) {
            self.cache.insert(key, propagator(self.h, dt)?);
        }
        Ok(self.cache[&key].apply(psi))
    }
}

/// `e^{-itH}ψ₀` at every time in `times`. Returns the states and the
/// method actually used.
pub fn evolve_state(
    h: &ComplexMatrix,
    psi0: &[c64],
    times: &[f64],
    method: Method,
) -> Result<(Vec<Vec<c64>>, Method), DynamicsError> {
    h.check_finite()
        .map_err(|_| DynamicsError::NonFiniteHamiltonian)?;
    check_times(times)?;
    let n = h.dim();
    if psi0.len() != n {
        return Err(DynamicsError::StateLength {
            expected: n,
            found: psi0.len(),
        });
    }
    if method != Method::Expm {
        match eigen_decompose(h) {
            Ok(d) if method == Method::Eigen || d.condition < CONDITION_LIMIT => {
                let coeffs = d.inverse.as_ref() * faer::Mat::from_fn(n, 1, |i, _| psi0[i]);
                let states = times
                    .iter()
                    .map(|&t| {
                        let phases: Vec<c64> = (0..n)
                            .map(|m| (c64::new(0.0, -t) * d.values[m]).exp() * coeffs[(m, 0)])
                            .collect();
                        (0..n)
                            .map(|i| (0..n).map(|m| d.vectors[(i, m)] * phases[m]).sum())
                            .collect()
                    })
                    .collect();
                return Ok((states, Method::Eigen));
            }
            Err(e) if method == Method::Eigen => return Err(e.into()),
            _ => {}
        }
    }
    let mut stepper = StepPropagator::new(h);
    let mut states = Vec::with_capacity(times.len());
    let mut psi = psi0.to_vec();
    let mut t_prev = 0.0;
    for &t in times {
        psi = stepper.step(&psi, t - t_prev)?;
        t_prev = t;
        states.push(psi.clone());
    }
    Ok((states, Method::Expm))
}

/// `|(e^{-itH})₁₁|` at every time, with the method actually used.
pub fn coherence_trace_with(
    h: &ComplexMatrix,
    times: &[f64],
    method: Method,
) -> Result<(Vec<f64>, Method), DynamicsError> {
    h.check_finite()
        .map_err(|_| DynamicsError::NonFiniteHamiltonian)?;
    check_times(times)?;
    let n = h.dim();
    if method != Method::Expm {
        match eigen_decompose(h) {
            Ok(d) if method == Method::Eigen || d.condition < CONDITION_LIMIT => {
                let w: Vec<c64> = (0..n).map(|m| d.vectors[(0, m)] * d.inverse[(m, 0)]).collect();
                let c = times
                    .iter()
                    .map(|&t| {
                        (0..n)
                            .map(|m| w[m] * (c64::new(0.0, -t) * d.values[m]).exp())
                            .sum::<c64>()
                            .norm()
                    })
                    .collect();
                return Ok((c, Method::Eigen));
            }
            Err(e) if method == Method::Eigen => return Err(e.into()),
            _ => {}
        }
    }
    let mut e1 = vec![c64::new(0.0, 0.0); n];
    e1[0] = c64::new(1.0, 0.0);
    let (states, used) = evolve_state(h, &e1, times, Method::Expm)?;
    Ok((states.iter().map(|s| s[0].norm()).collect(), used))
}

pub fn coherence_trace(h: &ComplexMatrix, times: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    Ok(coherence_trace_with(h, times, Method::Auto)?.0)
}

/// Mean of the last `TAIL_FRACTION` of the samples (at least one).
pub fn long_time_estimate(values: &[f64]) -> f64 {
    let k = ((values.len() as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, values.len().max(1));
    let tail = &values[values.len() - k..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherenceTrace {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
    /// Long-time estimator over realizations: each realization contributes
    /// the mean of its own tail window.
    pub tail: MeanStderr,
    /// Realizations that needed the exponential fallback.
    pub expm_fallbacks: usize,
    /// Realizations dropped after a numerical failure.
    pub failed: usize,
}

/// Disorder-averaged coherence for realizations of grid cell `cell`.
pub fn coherence_mean_cell(
    spec: &ModelSpec,
    dspec: &DisorderSpec,
    realizations: usize,
    times: &[f64],
    cell: (u64, u64),
) -> Result<CoherenceTrace, DynamicsError> {
    spec.validate()?;
    dspec.validate()?;
    check_times(times)?;
    if realizations == 0 {
        return Err(DynamicsError::NoRealizations);
    }
    let runs: Vec<Result<(Vec<f64>, Method), DynamicsError>> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(dspec.base_seed, cell.0, cell.1, r);
            let h = build_hamiltonian(spec, &sample_noise_seeded(spec, dspec, seed))?;
            coherence_trace_with(&h, times, Method::Auto)
        })
        .collect();
    let mut traces = Vec::with_capacity(realizations);
    let mut expm_fallbacks = 0;
    let mut failed = 0;
    for run in runs {
        match run {
            Ok((c, used)) => {
                expm_fallbacks += usize::from(used == Method::Expm);
                traces.push(c);
            }
            Err(DynamicsError::Linalg(_)) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    let mut mean = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    let mut column = Vec::with_capacity(traces.len());
    for k in 0..times.len() {
        column.clear();
        column.extend(traces.iter().map(|c| c[k]));
        let s = MeanStderr::from_samples(&column);
        mean.push(s.mean);
        stderr.push(s.stderr);
    }
    let tails: Vec<f64> = traces.iter().map(|c| long_time_estimate(c)).collect();
    Ok(CoherenceTrace {
        times: times.to_vec(),
        mean,
        stderr,
        realizations: traces.len(),
        tail: MeanStderr::from_samples(&tails),
        expm_fallbacks,
        failed,
    })
}

pub fn coherence_mean(
    spec: &ModelSpec,
    dspec: &DisorderSpec,
    realizations: usize,
    times: &[f64],
) -> Result<CoherenceTrace, DynamicsError> {
    coherence_mean_cell(spec, dspec, realizations, times, (0, 0))
}

/// Caller-facing time grid definitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeGrid {
    /// `count` evenly spaced points on `[0, t_max]`.
    Linear { t_max: f64, count: usize },
    /// `0`, then `dense` geometrically spaced points on `[t_first, t_switch]`,
    /// then `coarse` evenly spaced points on `(t_switch, t_max]`.
    GeometricLinear {
        t_first: f64,
        t_switch: f64,
        dense: usize,
        t_max: f64,
        coarse: usize,
    },
    Explicit { values: Vec<f64> },
}

impl TimeGrid {
    /// Geometric up to `10/Γ`, then linear to `t_max`.
    pub fn default_for(gamma: f64, t_max: f64) -> Self {
        let t_switch = if gamma > 0.0 { (10.0 / gamma).min(t_max) } else { t_max };
        TimeGrid::GeometricLinear {
            t_first: (t_switch * 1e-3).max(1e-6),
            t_switch,
            dense: 200,
            t_max,
            coarse: 200,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>, DynamicsError> {
        let pts = match *self {
            TimeGrid::Linear { t_max, count } => {
                if count == 0 {
                    return Err(DynamicsError::BadTimes);
                }
                if count == 1 {
                    vec![0.0]
                } else {
                    (0..count)
                        .map(|k| t_max * k as f64 / (count - 1) as f64)
                        .collect()
                }
            }
            TimeGrid::GeometricLinear {
                t_first,
                t_switch,
                dense,
                t_max,
                coarse,
            } => {
                if !(t_first > 0.0 && t_first <= t_switch && t_switch <= t_max) || dense < 2 {
                    return Err(DynamicsError::BadTimes);
                }
                let ratio = (t_switch / t_first).powf(1.0 / (dense - 1) as f64);
                let mut v = vec![0.0];
                v.extend((0..dense).map(|k| {
                    if k + 1 == dense {
                        t_switch
                    } else {
                        t_first * ratio.powi(k as i32)
                    }
                }));
                v.extend(
                    (1..=coarse).map(|k| t_switch + (t_max - t_switch) * k as f64 / coarse as f64),
                );
                v
            }
            TimeGrid::Explicit { ref values } => values.clone(),
        };
        check_times(&pts)?;
        Ok(pts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Bins {
    fn check(&self, axis: &str) -> Result<(), DynamicsError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max && self.count >= 1) {
            return Err(DynamicsError::BadBins(format!(
                "{axis} axis needs finite min < max and count ≥ 1"
            )));
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.count)
            .map(|k| self.min + (self.max - self.min) * k as f64 / self.count as f64)
            .collect()
    }

    /// Bin index, with the upper edge included in the last bin.
    fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.min && x <= self.max) {
            return None;
        }
        let k = ((x - self.min) / (self.max - self.min) * self.count as f64) as usize;
        Some(k.min(self.count - 1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DosHistogram {
    pub re_edges: Vec<f64>,
    pub im_edges: Vec<f64>,
    /// Row-major over `(re, im)` bins.
    pub counts: Vec<u64>,
    /// Eigenvalues outside the bin range.
    pub overflow: u64,
    pub realizations: usize,
    pub skipped: usize,
}

impl DosHistogram {
    pub fn count(&self, re_bin: usize, im_bin: usize) -> u64 {
        self.counts[re_bin * (self.im_edges.len() - 1) + im_bin]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histogram of all eigenvalues of disordered Hamiltonians of grid cell
/// `cell`. Eigenvalues outside the bins are tallied in `overflow` only, so
/// `total() + overflow` is `N` times the number of successful realizations.
pub fn complex_dos_cell(
    spec: &ModelSpec,
    dspec: &DisorderSpec,
    realizations: usize,
    re_bins: &Bins,
    im_bins: &Bins,
    cell: (u64, u64),
) -> Result<DosHistogram, DynamicsError> {
    spec.validate()?;
    dspec.validate()?;
    re_bins.check("real")?;
    im_bins.check("imaginary")?;
    if realizations == 0 {
        return Err(DynamicsError::NoRealizations);
    }
    let spectra: Vec<Result<Vec<c64>, DynamicsError>> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(dspec.base_seed, cell.0, cell.1, r);
            let h = build_hamiltonian(spec, &sample_noise_seeded(spec, dspec, seed))?;
            Ok(eigenvalues(&h)?)
        })
        .collect();
    let mut counts = vec![0u64; re_bins.count * im_bins.count];
    let mut overflow = 0;
    let mut skipped = 0;
    let mut done = 0;
    for spectrum in spectra {
        match spectrum {
            Ok(vals) => {
                done += 1;
                for z in vals {
                    match (re_bins.index(z.re), im_bins.index(z.im)) {
                        (Some(i), Some(j)) => counts[i * im_bins.count + j] += 1,
                        _ => overflow += 1,
                    }
                }
            }
            Err(DynamicsError::Linalg(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(DosHistogram {
        re_edges: re_bins.edges(),
        im_edges: im_bins.edges(),
        counts,
        overflow,
        realizations: done,
        skipped,
    })
}

pub fn complex_dos(
    spec: &ModelSpec,
    dspec: &DisorderSpec,
    realizations: usize,
    re_bins: &Bins,
    im_bins: &Bins,
) -> Result<DosHistogram, DynamicsError> {
    complex_dos_cell(spec, dspec, realizations, re_bins, im_bins, (0, 0))
}

#[derive(Debug, Error, PartialEq)]
pub enum TauError {
    #[error("window [{t0}, {t1}] is not inside the time grid")]
    BadWindow { t0: f64, t1: f64 },
    #[error("trace and time grid differ in length")]
    LengthMismatch,
    #[error("coherence does not decay over the window; no finite τ")]
    NoFiniteTau,
}

fn interpolate(trace: &[f64], times: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x < t);
    if k == 0 {
        return trace[0];
    }
    if times[k.min(times.len() - 1)] == t {
        return trace[k];
    }
    let (ta, tb) = (times[k - 1], times[k]);
    let w = (t - ta) / (tb - ta);
    trace[k - 1] + w * (trace[k] - trace[k - 1])
}

/// `τ = ∫_{t0}^{t1} C dt / (C(t0) − C(t1))`, integrating the piecewise-linear
/// interpolant of the sampled trace (the trapezoidal rule on the grid).
pub fn coherence_time_tau(trace: &[f64], times: &[f64], t0: f64, t1: f64) -> Result<f64, TauError> {
    if trace.len() != times.len() || times.is_empty() {
        return Err(TauError::LengthMismatch);
    }
    let (first, last) = (times[0], times[times.len() - 1]);
    if !(t0 < t1 && t0 >= first && t1 <= last) {
        return Err(TauError::BadWindow { t0, t1 });
    }
    let c0 = interpolate(trace, times, t0);
    let c1 = interpolate(trace, times, t1);
    if c0.partial_cmp(&c1) != Some(std::cmp::Ordering::Greater) {
        return Err(TauError::NoFiniteTau);
    }
    let mut nodes = vec![(t0, c0)];
    for (k, &t) in times.iter().enumerate() {
        if t > t0 && t < t1 {
            nodes.push((t, trace[k]));
        }
    }
    nodes.push((t1, c1));
    let integral: f64 = nodes
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok(integral / (c0 - c1))
}
