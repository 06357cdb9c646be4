//! Adaptive classical Runge–Kutta integration with step doubling.

use faer::c64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("output times must be finite and ascending from the start time")]
    BadTimes,
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct Rk4Options {
    /// Absolute local error allowed per step, estimated by step doubling.
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy(y: &[c64], h: f64, k: &[c64], out: &mut [c64]) {
    for ((o, &a), &b) in out.iter_mut().zip(y).zip(k) {
        *o = a + b * h;
    }
}

fn rk4_step<F>(f: &F, t: f64, y: &[c64], h: f64, scratch: &mut [Vec<c64>; 5]) -> Vec<c64>
where
    F: Fn(f64, &[c64], &mut [c64]),
{
    let [k1, k2, k3, k4, tmp] = scratch;
    f(t, y, k1);
    axpy(y, 0.5 * h, k1, tmp);
    f(t + 0.5 * h, tmp, k2);
    axpy(y, 0.5 * h, k2, tmp);
    f(t + 0.5 * h, tmp, k3);
    axpy(y, h, k3, tmp);
    f(t + h, tmp, k4);
    y.iter()
        .enumerate()
        .map(|(i, &yi)| yi + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
        .collect()
}

/// Integrates `y' = f(t, y)` from `t0` and returns the state at every
/// output time. Each step compares one step of size `h` with two of size
/// `h/2`; the difference over 15 estimates the local error, and the
/// accepted state is the Richardson-extrapolated combination.
pub fn integrate<F>(
    f: F,
    t0: f64,
    y0: &[c64],
    times: &[f64],
    opts: Rk4Options,
) -> Result<(Vec<Vec<c64>>, OdeStats), OdeError>
where
    F: Fn(f64, &[c64], &mut [c64]),
{
    if times.iter().any(|t| !t.is_finite())
        || times.first().is_some_and(|&t| t < t0)
        || times.windows(2).any(|w| w[0] > w[1])
    {
        return Err(OdeError::BadTimes);
    }
    let n = y0.len();
    let zero = c64::new(0.0, 0.0);
    let mut scratch: [Vec<c64>; 5] = std::array::from_fn(|_| vec![zero; n]);
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut h = opts.h_init;
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let remaining = target - t;
            let step = h.min(remaining).min(opts.h_max);
            let full = rk4_step(&f, t, &y, step, &mut scratch);
            let half = rk4_step(&f, t, &y, 0.5 * step, &mut scratch);
            let two = rk4_step(&f, t + 0.5 * step, &half, 0.5 * step, &mut scratch);
            let err = two
                .iter()
                .zip(&full)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / 15.0;
            if !err.is_finite() {
                return Err(OdeError::NonFinite { t });
            }
            if err <= opts.tol {
                for ((yi, &a), &b) in y.iter_mut().zip(&two).zip(&full) {
                    *yi = a + (a - b) / 15.0;
                }
                t = if step == remaining { target } else { t + step };
                stats.accepted += 1;
            } else {
                stats.rejected += 1;
            }
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * (opts.tol / err).powf(0.2)).clamp(0.1, 4.0)
            };
            // Do not let a short final step before an output time shrink h.
            if err > opts.tol || step == h {
                h = step * factor;
            }
            if h < opts.h_min {
                return Err(OdeError::StepUnderflow { t, h });
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
