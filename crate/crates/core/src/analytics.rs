//! Closed-form predictions: disorder-averaged inverse localization lengths,
//! phase-boundary contours, asymptotic coherence and exact trimer dark
//! states.

use faer::c64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{clean_hamiltonian, ChainKind, ModelError, ModelSpec};
use crate::topology::{branch_rotation, TopologyError};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("expectation of ln|x| diverges: the argument vanishes identically")]
    Divergent,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

fn check_width(name: &str, mu: f64) -> Result<(), AnalyticsError> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(AnalyticsError::InvalidInput(format!(
            "{name} must be finite and non-negative, got {mu}"
        )));
    }
    Ok(())
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

fn x2logx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x * x.abs().ln()
    }
}

/// Below this `μ/|J|` the series in `μ/J` replaces the closed form.
const SERIES_RATIO: f64 = 1e-4;

/// `E ln|J + μω|` for `ω` uniform on `[-1, 1]`:
/// `[(J+μ)ln|J+μ| − (J−μ)ln|J−μ|]/(2μ) − 1`, and `ln|J|` at `μ = 0`.
pub fn expected_log_abs_uniform(j: f64, mu: f64) -> Result<f64, AnalyticsError> {
    check_width("mu", mu)?;
    if !j.is_finite() {
        return Err(AnalyticsError::InvalidInput(format!("J must be finite, got {j}")));
    }
    if mu == 0.0 {
        if j == 0.0 {
            return Err(AnalyticsError::Divergent);
        }
        return Ok(j.abs().ln());
    }
    let ratio = mu / j.abs();
    if ratio < SERIES_RATIO {
        let e2 = ratio * ratio;
        return Ok(j.abs().ln() - e2 / 6.0 - e2 * e2 / 20.0);
    }
    Ok((xlogx(j + mu) - xlogx(j - mu)) / (2.0 * mu) - 1.0)
}

const GAUSS_LEGENDRE_16: [(f64, f64); 8] = [
    (0.09501250983763745, 0.18945061045506859),
    (0.2816035507792589, 0.1826034150449236),
    (0.45801677765722737, 0.16915651939500262),
    (0.6178762444026438, 0.14959598881657676),
    (0.755404408355003, 0.12462897125553403),
    (0.8656312023878318, 0.09515851168249259),
    (0.9445750230732326, 0.062253523938647706),
    (0.9894009349916499, 0.027152459411754037),
];

/// `E ln|s + aω + bω′|` for independent `ω, ω′` uniform on `[-1, 1]`:
/// `[G(s+a+b) − G(s+a−b) − G(s−a+b) + G(s−a−b)]/(8ab) − 3/2` with
/// `G(x) = x² ln|x|`.
///
/// When one width is tiny next to the other scales, the one-variable form is
/// averaged over the small variable by Gauss–Legendre quadrature instead.
pub fn expected_log_abs_uniform2(s: f64, a: f64, b: f64) -> Result<f64, AnalyticsError> {
    check_width("a", a)?;
    check_width("b", b)?;
    if !s.is_finite() {
        return Err(AnalyticsError::InvalidInput(format!("s must be finite, got {s}")));
    }
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if small == 0.0 {
        return expected_log_abs_uniform(s, big);
    }
    if small <= SERIES_RATIO * (s.abs() + big) {
        let mut acc = 0.0;
        for &(x, w) in &GAUSS_LEGENDRE_16 {
            acc += w * (expected_log_abs_uniform(s + small * x, big)?
                + expected_log_abs_uniform(s - small * x, big)?);
        }
        return Ok(0.5 * acc);
    }
    let g = x2logx(s + a + b) - x2logx(s + a - b) - x2logx(s - a + b) + x2logx(s - a - b);
    Ok(g / (8.0 * a * b) - 1.5)
}

/// `E ln|J1 + μ1ω| − E ln|J2 + μ2ω′|`. Negative inside the topological phase.
pub fn signed_inv_loc_length_dimer(j1: f64, j2: f64, mu1: f64, mu2: f64) -> Result<f64, AnalyticsError> {
    Ok(expected_log_abs_uniform(j1, mu1)? - expected_log_abs_uniform(j2, mu2)?)
}

/// Inverse localization length of the dimer edge mode.
pub fn inv_loc_length_dimer(j1: f64, j2: f64, mu1: f64, mu2: f64) -> Result<f64, AnalyticsError> {
    Ok(signed_inv_loc_length_dimer(j1, j2, mu1, mu2)?.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

/// Disorder widths of the trimer bond families entering the edge modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimerWidths {
    pub mu_j: f64,
    pub mu2: f64,
    pub mu3: f64,
}

/// `E ln|(J + μ_J ω) ± (J2 + μ2 ω′)| − E ln|J3 + μ3 ω″|` for equal on-site
/// energies on A and B. Negative when the branch's edge mode is localized.
pub fn signed_inv_loc_length_trimer(
    j: f64,
    j2: f64,
    j3: f64,
    widths: TrimerWidths,
    branch: Branch,
) -> Result<f64, AnalyticsError> {
    // ±μ2ω′ has the same law as μ2ω′.
    let s = j + branch.sign() * j2;
    Ok(expected_log_abs_uniform2(s, widths.mu_j, widths.mu2)?
        - expected_log_abs_uniform(j3, widths.mu3)?)
}

pub fn inv_loc_length_trimer(
    j: f64,
    j2: f64,
    j3: f64,
    widths: TrimerWidths,
    branch: Branch,
) -> Result<f64, AnalyticsError> {
    Ok(signed_inv_loc_length_trimer(j, j2, j3, widths, branch)?.abs())
}

/// Linear map from a sweep strength `μ` to the dimer widths
/// `(μ1, μ2) = (c1·μ, c2·μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerMuMap {
    pub c1: f64,
    pub c2: f64,
}

impl DimerMuMap {
    pub const ISOTROPIC: Self = Self { c1: 1.0, c2: 1.0 };

    pub fn widths(&self, mu: f64) -> (f64, f64) {
        (self.c1 * mu, self.c2 * mu)
    }
}

/// `(μ_J, μ2, μ3) = (c_j·μ, c2·μ, c3·μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimerMuMap {
    pub c_j: f64,
    pub c2: f64,
    pub c3: f64,
}

impl TrimerMuMap {
    pub fn widths(&self, mu: f64) -> TrimerWidths {
        TrimerWidths {
            mu_j: self.c_j * mu,
            mu2: self.c2 * mu,
            mu3: self.c3 * mu,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryContour {
    pub mu_values: Vec<f64>,
    /// Smallest root per `μ`, `None` when the bracket holds no sign change.
    pub critical: Vec<Option<f64>>,
    /// All roots per `μ`, ascending.
    pub roots: Vec<Vec<f64>>,
}

pub const ROOT_TOL: f64 = 1e-8;

fn bisect(
    f: &dyn Fn(f64) -> Result<f64, AnalyticsError>,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
) -> Result<f64, AnalyticsError> {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_grid(mu_grid: &[f64]) -> Result<(), AnalyticsError> {
    if mu_grid.iter().any(|m| !(m.is_finite() && *m >= 0.0)) || mu_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalyticsError::InvalidInput(
            "mu grid must be non-negative and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Critical `J1*` per `μ`: root of the signed dimer inverse localization
/// length on `(1e-6, max(5|J2|, |J2| + μ1 + μ2)]`, bisected to `ROOT_TOL`.
pub fn phase_boundary_dimer(j2: f64, map: DimerMuMap, mu_grid: &[f64]) -> Result<BoundaryContour, AnalyticsError> {
    check_grid(mu_grid)?;
    if j2 == 0.0 || !j2.is_finite() {
        return Err(AnalyticsError::InvalidInput(format!("J2 must be finite and nonzero, got {j2}")));
    }
    let mut critical = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let (mu1, mu2) = map.widths(mu);
        check_width("mu1", mu1)?;
        check_width("mu2", mu2)?;
        let target = expected_log_abs_uniform(j2, mu2)?;
        let f = |j1: f64| Ok(expected_log_abs_uniform(j1, mu1)? - target);
        let lo = 1e-6;
        let hi = (5.0 * j2.abs()).max(j2.abs() + mu1 + mu2);
        let (flo, fhi) = (f(lo)?, f(hi)?);
        critical.push(if flo == 0.0 {
            Some(lo)
        } else if (flo < 0.0) != (fhi < 0.0) || fhi == 0.0 {
            Some(bisect(&f, lo, hi, flo)?)
        } else {
            None
        });
    }
    let roots = critical.iter().map(|c| c.iter().copied().collect()).collect();
    Ok(BoundaryContour {
        mu_values: mu_grid.to_vec(),
        critical,
        roots,
    })
}

const TRIMER_SCAN_INTERVALS: usize = 400;

/// Critical intra-cell couplings `J*` per `μ` for one branch: every sign
/// change of the signed branch inverse localization length on
/// `[0, max(5·max(|J2|, |J3|), |J2| + |J3| + μ_J + μ2 + μ3)]`, located on a
/// uniform scan and bisected to `ROOT_TOL`.
pub fn phase_boundary_trimer(
    j2: f64,
    j3: f64,
    map: TrimerMuMap,
    mu_grid: &[f64],
    branch: Branch,
) -> Result<BoundaryContour, AnalyticsError> {
    check_grid(mu_grid)?;
    let mut roots = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let w = map.widths(mu);
        check_width("mu_j", w.mu_j)?;
        check_width("mu2", w.mu2)?;
        check_width("mu3", w.mu3)?;
        let target = expected_log_abs_uniform(j3, w.mu3)?;
        // A clean argument that vanishes exactly sends ln|·| to −∞.
        let f = |j: f64| match expected_log_abs_uniform2(j + branch.sign() * j2, w.mu_j, w.mu2) {
            Ok(v) => Ok(v - target),
            Err(AnalyticsError::Divergent) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        };
        let hi = (5.0 * j2.abs().max(j3.abs())).max(j2.abs() + j3.abs() + w.mu_j + w.mu2 + w.mu3);
        let mut found = Vec::new();
        let mut x0 = 0.0;
        let mut f0 = f(x0)?;
        if f0 == 0.0 {
            found.push(0.0);
        }
        for k in 1..=TRIMER_SCAN_INTERVALS {
            let x1 = hi * k as f64 / TRIMER_SCAN_INTERVALS as f64;
            let f1 = f(x1)?;
            if f1 == 0.0 {
                found.push(x1);
            } else if f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
                found.push(bisect(&f, x0, x1, f0)?);
            }
            x0 = x1;
            f0 = f1;
        }
        roots.push(found);
    }
    let critical = roots.iter().map(|r: &Vec<f64>| r.first().copied()).collect();
    Ok(BoundaryContour {
        mu_values: mu_grid.to_vec(),
        critical,
        roots,
    })
}

/// `J2·exp((μ1² − μ2²)/(6J2²))`: the weak-disorder boundary to leading order.
pub fn weak_disorder_boundary_explicit(j2: f64, mu1: f64, mu2: f64) -> f64 {
    j2.abs() * ((mu1 * mu1 - mu2 * mu2) / (6.0 * j2 * j2)).exp()
}

/// Root in `J1 > 0` of `ln J1 − μ1²/(6J1²) = ln|J2| − μ2²/(6J2²)`.
pub fn weak_disorder_boundary(j2: f64, mu1: f64, mu2: f64) -> Result<f64, AnalyticsError> {
    if j2 == 0.0 || !j2.is_finite() {
        return Err(AnalyticsError::InvalidInput(format!("J2 must be finite and nonzero, got {j2}")));
    }
    let rhs = j2.abs().ln() - mu2 * mu2 / (6.0 * j2 * j2);
    let g = |x: f64| Ok(x.ln() - mu1 * mu1 / (6.0 * x * x) - rhs);
    let lo = 1e-6 * j2.abs();
    let mut hi = 2.0 * j2.abs();
    while g(hi)? < 0.0 {
        hi *= 2.0;
    }
    let flo = g(lo)?;
    if flo >= 0.0 {
        return Ok(lo);
    }
    bisect(&g, lo, hi, flo)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub value: f64,
    /// `μ1 + μ2 < |J2| − |J1|`: disorder cannot change the phase.
    pub valid: bool,
}

/// `E(1 − x²) = 1 − (3J1² + μ1²)/(3J2² − 3μ2²)` with `x = J1/J2`.
pub fn asymptotic_coherence_dimer(j1: f64, j2: f64, mu1: f64, mu2: f64) -> AsymptoticEstimate {
    let value = 1.0 - (3.0 * j1 * j1 + mu1 * mu1) / (3.0 * j2 * j2 - 3.0 * mu2 * mu2);
    AsymptoticEstimate {
        value,
        valid: mu1 + mu2 < j2.abs() - j1.abs(),
    }
}

/// The two exact dark states of a clean trimer chain with `N mod 3 = 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DarkStatePair {
    pub v_plus: Vec<c64>,
    pub v_minus: Vec<c64>,
    pub energy_plus: f64,
    pub energy_minus: f64,
    /// Per-cell amplitude ratios `|(J + J2 tan(φ/2))/J3|` and
    /// `|(J − J2 cot(φ/2))/J3|`.
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// Weight `|v(1)|²` of each normalized state on the first site.
    pub a2_plus: f64,
    pub a2_minus: f64,
    /// `‖H v − E v‖` with the full dissipative `H`.
    pub residual_plus: f64,
    pub residual_minus: f64,
}

struct DarkState {
    v: Vec<c64>,
    delta: f64,
    a2: f64,
}

/// State with `(A_k, B_k, C_k) = r^k (e_A, e_B, 0)` for `k = 0..cells`,
/// normalized, with `r = −(J e_A + J2 e_B)/(J3 e_A)`.
fn dark_state(spec: &ModelSpec, e: [f64; 2], cells: usize) -> DarkState {
    let r = -(spec.j * e[0] + spec.j2 * e[1]) / (spec.j3 * e[0]);
    let delta = r.abs();
    // Amplitudes relative to the largest cell avoid overflow for δ ≫ 1.
    let (ln_d, shift) = if delta > 1.0 {
        (delta.ln(), (cells - 1) as f64 * delta.ln())
    } else {
        (delta.ln(), 0.0)
    };
    let amp = |k: usize| -> f64 {
        if delta == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let sign = if r < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        sign * (k as f64 * ln_d - shift).exp()
    };
    let mut v = vec![c64::new(0.0, 0.0); spec.n_sites];
    let mut norm2 = 0.0;
    for k in 0..cells {
        let a = amp(k);
        v[3 * k] = c64::new(a * e[0], 0.0);
        v[3 * k + 1] = c64::new(a * e[1], 0.0);
        norm2 += a * a * (e[0] * e[0] + e[1] * e[1]);
    }
    let norm = norm2.sqrt();
    for x in &mut v {
        *x /= norm;
    }
    let a2 = v[0].norm_sqr();
    DarkState { v, delta, a2 }
}

/// Closed-form normalization `|v(1)|² = e_A²/Σ_{k<K} δ^{2k}` for `K` cells, with
/// the `δ = 1` limit `e_A²/K`.
pub fn dark_state_weight(e_a: f64, delta: f64, cells: usize) -> f64 {
    let d2 = delta * delta;
    let sum = if (d2 - 1.0).abs() < 1e-12 {
        cells as f64
    } else {
        (1.0 - d2.powi(cells as i32)) / (1.0 - d2)
    };
    e_a * e_a / sum
}

pub fn trimer_dark_states(spec: &ModelSpec) -> Result<DarkStatePair, AnalyticsError> {
    spec.validate()?;
    if spec.kind != ChainKind::Trimer {
        return Err(AnalyticsError::InvalidInput("dark states need a trimer chain".into()));
    }
    if spec.n_sites % 3 != 2 {
        return Err(AnalyticsError::InvalidInput(format!(
            "dark states need N mod 3 = 2, got N = {}",
            spec.n_sites
        )));
    }
    if spec.j3 == 0.0 {
        return Err(AnalyticsError::InvalidInput("J3 must be nonzero".into()));
    }
    let (e_plus, e_minus) = branch_rotation(spec.j1, spec.eps_a, spec.eps_b)?;
    let centre = 0.5 * (spec.eps_a + spec.eps_b);
    let split = (spec.j1 * spec.j1 + 0.25 * (spec.eps_a - spec.eps_b).powi(2)).sqrt();
    let (energy_plus, energy_minus) = (centre + split, centre - split);
    let cells = (spec.n_sites + 1) / 3;
    // e_A vanishes only for J1 = 0 with ε_A < ε_B, where the state is not
    // anchored on the first site.
    if e_plus[0] == 0.0 || e_minus[0] == 0.0 {
        return Err(AnalyticsError::InvalidInput(
            "branch rotation leaves no weight on the A sublattice".into(),
        ));
    }
    let plus = dark_state(spec, e_plus, cells);
    let minus = dark_state(spec, e_minus, cells);
    let h = clean_hamiltonian(spec)?;
    let residual = |v: &[c64], e: f64| {
        h.apply(v)
            .iter()
            .zip(v)
            .map(|(hv, x)| (hv - x * e).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    Ok(DarkStatePair {
        residual_plus: residual(&plus.v, energy_plus),
        residual_minus: residual(&minus.v, energy_minus),
        v_plus: plus.v,
        v_minus: minus.v,
        energy_plus,
        energy_minus,
        delta_plus: plus.delta,
        delta_minus: minus.delta,
        a2_plus: plus.a2,
        a2_minus: minus.a2,
    })
}

/// `|A₊² e^{−iJ1t} + A₋² e^{iJ1t}| = sqrt(A₊⁴ + A₋⁴ + 2A₊²A₋² cos 2J1t)`.
pub fn asymptotic_coherence_trimer(times: &[f64], j1: f64, a2_plus: f64, a2_minus: f64) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            (a2_plus * a2_plus + a2_minus * a2_minus + 2.0 * a2_plus * a2_minus * (2.0 * j1 * t).cos())
                .max(0.0)
                .sqrt()
        })
        .collect()
}
