//! JSON-configured parameter sweeps with CSV and metadata output.
//!
//! Every grid cell is an independent task whose disorder realizations are
//! seeded with `derive_seed(base_seed, i, j, r)`, so the numeric output does
//! not depend on the number of worker threads.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analytics::{
    asymptotic_coherence_dimer, asymptotic_coherence_trimer, phase_boundary_dimer, phase_boundary_trimer,
    signed_inv_loc_length_dimer, signed_inv_loc_length_trimer, trimer_dark_states, AnalyticsError, Branch,
    DimerMuMap, TrimerMuMap, TrimerWidths,
};
use crate::dynamics::{coherence_mean_cell, coherence_time_tau, complex_dos_cell, Bins, TimeGrid};
use crate::model::{ChainKind, DisorderSpec, ModelSpec};
use crate::topology::winding_mean_cell;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Coherence,
    Dos,
    Winding,
    PhaseDiagram,
    Boundary,
    Tau,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Coherence,
        Experiment::Dos,
        Experiment::Winding,
        Experiment::PhaseDiagram,
        Experiment::Boundary,
        Experiment::Tau,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Coherence => "coherence",
            Experiment::Dos => "dos",
            Experiment::Winding => "winding",
            Experiment::PhaseDiagram => "phase-diagram",
            Experiment::Boundary => "boundary",
            Experiment::Tau => "tau",
            Experiment::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid physics input: {0}")]
    Physics(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl SweepError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) | SweepError::Io { .. } => 1,
            SweepError::Physics(_) => 2,
        }
    }
}

fn physics(e: impl fmt::Display) -> SweepError {
    SweepError::Physics(e.to_string())
}

pub const MODEL_PARAMS: [&str; 8] = ["j1", "j2", "j3", "j", "eps_a", "eps_b", "eps_c", "gamma"];
pub const DISORDER_PARAMS: [&str; 5] = ["mu1", "mu2", "mu3", "mu_j", "mu_diag"];

/// One swept parameter: `count` evenly spaced values on `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / (self.count - 1) as f64
                }
            })
            .collect()
    }
}

/// Coefficients applied by the `mu` axis: each half-width becomes `c·μ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuMap {
    #[serde(default)]
    pub mu1: f64,
    #[serde(default)]
    pub mu2: f64,
    #[serde(default)]
    pub mu3: f64,
    #[serde(default)]
    pub mu_j: f64,
    #[serde(default)]
    pub mu_diag: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosBins {
    pub re: Bins,
    pub im: Bins,
}

fn default_realizations() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub model: ModelSpec,
    #[serde(default)]
    pub disorder: DisorderSpec,
    /// Up to two axes; the first is the outer (row-major) index.
    #[serde(default)]
    pub grid: Vec<Axis>,
    #[serde(default)]
    pub mu_map: Option<MuMap>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub times: Option<TimeGrid>,
    #[serde(default)]
    pub trunc_l: Option<usize>,
    #[serde(default)]
    pub bins: Option<DosBins>,
    /// `[t0, t1]` for the coherence time.
    #[serde(default)]
    pub tau_window: Option<[f64; 2]>,
    #[serde(default)]
    pub out: Option<String>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        serde_json::from_str(text).map_err(|e| SweepError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SweepError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the compact JSON serialization, with `out` cleared.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let text = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Settles the experiment between the command line and the file.
    pub fn resolve_experiment(&mut self, cli: Option<Experiment>) -> Result<Experiment, SweepError> {
        let exp = match (cli, self.experiment) {
            (Some(a), Some(b)) if a != b => {
                return Err(SweepError::Config(format!(
                    "command line asks for `{a}` but the config declares `{b}`"
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(SweepError::Config("no experiment given".into())),
        };
        self.experiment = Some(exp);
        Ok(exp)
    }

    fn check(&self, exp: Experiment) -> Result<(), SweepError> {
        let cfg = |m: String| Err(SweepError::Config(m));
        if self.grid.len() > 2 {
            return cfg(format!("at most two grid axes are supported, got {}", self.grid.len()));
        }
        for a in &self.grid {
            let known = a.param == "mu" || MODEL_PARAMS.contains(&a.param.as_str()) || DISORDER_PARAMS.contains(&a.param.as_str());
            if !known {
                return cfg(format!("unknown grid parameter `{}`", a.param));
            }
            if a.count == 0 {
                return cfg(format!("axis `{}` has count 0", a.param));
            }
            if !(a.min.is_finite() && a.max.is_finite()) {
                return cfg(format!("axis `{}` has non-finite bounds", a.param));
            }
            if a.param == "mu" && self.mu_map.is_none() {
                return cfg("the `mu` axis needs a `mu_map`".into());
            }
        }
        if self.grid.len() == 2 && self.grid[0].param == self.grid[1].param {
            return cfg(format!("axis `{}` appears twice", self.grid[0].param));
        }
        if self.realizations == 0 {
            return cfg("realizations must be at least 1".into());
        }
        if let Some(t) = &self.times {
            t.points().map_err(|e| SweepError::Config(format!("times: {e}")))?;
        }
        match exp {
            Experiment::Coherence | Experiment::Tau if self.times.is_none() => {
                return cfg(format!("`{exp}` needs `times`"));
            }
            Experiment::Dos if self.bins.is_none() => return cfg("`dos` needs `bins`".into()),
            Experiment::Tau => {
                let Some([t0, t1]) = self.tau_window else {
                    return cfg("`tau` needs `tau_window`".into());
                };
                let pts = self.times.as_ref().expect("checked above").points().expect("checked above");
                let (first, last) = (pts[0], pts[pts.len() - 1]);
                if !(t0 < t1 && t0 >= first && t1 <= last) {
                    return cfg(format!("tau_window [{t0}, {t1}] must lie inside [{first}, {last}]"));
                }
            }
            Experiment::Boundary => {
                if self.grid.len() != 1 || self.grid[0].param != "mu" {
                    return cfg("`boundary` needs exactly one axis, `mu`".into());
                }
                let a = &self.grid[0];
                if a.min < 0.0 || (a.count > 1 && a.max <= a.min) {
                    return cfg("the `mu` axis must be non-negative and ascending".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn apply_param(spec: &mut ModelSpec, d: &mut DisorderSpec, map: Option<&MuMap>, name: &str, v: f64) {
    match name {
        "j1" => spec.j1 = v,
        "j2" => spec.j2 = v,
        "j3" => spec.j3 = v,
        "j" => spec.j = v,
        "eps_a" => spec.eps_a = v,
        "eps_b" => spec.eps_b = v,
        "eps_c" => spec.eps_c = v,
        "gamma" => spec.gamma = v,
        "mu1" => d.mu1 = v,
        "mu2" => d.mu2 = v,
        "mu3" => d.mu3 = v,
        "mu_j" => d.mu_j = v,
        "mu_diag" => d.mu_diag = v,
        "mu" => {
            let m = map.expect("checked by SweepConfig::check");
            d.mu1 = m.mu1 * v;
            d.mu2 = m.mu2 * v;
            d.mu3 = m.mu3 * v;
            d.mu_j = m.mu_j * v;
            d.mu_diag = m.mu_diag * v;
        }
        _ => unreachable!("checked by SweepConfig::check"),
    }
}

/// One CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    F(f64),
    U(u64),
    S(String),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::F(x) if x.is_nan() => f.write_str("nan"),
            Field::F(x) => write!(f, "{x:?}"),
            Field::U(x) => write!(f, "{x}"),
            Field::S(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisValues {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub experiment: Experiment,
    pub axes: Vec<AxisValues>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Field>>,
    /// `(i, j)` of every cell with a non-zero `flagged` count.
    pub flagged_cells: Vec<[usize; 2]>,
    /// Some realization failed numerically.
    pub numerical_failure: bool,
    /// Per-cell diagnostics for the metadata sidecar.
    pub extra: Value,
}

impl GridResult {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Field::to_string).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.numerical_failure {
            3
        } else {
            0
        }
    }
}

struct Cell {
    index: [usize; 2],
    coords: Vec<f64>,
    spec: ModelSpec,
    disorder: DisorderSpec,
}

struct CellOutput {
    rows: Vec<Vec<Field>>,
    flagged: usize,
    failed: usize,
    extra: Value,
}

fn cells(config: &SweepConfig) -> (Vec<AxisValues>, Vec<Cell>) {
    let axes: Vec<AxisValues> = config
        .grid
        .iter()
        .map(|a| AxisValues {
            param: a.param.clone(),
            values: a.values(),
        })
        .collect();
    let n0 = axes.first().map_or(1, |a| a.values.len());
    let n1 = axes.get(1).map_or(1, |a| a.values.len());
    let mut out = Vec::with_capacity(n0 * n1);
    for i in 0..n0 {
        for j in 0..n1 {
            let mut spec = config.model.clone();
            let mut disorder = config.disorder.clone();
            let mut coords = Vec::new();
            for (a, k) in axes.iter().zip([i, j]) {
                let v = a.values[k];
                apply_param(&mut spec, &mut disorder, config.mu_map.as_ref(), &a.param, v);
                coords.push(v);
            }
            out.push(Cell {
                index: [i, j],
                coords,
                spec,
                disorder,
            });
        }
    }
    (axes, out)
}

fn prefix(cell: &Cell, tail: Vec<Field>) -> Vec<Field> {
    cell.coords.iter().map(|&v| Field::F(v)).chain(tail).collect()
}

/// Flat line `E(1 − x²)` for the dimer when disorder cannot close the gap;
/// the dark-state beat for a clean trimer.
fn asymptote(spec: &ModelSpec, d: &DisorderSpec, times: &[f64]) -> Vec<f64> {
    let nan = vec![f64::NAN; times.len()];
    match spec.kind {
        ChainKind::Dimer => {
            let e = asymptotic_coherence_dimer(spec.j1, spec.j2, d.mu1, d.mu2);
            if e.valid && d.mu_diag == 0.0 {
                vec![e.value; times.len()]
            } else {
                nan
            }
        }
        ChainKind::Trimer => {
            if !d.is_clean() {
                return nan;
            }
            match trimer_dark_states(spec) {
                Ok(p) => asymptotic_coherence_trimer(times, spec.j1, p.a2_plus, p.a2_minus),
                Err(_) => nan,
            }
        }
    }
}

/// Winding predicted by the signs of the edge-mode inverse localization
/// lengths; `NaN` where the closed forms do not apply.
pub fn analytic_winding(spec: &ModelSpec, d: &DisorderSpec) -> f64 {
    let localized = |r: Result<f64, AnalyticsError>| match r {
        Ok(v) if v < 0.0 => Some(1.0),
        Ok(v) if v > 0.0 => Some(0.0),
        Err(AnalyticsError::Divergent) => Some(1.0),
        _ => None,
    };
    if d.mu_diag != 0.0 {
        return f64::NAN;
    }
    match spec.kind {
        ChainKind::Dimer => localized(signed_inv_loc_length_dimer(spec.j1, spec.j2, d.mu1, d.mu2)).unwrap_or(f64::NAN),
        ChainKind::Trimer => {
            if d.mu1 != 0.0 || spec.eps_a != spec.eps_b || spec.j1 == 0.0 {
                return f64::NAN;
            }
            let widths = TrimerWidths {
                mu_j: d.mu_j,
                mu2: d.mu2,
                mu3: d.mu3,
            };
            Branch::BOTH
                .iter()
                .map(|&b| localized(signed_inv_loc_length_trimer(spec.j, spec.j2, spec.j3, widths, b)))
                .sum::<Option<f64>>()
                .unwrap_or(f64::NAN)
        }
    }
}

fn run_cell(config: &SweepConfig, exp: Experiment, cell: &Cell, times: &[f64]) -> Result<CellOutput, SweepError> {
    let (i, j) = (cell.index[0] as u64, cell.index[1] as u64);
    let r = config.realizations;
    match exp {
        Experiment::Coherence => {
            let tr = coherence_mean_cell(&cell.spec, &cell.disorder, r, times, (i, j)).map_err(physics)?;
            let asym = asymptote(&cell.spec, &cell.disorder, times);
            let rows = (0..times.len())
                .map(|k| {
                    prefix(
                        cell,
                        vec![
                            Field::F(times[k]),
                            Field::F(tr.mean[k]),
                            Field::F(tr.stderr[k]),
                            Field::F(asym[k]),
                            Field::U(tr.failed as u64),
                        ],
                    )
                })
                .collect();
            Ok(CellOutput {
                rows,
                flagged: tr.failed,
                failed: tr.failed,
                extra: json!({
                    "tail_mean": tr.tail.mean,
                    "tail_stderr": tr.tail.stderr,
                    "realizations": tr.realizations,
                    "expm_fallbacks": tr.expm_fallbacks,
                }),
            })
        }
        Experiment::Dos => {
            let bins = config.bins.as_ref().expect("checked by SweepConfig::check");
            let h = complex_dos_cell(&cell.spec, &cell.disorder, r, &bins.re, &bins.im, (i, j)).map_err(physics)?;
            let mut rows = Vec::with_capacity(bins.re.count * bins.im.count);
            for a in 0..bins.re.count {
                for b in 0..bins.im.count {
                    rows.push(prefix(
                        cell,
                        vec![
                            Field::F(h.re_edges[a]),
                            Field::F(h.re_edges[a + 1]),
                            Field::F(h.im_edges[b]),
                            Field::F(h.im_edges[b + 1]),
                            Field::U(h.count(a, b)),
                            Field::U(h.skipped as u64),
                        ],
                    ));
                }
            }
            Ok(CellOutput {
                rows,
                flagged: h.skipped,
                failed: h.skipped,
                extra: json!({ "overflow": h.overflow, "realizations": h.realizations }),
            })
        }
        Experiment::Winding | Experiment::PhaseDiagram => {
            let s = winding_mean_cell(&cell.spec, &cell.disorder, r, config.trunc_l, (i, j)).map_err(physics)?;
            let flagged = s.flagged + s.failed;
            let mut tail = vec![Field::F(s.w.mean), Field::F(s.w.stderr)];
            if exp == Experiment::PhaseDiagram {
                tail.push(Field::F(analytic_winding(&cell.spec, &cell.disorder)));
            }
            tail.push(Field::U(flagged as u64));
            Ok(CellOutput {
                rows: vec![prefix(cell, tail)],
                flagged,
                failed: s.failed,
                extra: json!({ "degenerate": s.flagged, "failed": s.failed }),
            })
        }
        Experiment::Tau => {
            let [t0, t1] = config.tau_window.expect("checked by SweepConfig::check");
            let tr = coherence_mean_cell(&cell.spec, &cell.disorder, r, times, (i, j)).map_err(physics)?;
            let tau = coherence_time_tau(&tr.mean, times, t0, t1).unwrap_or(f64::NAN);
            Ok(CellOutput {
                rows: vec![prefix(
                    cell,
                    vec![
                        Field::F(tau),
                        Field::F(tr.tail.mean),
                        Field::F(tr.tail.stderr),
                        Field::U(tr.failed as u64),
                    ],
                )],
                flagged: tr.failed,
                failed: tr.failed,
                extra: json!({ "expm_fallbacks": tr.expm_fallbacks }),
            })
        }
        Experiment::Boundary | Experiment::Validate => unreachable!("not a per-cell experiment"),
    }
}

fn columns(exp: Experiment) -> &'static [&'static str] {
    match exp {
        Experiment::Coherence => &["t", "c_mean", "c_stderr", "asymptote", "flagged"],
        Experiment::Dos => &["re_lo", "re_hi", "im_lo", "im_hi", "count", "flagged"],
        Experiment::Winding => &["w_mean", "w_stderr", "flagged"],
        Experiment::PhaseDiagram => &["w_mean", "w_stderr", "w_analytic", "flagged"],
        Experiment::Tau => &["tau", "c_tail", "c_tail_stderr", "flagged"],
        Experiment::Boundary => &["mu", "branch", "critical"],
        Experiment::Validate => &["check", "n_sites", "realization", "value", "limit", "pass"],
    }
}

fn precheck(exp: Experiment, config: &SweepConfig, cell: &Cell) -> Result<(), SweepError> {
    cell.spec.validate().map_err(physics)?;
    cell.disorder.validate().map_err(physics)?;
    if matches!(exp, Experiment::Winding | Experiment::PhaseDiagram) {
        cell.spec.cells().map_err(physics)?;
        if cell.disorder.mu_diag != 0.0 {
            return Err(physics(crate::topology::TopologyError::DiagonalDisorder));
        }
        if cell.spec.kind == ChainKind::Trimer && cell.disorder.mu1 != 0.0 {
            return Err(physics(crate::topology::TopologyError::DisorderedJ1));
        }
        if let Some(l) = config.trunc_l {
            let m = cell.spec.cells().map_err(physics)?;
            if 2 * l >= m {
                return Err(physics(crate::topology::TopologyError::Truncation { trunc_l: l, cells: m }));
            }
        }
    }
    Ok(())
}

fn compute_grid(config: &SweepConfig, exp: Experiment) -> Result<GridResult, SweepError> {
    let (axes, cells) = cells(config);
    for c in &cells {
        precheck(exp, config, c)?;
    }
    let times = match &config.times {
        Some(t) => t.points().map_err(|e| SweepError::Config(e.to_string()))?,
        None => Vec::new(),
    };
    let outputs: Vec<Result<CellOutput, SweepError>> =
        cells.par_iter().map(|c| run_cell(config, exp, c, &times)).collect();
    let mut header: Vec<String> = axes.iter().map(|a| a.param.clone()).collect();
    header.extend(columns(exp).iter().map(|s| s.to_string()));
    let mut rows = Vec::new();
    let mut flagged_cells = Vec::new();
    let mut numerical_failure = false;
    let mut extra = Vec::with_capacity(cells.len());
    for (c, out) in cells.iter().zip(outputs) {
        let out = out?;
        if out.flagged > 0 {
            flagged_cells.push(c.index);
        }
        numerical_failure |= out.failed > 0;
        rows.extend(out.rows);
        extra.push(json!({ "cell": c.index, "coords": c.coords, "diagnostics": out.extra }));
    }
    Ok(GridResult {
        experiment: exp,
        axes,
        header,
        rows,
        flagged_cells,
        numerical_failure,
        extra: Value::Array(extra),
    })
}

fn compute_boundary(config: &SweepConfig) -> Result<GridResult, SweepError> {
    let axis = &config.grid[0];
    let mu = axis.values();
    let map = config.mu_map.clone().expect("checked by SweepConfig::check");
    let spec = &config.model;
    let mut contours = Vec::new();
    match spec.kind {
        ChainKind::Dimer => {
            let m = DimerMuMap { c1: map.mu1, c2: map.mu2 };
            contours.push(("dimer", phase_boundary_dimer(spec.j2, m, &mu).map_err(physics)?));
        }
        ChainKind::Trimer => {
            let m = TrimerMuMap {
                c_j: map.mu_j,
                c2: map.mu2,
                c3: map.mu3,
            };
            for b in Branch::BOTH {
                contours.push((b.label(), phase_boundary_trimer(spec.j2, spec.j3, m, &mu, b).map_err(physics)?));
            }
        }
    }
    let mut rows = Vec::new();
    for (k, &m) in mu.iter().enumerate() {
        for (label, c) in &contours {
            if c.roots[k].is_empty() {
                rows.push(vec![Field::F(m), Field::S(label.to_string()), Field::F(f64::NAN)]);
            }
            for &root in &c.roots[k] {
                rows.push(vec![Field::F(m), Field::S(label.to_string()), Field::F(root)]);
            }
        }
    }
    Ok(GridResult {
        experiment: Experiment::Boundary,
        axes: vec![AxisValues {
            param: "mu".into(),
            values: mu,
        }],
        header: columns(Experiment::Boundary).iter().map(|s| s.to_string()).collect(),
        rows,
        flagged_cells: Vec::new(),
        numerical_failure: false,
        extra: json!({ "j2": spec.j2, "j3": spec.j3, "kind": spec.kind }),
    })
}

/// Computes the experiment in a pool of `workers` threads (all cores when
/// `None`). No files are written.
pub fn compute(config: &SweepConfig, exp: Experiment, workers: Option<usize>) -> Result<GridResult, SweepError> {
    config.check(exp)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        if k == 0 {
            return Err(SweepError::Config("workers must be at least 1".into()));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| SweepError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match exp {
        Experiment::Boundary => compute_boundary(config),
        Experiment::Validate => crate::validate::run_suite(config),
        _ => compute_grid(config, exp),
    })
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub experiment: Option<Experiment>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub exit_code: i32,
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    pub result: GridResult,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<(), SweepError> {
    let io = |source| SweepError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

/// Runs one experiment and writes `<prefix>.csv` and `<prefix>.meta.json`.
/// The output prefix is `opts.out`, else the config's `out`, else the
/// experiment name.
pub fn run(mut config: SweepConfig, opts: &RunOptions) -> Result<RunReport, SweepError> {
    let exp = config.resolve_experiment(opts.experiment)?;
    if let Some(s) = opts.seed {
        config.disorder.base_seed = s;
    }
    let prefix = opts
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(exp.name()));
    let started = Instant::now();
    let result = compute(&config, exp, opts.workers)?;
    let wall = started.elapsed().as_secs_f64();
    let exit_code = result.exit_code();
    let meta = json!({
        "experiment": exp.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.disorder.base_seed,
        "config_hash": config.hash(),
        "workers": opts.workers.unwrap_or_else(rayon::current_num_threads),
        "wall_time_s": wall,
        "realizations": config.realizations,
        "axes": result.axes,
        "columns": result.header,
        "flagged_cells": result.flagged_cells,
        "exit_code": exit_code,
        "config": config,
        "cells": result.extra,
    });
    let csv_path = with_suffix(&prefix, ".csv");
    let meta_path = with_suffix(&prefix, ".meta.json");
    write_file(&csv_path, &result.to_csv())?;
    write_file(
        &meta_path,
        &(serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"),
    )?;
    Ok(RunReport {
        exit_code,
        csv_path,
        meta_path,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimer_config(exp: &str) -> SweepConfig {
        SweepConfig::from_json(&format!(
            r#"{{"experiment": "{exp}",
                "model": {{"kind": "dimer", "n_sites": 20, "j1": 0.5, "j2": 1.0, "gamma": 0.5}},
                "grid": [{{"param": "j1", "min": 0.2, "max": 1.8, "count": 3}}],
                "realizations": 2}}"#
        ))
        .unwrap()
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let a = Axis {
            param: "j1".into(),
            min: 0.0,
            max: 3.0,
            count: 61,
        };
        let v = a.values();
        assert_eq!(v.len(), 61);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[60], 3.0);
        assert!((v[20] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::parse(e.name()), Some(e));
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
        assert_eq!(Experiment::parse("phase_diagram"), None);
    }

    #[test]
    fn unknown_parameter_is_a_config_error() {
        let mut c = dimer_config("winding");
        c.grid[0].param = "j7".into();
        let e = compute(&c, Experiment::Winding, Some(1)).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let e = SweepConfig::from_json(r#"{"model": {"kind": "dimer", "n_sites": 4, "j1": 1, "j2": 1, "gamma": 0}, "realisations": 3}"#)
            .unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn disordered_j1_in_trimer_winding_is_a_physics_error() {
        let c = SweepConfig::from_json(
            r#"{"model": {"kind": "trimer", "n_sites": 30, "j1": 1, "j2": 2, "j3": 3, "j": 0, "gamma": 0.5},
                "disorder": {"mu1": 0.5}}"#,
        )
        .unwrap();
        let e = compute(&c, Experiment::Winding, Some(1)).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
    }

    #[test]
    fn experiment_mismatch_is_rejected() {
        let mut c = dimer_config("winding");
        assert!(c.resolve_experiment(Some(Experiment::Dos)).is_err());
        assert_eq!(c.resolve_experiment(Some(Experiment::Winding)).unwrap(), Experiment::Winding);
    }

    #[test]
    fn winding_rows_are_row_major() {
        let r = compute(&dimer_config("winding"), Experiment::Winding, Some(1)).unwrap();
        assert_eq!(r.header, ["j1", "w_mean", "w_stderr", "flagged"]);
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[0][0], Field::F(0.2));
        assert!(matches!(r.rows[0][1], Field::F(w) if (w - 1.0).abs() < 0.05));
        assert!(matches!(r.rows[2][1], Field::F(w) if w.abs() < 0.05));
    }

    #[test]
    fn hash_ignores_output_prefix() {
        let a = dimer_config("winding");
        let mut b = a.clone();
        b.out = Some("elsewhere/run".into());
        assert_eq!(a.hash(), b.hash());
        b.realizations += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn analytic_winding_clean_limits() {
        let d = DisorderSpec::clean();
        assert_eq!(analytic_winding(&ModelSpec::dimer(10, 0.5, 1.0, 0.5), &d), 1.0);
        assert_eq!(analytic_winding(&ModelSpec::dimer(10, 1.5, 1.0, 0.5), &d), 0.0);
        let t = ModelSpec::trimer(30, 1.0, 2.0, 3.5, 1.0, 0.5);
        assert_eq!(analytic_winding(&t, &d), 2.0);
    }
}
