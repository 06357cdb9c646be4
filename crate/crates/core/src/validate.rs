//! Self-check run by the `validate` experiment: master-equation agreement
//! on small chains plus a handful of invariants.

use std::collections::HashSet;

use serde_json::json;

use crate::dynamics::{complex_dos, Bins, TimeGrid};
use crate::lindblad::evolve_and_compare;
use crate::model::{sample_noise_seeded, BondNoise, ChainKind, DisorderSpec, ModelSpec};
use crate::seed::derive_seed;
use crate::sweep::{Experiment, Field, GridResult, SweepConfig, SweepError};
use crate::topology::{winding_clean_dimer, winding_clean_trimer, winding_real_space};

pub const ORACLE_LIMIT: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-10;

/// One line of the report. A check passes when `value ≤ limit`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub n_sites: usize,
    pub realization: Option<u64>,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }
}

fn oracle_sizes(kind: ChainKind) -> &'static [usize] {
    match kind {
        ChainKind::Dimer => &[2, 4, 6],
        ChainKind::Trimer => &[3, 5, 6],
    }
}

fn oracle_checks(config: &SweepConfig, times: &[f64]) -> Result<Vec<Check>, SweepError> {
    let mut out = Vec::new();
    for &n in oracle_sizes(config.model.kind) {
        let spec = ModelSpec {
            n_sites: n,
            ..config.model.clone()
        };
        let mut cases = vec![(None, BondNoise::zeros(&spec))];
        if !config.disorder.is_clean() {
            let seed = derive_seed(config.disorder.base_seed, n as u64, 0, 0);
            cases.push((Some(0), sample_noise_seeded(&spec, &config.disorder, seed)));
        }
        for (realization, noise) in cases {
            let r = evolve_and_compare(&spec, &noise, times, ORACLE_TOL)
                .map_err(|e| SweepError::Physics(e.to_string()))?;
            let mk = |name, value, limit| Check {
                name,
                n_sites: n,
                realization,
                value,
                limit,
            };
            out.push(mk("oracle_deviation", r.max_deviation, ORACLE_LIMIT));
            out.push(mk("trace_error", r.max_trace_error, ORACLE_LIMIT));
            out.push(mk("hermiticity_defect", r.max_hermiticity_defect, ORACLE_LIMIT));
            out.push(mk("negativity", (-r.min_eigenvalue).max(0.0), ORACLE_LIMIT));
        }
    }
    Ok(out)
}

fn invariant_checks(base_seed: u64) -> Vec<Check> {
    let mut out = Vec::new();

    let spec = ModelSpec::dimer(20, 0.5, 1.0, 0.5);
    let d = DisorderSpec::bonds(0.4, 0.4).with_seed(base_seed);
    let narrow = Bins {
        min: -1.0,
        max: 1.0,
        count: 8,
    };
    let value = match complex_dos(&spec, &d, 4, &narrow, &narrow) {
        Ok(h) => (h.total() + h.overflow).abs_diff(20 * h.realizations as u64) as f64,
        Err(_) => f64::INFINITY,
    };
    out.push(Check {
        name: "dos_conservation",
        n_sites: 20,
        realization: None,
        value,
        limit: 0.0,
    });

    let references = [
        (ModelSpec::dimer(100, 0.5, 1.0, 0.5), winding_clean_dimer(0.5, 1.0)),
        (ModelSpec::dimer(100, 1.5, 1.0, 0.5), winding_clean_dimer(1.5, 1.0)),
        (
            ModelSpec::trimer(99, 1.0, 1.0, 3.5, 0.0, 0.5),
            winding_clean_trimer(1.0, 1.0, 3.5, 0.0, 0.0, 0.0),
        ),
    ];
    for (spec, closed) in references {
        let value = match (winding_real_space(&spec, &BondNoise::zeros(&spec), None), closed) {
            (Ok(w), Ok(c)) => (w.w_real - c as f64).abs(),
            _ => f64::INFINITY,
        };
        out.push(Check {
            name: "winding_closed_form",
            n_sites: spec.n_sites,
            realization: None,
            value,
            limit: 0.05,
        });
    }

    let mut seen = HashSet::new();
    let mut collisions = 0usize;
    for i in 0..20 {
        for j in 0..20 {
            for r in 0..10 {
                collisions += usize::from(!seen.insert(derive_seed(base_seed, i, j, r)));
            }
        }
    }
    out.push(Check {
        name: "seed_collisions",
        n_sites: 0,
        realization: None,
        value: collisions as f64,
        limit: 0.0,
    });
    out
}

/// All checks for the configured chain kind. The oracle runs over the
/// configured `times` (default 81 points on `[0, 20]`).
pub fn checks(config: &SweepConfig) -> Result<Vec<Check>, SweepError> {
    let times = config
        .times
        .clone()
        .unwrap_or(TimeGrid::Linear { t_max: 20.0, count: 81 })
        .points()
        .map_err(|e| SweepError::Config(e.to_string()))?;
    let mut all = oracle_checks(config, &times)?;
    all.extend(invariant_checks(config.disorder.base_seed));
    Ok(all)
}

pub(crate) fn run_suite(config: &SweepConfig) -> Result<GridResult, SweepError> {
    let all = checks(config)?;
    let failed: Vec<&'static str> = all.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    let rows = all
        .iter()
        .map(|c| {
            vec![
                Field::S(c.name.to_string()),
                Field::U(c.n_sites as u64),
                c.realization.map_or(Field::S("clean".into()), Field::U),
                Field::F(c.value),
                Field::F(c.limit),
                Field::U(u64::from(c.passed())),
            ]
        })
        .collect();
    Ok(GridResult {
        experiment: Experiment::Validate,
        axes: Vec::new(),
        header: ["check", "n_sites", "realization", "value", "limit", "pass"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows,
        flagged_cells: Vec::new(),
        numerical_failure: !failed.is_empty(),
        extra: json!({ "checks": all.len(), "failed": failed }),
    })
}
