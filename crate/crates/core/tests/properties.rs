//! Property tests for the model, dynamics, topology and sweep invariants.

mod common;

use std::collections::HashSet;

use darkwind::analytics::{
    expected_log_abs_uniform, expected_log_abs_uniform2, phase_boundary_dimer, trimer_dark_states, DimerMuMap,
};
use darkwind::dynamics::{coherence_trace_with, complex_dos, evolve_state, Bins, Method};
use darkwind::lindblad::{DensityMatrix01, LindbladSystem};
use darkwind::linalg::propagator;
use darkwind::model::{build_hamiltonian, clean_hamiltonian, sample_noise_seeded, DisorderSpec, ModelSpec};
use darkwind::stats::MeanStderr;
use darkwind::sweep::{compute, Experiment, SweepConfig};
use darkwind::topology::{polar_unitary, winding_clean_dimer, winding_clean_trimer, winding_real_space};
use darkwind::{derive_seed, ComplexMatrix};
use faer::c64;
use proptest::prelude::*;

fn dimer_spec() -> impl Strategy<Value = ModelSpec> {
    (1usize..12, -2.0..2.0f64, -2.0..2.0f64, 0.0..1.5f64)
        .prop_map(|(cells, j1, j2, g)| ModelSpec::dimer(2 * cells, j1, j2, g))
}

fn trimer_spec() -> impl Strategy<Value = ModelSpec> {
    (2usize..25, -2.0..2.0f64, -3.0..3.0f64, -4.0..4.0f64, -2.0..2.0f64, 0.0..1.5f64, -1.0..1.0f64)
        .prop_map(|(n, j1, j2, j3, j, g, ea)| ModelSpec::trimer(n, j1, j2, j3, j, g).with_onsite(ea, 0.0, 0.3))
}

fn any_spec() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![dimer_spec(), trimer_spec()]
}

fn disorder() -> impl Strategy<Value = DisorderSpec> {
    (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64, 0.0..1.0f64, any::<u64>()).prop_map(
        |(mu1, mu2, mu3, mu_j, mu_diag, base_seed)| DisorderSpec {
            mu1,
            mu2,
            mu3,
            mu_j,
            mu_diag,
            base_seed,
        },
    )
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seeds_are_deterministic_and_distinct(base in any::<u64>(), i in 0u64..1000, j in 0u64..1000, r in 0u64..1000) {
        prop_assert_eq!(derive_seed(base, i, j, r), derive_seed(base, i, j, r));
        prop_assert_ne!(derive_seed(base, i, j, r), derive_seed(base, i, j, r + 1));
        prop_assert_ne!(derive_seed(base, i, j, r), derive_seed(base, j + 1000, i, r));
    }

    #[test]
    fn seeds_do_not_collide_on_a_block(base in any::<u64>()) {
        let mut seen = HashSet::new();
        for i in 0..10 { for j in 0..10 { for r in 0..10 {
            prop_assert!(seen.insert(derive_seed(base, i, j, r)));
        }}}
    }

    #[test]
    fn loss_is_the_only_non_hermitian_part(spec in any_spec(), d in disorder(), r in 0u64..100) {
        let h = build_hamiltonian(&spec, &sample_noise_seeded(&spec, &d, r)).unwrap();
        let n = spec.n_sites;
        for a in 0..n {
            for b in 0..n {
                let anti = h[(a, b)] - h[(b, a)].conj();
                let expected = if a == b && spec.is_leaky(a) { -2.0 * spec.gamma } else { 0.0 };
                prop_assert!((anti - c64::new(0.0, expected)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn noise_is_reproducible(spec in any_spec(), d in disorder(), seed in any::<u64>()) {
        prop_assert_eq!(sample_noise_seeded(&spec, &d, seed), sample_noise_seeded(&spec, &d, seed));
    }

    #[test]
    fn evolution_never_gains_norm(spec in any_spec(), d in disorder(), r in 0u64..100) {
        let h = build_hamiltonian(&spec, &sample_noise_seeded(&spec, &d, r)).unwrap();
        let mut psi0 = vec![c64::new(0.0, 0.0); spec.n_sites];
        psi0[0] = c64::new(1.0, 0.0);
        let times: Vec<f64> = (0..30).map(|k| 0.7 * k as f64).collect();
        let (states, _) = evolve_state(&h, &psi0, &times, Method::Auto).unwrap();
        let norms: Vec<f64> = states.iter().map(|s| norm(s)).collect();
        prop_assert!((norms[0] - 1.0).abs() < 1e-10);
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{} > {}", w[1], w[0]);
        }
    }

    #[test]
    fn coherence_is_bounded(spec in any_spec(), d in disorder(), r in 0u64..100) {
        let h = build_hamiltonian(&spec, &sample_noise_seeded(&spec, &d, r)).unwrap();
        let times: Vec<f64> = (0..40).map(|k| 0.5 * k as f64).collect();
        let (c, _) = coherence_trace_with(&h, &times, Method::Auto).unwrap();
        prop_assert!((c[0] - 1.0).abs() < 1e-10);
        prop_assert!(c.iter().all(|&x| (-1e-12..=1.0 + 1e-9).contains(&x)));
    }

    #[test]
    fn eigen_and_expm_paths_agree(spec in any_spec(), d in disorder(), r in 0u64..100) {
        let h = build_hamiltonian(&spec, &sample_noise_seeded(&spec, &d, r)).unwrap();
        let times: Vec<f64> = (0..12).map(|k| 1.3 * k as f64).collect();
        let (a, used) = coherence_trace_with(&h, &times, Method::Auto).unwrap();
        let (b, _) = coherence_trace_with(&h, &times, Method::Expm).unwrap();
        prop_assume!(used == Method::Eigen);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn propagator_composes(spec in any_spec(), t in 0.0..5.0f64, s in 0.0..5.0f64) {
        let h = clean_hamiltonian(&spec).unwrap();
        let ab = propagator(&h, t).unwrap().matmul(&propagator(&h, s).unwrap());
        let direct = propagator(&h, t + s).unwrap();
        prop_assert!(ab.max_abs_diff(&direct) < 1e-10);
    }

    #[test]
    fn polar_factor_is_unitary(n in 1usize..12, entries in proptest::collection::vec(-3.0..3.0f64, 288)) {
        let v = ComplexMatrix::from_fn(n, |i, j| c64::new(entries[2 * (i * 12 + j)], entries[2 * (i * 12 + j) + 1]));
        let p = polar_unitary(&v).unwrap();
        prop_assert!(p.unitary.unitarity_defect() < 1e-10);
    }

    #[test]
    fn clean_dimer_winding_matches_closed_form(cells in 40usize..90, j1 in 0.05..2.0f64, j2 in 0.05..2.0f64) {
        prop_assume!((j1 - j2).abs() > 0.25);
        let spec = ModelSpec::dimer(2 * cells, j1, j2, 0.5);
        let w = winding_real_space(&spec, &darkwind::BondNoise::zeros(&spec), None).unwrap();
        prop_assert!((w.w_real - winding_clean_dimer(j1, j2).unwrap() as f64).abs() < 0.05);
    }

    #[test]
    fn clean_trimer_winding_matches_closed_form(j2 in 0.0..3.0f64, j3 in 0.0..4.0f64, j in -2.0..2.0f64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let margin = ((s * j3).abs() - (s * (j + j2)).abs()).abs().min(((s * j3).abs() - (s * (j2 - j)).abs()).abs());
        prop_assume!(margin > 0.25);
        let spec = ModelSpec::trimer(180, 1.0, j2, j3, j, 0.5);
        let w = winding_real_space(&spec, &darkwind::BondNoise::zeros(&spec), None).unwrap();
        let closed = winding_clean_trimer(1.0, j2, j3, j, 0.0, 0.0).unwrap();
        prop_assert!((w.w_real - closed as f64).abs() < 0.05, "{} vs {}", w.w_real, closed);
    }

    #[test]
    fn dos_accounts_for_every_eigenvalue(spec in any_spec(), d in disorder(), lo in -3.0..0.0f64, width in 0.1..4.0f64) {
        let bins = Bins { min: lo, max: lo + width, count: 7 };
        let im = Bins { min: -0.8, max: 0.05, count: 5 };
        let h = complex_dos(&spec, &d, 3, &bins, &im).unwrap();
        prop_assert_eq!(h.total() + h.overflow, (spec.n_sites * h.realizations) as u64);
    }

    #[test]
    fn log_mean_scales_and_is_even(j in -3.0..3.0f64, mu in 0.0..3.0f64, c in 0.1..10.0f64) {
        prop_assume!(j != 0.0 || mu > 0.0);
        let base = expected_log_abs_uniform(j, mu).unwrap();
        prop_assert!((expected_log_abs_uniform(-j, mu).unwrap() - base).abs() < 1e-12);
        prop_assert!((expected_log_abs_uniform(c * j, c * mu).unwrap() - c.ln() - base).abs() < 1e-10);
    }

    #[test]
    fn log_mean2_is_symmetric(s in -4.0..4.0f64, a in 0.0..3.0f64, b in 0.0..3.0f64) {
        prop_assume!(s != 0.0 || a > 0.0 || b > 0.0);
        let x = expected_log_abs_uniform2(s, a, b).unwrap();
        prop_assert!((expected_log_abs_uniform2(s, b, a).unwrap() - x).abs() < 1e-10);
        prop_assert!((expected_log_abs_uniform2(-s, a, b).unwrap() - x).abs() < 1e-10);
    }

    #[test]
    fn log_mean_matches_quadrature(j in -3.0..3.0f64, mu in 0.01..3.0f64) {
        let q = common::mean_log_abs_quad(j, mu);
        prop_assert!((expected_log_abs_uniform(j, mu).unwrap() - q).abs() < 1e-8);
    }

    #[test]
    fn isotropic_boundary_is_the_clean_line(j2 in 0.1..3.0f64, mu in 0.0..10.0f64) {
        let c = phase_boundary_dimer(j2, DimerMuMap::ISOTROPIC, &[mu]).unwrap();
        prop_assert!((c.critical[0].unwrap() - j2).abs() < 1e-6);
    }

    #[test]
    fn dark_states_are_eigenvectors(k in 1usize..40, j1 in 0.2..2.0f64, j2 in -3.0..3.0f64, j3 in 0.5..4.0f64, j in -2.0..2.0f64, g in 0.0..1.0f64) {
        let spec = ModelSpec::trimer(3 * k + 2, j1, j2, j3, j, g);
        let p = trimer_dark_states(&spec).unwrap();
        let scale = clean_hamiltonian(&spec).unwrap().norm_max();
        prop_assert!(p.residual_plus < 1e-10 * scale && p.residual_minus < 1e-10 * scale);
        prop_assert!((norm(&p.v_plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_stderr_bounds(xs in proptest::collection::vec(-5.0..5.0f64, 2..50)) {
        let s = MeanStderr::from_samples(&xs);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s.mean >= lo - 1e-12 && s.mean <= hi + 1e-12);
        prop_assert!(s.stderr >= 0.0);
        prop_assert_eq!(s.n, xs.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lindblad_preserves_trace_and_hermiticity(spec in any_spec(), d in disorder(), r in 0u64..10) {
        prop_assume!(spec.n_sites <= 6);
        let sys = LindbladSystem::new(&spec, &sample_noise_seeded(&spec, &d, r)).unwrap();
        let states = sys.evolve(&DensityMatrix01::initial(spec.n_sites), &[1.0, 4.0], 1e-10).unwrap();
        for s in &states {
            prop_assert!((s.trace() - c64::new(1.0, 0.0)).norm() < 1e-8);
            prop_assert!(s.hermiticity_defect() < 1e-10);
            prop_assert!(s.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn sweeps_do_not_depend_on_worker_count(seed in any::<u64>(), workers in 2usize..6) {
        let mut c = SweepConfig::from_json(
            r#"{"model": {"kind": "dimer", "n_sites": 16, "j1": 0.5, "j2": 1.0, "gamma": 0.5},
                "grid": [{"param": "mu", "min": 0.0, "max": 1.5, "count": 3},
                         {"param": "j1", "min": 0.2, "max": 1.6, "count": 2}],
                "mu_map": {"mu1": 1.0, "mu2": 0.5},
                "times": {"kind": "linear", "t_max": 10.0, "count": 11},
                "realizations": 4}"#,
        ).unwrap();
        c.disorder.base_seed = seed;
        for exp in [Experiment::Winding, Experiment::Coherence] {
            let a = compute(&c, exp, Some(1)).unwrap().to_csv();
            let b = compute(&c, exp, Some(workers)).unwrap().to_csv();
            prop_assert_eq!(a, b);
        }
    }
}
