use proptest::collection::vec;
use proptest::prelude::*;

use lpcs::experiments::{phase_transition, TrialGrid};
use lpcs::format::{parse_data_file, report_from_csv, report_from_json, report_to_csv, report_to_json, DataFile, KIND_SIGNAL};
use lpcs::geometry::{
    best_s_term, lp_norm, project_l1_ball, project_l2_ball, project_linf_ball, project_lp_ball,
    support_function_capped_l1,
};
use lpcs::model::{Column, ExperimentReport, Value};
use lpcs::properties::{
    split_check, rip_estimate, rwp_search, small_ball_lower_bound, RipMode, RipSearchConfig,
    RwpSearchConfig, SmallBallParams,
};
use lpcs::sensing::{apply, gen_gaussian_matrix, gen_noise, gen_sparse_signal, MagnitudeModel, NoiseModel, RngStream};
use lpcs::solver::{decode, residual_lp, SolverConfig};
use lpcs::{PExponent, RecoveryProblem, RwpParams, SenseMatrix};

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn exponent() -> impl Strategy<Value = PExponent> {
    prop_oneof![
        Just(PExponent::ONE),
        Just(PExponent::TWO),
        Just(PExponent::Infinity),
        (1.0f64..8.0).prop_map(PExponent::Finite),
    ]
}

fn nonzero_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(-10.0f64..10.0, 1..=max_len).prop_filter("nonzero", |v| v.iter().any(|x| *x != 0.0))
}

/// A uniformly random point of the `p`-ball of radius `r`, roughly.
fn ball_probe(seed: u64, n: usize, p: PExponent, r: f64) -> Vec<f64> {
    let mut s = RngStream::new(seed, 0).sampler();
    let g = s.normals(n);
    let norm = lp_norm(&g, p);
    let scale = r * s.uniform() / norm.max(1e-300);
    g.iter().map(|x| x * scale).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norms_are_ordered(v in nonzero_vec(12), a in exponent(), b in exponent()) {
        let (lo, hi) = if a.value() <= b.value() { (a, b) } else { (b, a) };
        prop_assert!(lp_norm(&v, hi) <= lp_norm(&v, lo) * (1.0 + 1e-12));
        let n = v.len() as f64;
        prop_assert!(lp_norm(&v, PExponent::ONE) <= n.sqrt() * lp_norm(&v, PExponent::TWO) * (1.0 + 1e-12));
    }

    #[test]
    fn log_m_norm_is_within_e_of_max(v in vec(-5.0f64..5.0, 2..64)) {
        let q = PExponent::Finite((v.len() as f64).ln().max(1.0));
        prop_assert!(lp_norm(&v, q) <= std::f64::consts::E * lp_norm(&v, PExponent::Infinity) * (1.0 + 1e-12));
    }

    #[test]
    fn projections_are_optimal_and_idempotent(v in nonzero_vec(8), r in 0.05f64..5.0, p in 1.05f64..10.0, seed in any::<u64>()) {
        let cases: Vec<(PExponent, Vec<f64>)> = vec![
            (PExponent::ONE, project_l1_ball(&v, r).unwrap()),
            (PExponent::TWO, project_l2_ball(&v, r).unwrap()),
            (PExponent::Infinity, project_linf_ball(&v, r).unwrap()),
            (PExponent::Finite(p), project_lp_ball(&v, p, r).unwrap()),
        ];
        for (q, z) in cases {
            prop_assert!(lp_norm(&z, q) <= r * (1.0 + 1e-10));
            let again = match q {
                PExponent::Infinity => project_linf_ball(&z, r).unwrap(),
                PExponent::Finite(x) if x == 1.0 => project_l1_ball(&z, r).unwrap(),
                PExponent::Finite(x) if x == 2.0 => project_l2_ball(&z, r).unwrap(),
                PExponent::Finite(x) => project_lp_ball(&z, x, r).unwrap(),
            };
            prop_assert!(dist(&z, &again) <= 1e-10 * (1.0 + l2(&z)));
            let d = dist(&v, &z);
            for k in 0..20u64 {
                let probe = ball_probe(seed.wrapping_add(k), v.len(), q, r);
                prop_assert!(d <= dist(&v, &probe) + 1e-9, "p {:?}", q);
            }
        }
    }

    #[test]
    fn best_s_term_keeps_the_largest(v in nonzero_vec(10), s in 0usize..10) {
        let s = s.min(v.len());
        let (trunc, support) = best_s_term(&v, s).unwrap();
        prop_assert!(support.len() <= s);
        let kept_min = support.indices().iter().map(|&i| v[i].abs()).fold(f64::INFINITY, f64::min);
        for i in 0..v.len() {
            if support.contains(i) {
                prop_assert_eq!(trunc[i], v[i]);
            } else {
                prop_assert_eq!(trunc[i], 0.0);
                if support.len() == s && s > 0 {
                    prop_assert!(v[i].abs() <= kept_min);
                }
            }
        }
    }

    #[test]
    fn capped_support_function_is_monotone_and_bracketed(g in nonzero_vec(16), t1 in 1.0f64..4.0, dt in 0.0f64..3.0) {
        let a = support_function_capped_l1(&g, t1).unwrap();
        let b = support_function_capped_l1(&g, t1 + dt).unwrap();
        let (lo, hi) = (lp_norm(&g, PExponent::Infinity), l2(&g));
        prop_assert!(a <= b * (1.0 + 1e-9) + 1e-12);
        for v in [a, b] {
            prop_assert!(v >= lo * (1.0 - 1e-9) && v <= hi * (1.0 + 1e-9));
        }
    }

    #[test]
    fn split_l2_conclusion(x in nonzero_vec(12), s in 1usize..6, frac in 0.05f64..0.999) {
        let s = s.min(x.len());
        let rho = frac * l2(&x) / lp_norm(&x, PExponent::ONE);
        let phi = SenseMatrix::identity(x.len()).unwrap();
        let check = split_check(&phi, &x, s, rho, 1.0, 0.0, PExponent::TWO).unwrap();
        prop_assert!(check.l2_bound);
    }

    #[test]
    fn noise_is_calibrated(m in 1usize..40, eps in 0.0f64..5.0, seed in any::<u64>(), single in any::<bool>(),
                           p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(f64::INFINITY)]) {
        let p = if p.is_infinite() { PExponent::Infinity } else { PExponent::Finite(p) };
        let model = if single { NoiseModel::SingleCoordinate } else { NoiseModel::GaussianDirection };
        let e = gen_noise(m, p, eps, &RngStream::new(seed, 0), model).unwrap();
        prop_assert_eq!(e.len(), m);
        prop_assert!((lp_norm(&e, p) - eps).abs() <= 1e-12 * eps.max(1e-300));
        prop_assert_eq!(&e, &gen_noise(m, p, eps, &RngStream::new(seed, 0), model).unwrap());
    }

    #[test]
    fn sparse_signals_have_exact_support(n in 1usize..40, s in 1usize..40, seed in any::<u64>(), unit in any::<bool>()) {
        let s = s.min(n);
        let model = if unit { MagnitudeModel::UnitSigns } else { MagnitudeModel::GaussianAmplitudes };
        let x = gen_sparse_signal(n, s, &RngStream::new(seed, 0), model).unwrap();
        prop_assert_eq!(x.as_slice().iter().filter(|v| **v != 0.0).count(), s);
        if unit {
            prop_assert!(x.as_slice().iter().all(|v| *v == 0.0 || v.abs() == 1.0));
        }
    }

    #[test]
    fn small_ball_monotonicity(u in 0.01f64..2.0, dev in 0.0f64..3.0, m in 1usize..500, w in 0.0f64..30.0, p in 1.0f64..4.0) {
        let p = PExponent::Finite(p);
        let base = SmallBallParams { u, deviation: dev, m, p, width: w };
        let v = small_ball_lower_bound(&base).unwrap();
        let wider = small_ball_lower_bound(&SmallBallParams { width: w + 1.0, ..base }).unwrap();
        let looser = small_ball_lower_bound(&SmallBallParams { deviation: dev + 1.0, ..base }).unwrap();
        let more = small_ball_lower_bound(&SmallBallParams { m: 2 * m, ..base }).unwrap();
        prop_assert!(wider <= v && looser <= v && more >= v);
    }

    #[test]
    fn data_files_round_trip_bit_exactly(vals in vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20), seed in proptest::option::of(any::<u64>())) {
        let file = DataFile::from_vector(KIND_SIGNAL, &vals, seed);
        let back = parse_data_file(&file.to_json()).unwrap();
        let got = back.into_vector().unwrap();
        prop_assert_eq!(got.len(), vals.len());
        for (a, b) in got.iter().zip(&vals) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn reports_round_trip(rows in vec((any::<f64>(), any::<i64>(), any::<bool>()), 0..10), seed in any::<u64>()) {
        let mut r = ExperimentReport::new("demo", seed, vec![Column::real("x"), Column::integer("k"), Column::boolean("ok")]).unwrap();
        for (x, k, b) in rows {
            // signed zero and NaN payloads are not preserved by text formats
            let x = if x.is_nan() { f64::NAN } else if x == 0.0 { 0.0 } else { x };
            r.push_row(vec![Value::from(x), Value::from(k), Value::from(b)]).unwrap();
        }
        // CSV carries no column types, so they are inferred from the rows
        if !r.rows().is_empty() {
            let csv = report_to_csv(&r).unwrap();
            prop_assert_eq!(&report_from_csv(&csv, "demo", seed).unwrap(), &r);
        }
        prop_assert_eq!(&report_from_json(&report_to_json(&r, Some(5))).unwrap(), &r);
    }
}

fn gaussian_problem(seed: u64, m: usize, n: usize, s: usize, eps: f64, p: PExponent) -> RecoveryProblem {
    let phi = gen_gaussian_matrix(m, n, &RngStream::new(seed, 1)).unwrap();
    let x = gen_sparse_signal(n, s, &RngStream::new(seed, 2), MagnitudeModel::GaussianAmplitudes).unwrap();
    let e = gen_noise(m, p, eps, &RngStream::new(seed, 3), NoiseModel::GaussianDirection).unwrap();
    let y: Vec<f64> = apply(&phi, &x).unwrap().iter().zip(&e).map(|(a, b)| a + b).collect();
    RecoveryProblem::new(phi, y, eps, p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converged_solutions_are_feasible_and_monotone_in_eps(seed in any::<u64>(), p in exponent(), eps in 0.0f64..0.5) {
        let cfg = SolverConfig::default();
        let small = gaussian_problem(seed, 8, 14, 2, eps, p);
        let r1 = decode(&small, &cfg).unwrap();
        if r1.converged {
            prop_assert!(residual_lp(&small, &r1.solution).unwrap() <= eps + cfg.feasibility_tol);
        }
        let bigger = RecoveryProblem::new(small.matrix().clone(), small.observations().to_vec(), 2.0 * eps + 0.1, p).unwrap();
        let r2 = decode(&bigger, &cfg).unwrap();
        let tol = 1e-5 * r1.objective.max(1.0);
        if r1.converged && r2.converged {
            prop_assert!(r2.objective <= r1.objective + 2.0 * tol, "{} vs {}", r2.objective, r1.objective);
        }
    }

    #[test]
    fn decode_is_scale_equivariant(seed in any::<u64>(), c in 0.1f64..10.0, eps in 0.0f64..0.3) {
        let cfg = SolverConfig::default();
        let base = gaussian_problem(seed, 8, 14, 2, eps, PExponent::TWO);
        let y: Vec<f64> = base.observations().iter().map(|v| c * v).collect();
        let scaled = RecoveryProblem::new(base.matrix().clone(), y, c * eps, PExponent::TWO).unwrap();
        let (a, b) = (decode(&base, &cfg).unwrap(), decode(&scaled, &cfg).unwrap());
        prop_assume!(a.converged && b.converged);
        prop_assert!((b.objective - c * a.objective).abs() <= 1e-5 * (1.0 + b.objective), "{} vs {}", b.objective, c * a.objective);
    }

    #[test]
    fn large_l2_budget_gives_zero(seed in any::<u64>(), slack in 1.0f64..3.0) {
        let base = gaussian_problem(seed, 6, 10, 2, 0.0, PExponent::TWO);
        let eps = slack * l2(base.observations());
        let p = RecoveryProblem::new(base.matrix().clone(), base.observations().to_vec(), eps, PExponent::TWO).unwrap();
        let r = decode(&p, &SolverConfig::default()).unwrap();
        prop_assert!(r.solution.as_slice().iter().all(|v| v.abs() <= 1e-8));
    }

    #[test]
    fn rwp_verdicts_recompute(seed in any::<u64>(), t in 1.0f64..3.0, alpha in 0.01f64..5.0, p in exponent()) {
        let phi = gen_gaussian_matrix(4, 7, &RngStream::new(seed, 0)).unwrap();
        let params = RwpParams::new(p, 1.0 / t, alpha).unwrap();
        let v = rwp_search(&phi, &params, 5, &RngStream::new(seed, 1), &RwpSearchConfig::default()).unwrap();
        let w = v.witness.as_slice();
        prop_assert!(v.min_found >= 0.0);
        prop_assert!((l2(w) - 1.0).abs() <= 1e-8);
        prop_assert!(lp_norm(w, PExponent::ONE) <= t + 1e-8);
        let img = apply(&phi, &v.witness).unwrap();
        prop_assert!((lp_norm(&img, p) - v.min_found).abs() <= 1e-8);
        prop_assert_eq!(v.violation_certified, v.min_found < alpha - 1e-9);
    }

    #[test]
    fn rip_constants_are_consistent_and_nested(seed in any::<u64>(), p in exponent()) {
        let phi = gen_gaussian_matrix(5, 7, &RngStream::new(seed, 0)).unwrap();
        let mut last_max = 0.0;
        for s in 1..=4 {
            let est = rip_estimate(&phi, s, p, RipMode::Enumerate, &RngStream::new(seed, 1), &RipSearchConfig::default()).unwrap();
            let (lo, hi) = (est.min_ratio(), est.max_ratio());
            prop_assert!(lo <= hi);
            prop_assert!((est.mu() - (hi + lo) / 2.0).abs() <= 1e-15 * hi);
            prop_assert!((est.delta() - (hi - lo) / (hi + lo)).abs() <= 1e-15);
            if p == PExponent::TWO {
                prop_assert!(hi >= last_max * (1.0 - 1e-12));
            }
            last_max = hi;
        }
    }
}

#[test]
fn experiments_are_reproducible_and_fractions_bounded() {
    let mut grid = TrialGrid::new(vec![16], vec![1, 3], vec![6, 12], 4, 77);
    grid.epsilons = vec![0.0, 0.05];
    let a = phase_transition(&grid).unwrap();
    let b = phase_transition(&grid).unwrap();
    assert_eq!(a, b);
    for f in a.primary().column_f64("successFraction").unwrap() {
        assert!((0.0..=1.0).contains(&f));
    }
}

#[test]
fn invalid_values_are_rejected() {
    assert!(PExponent::finite(0.99).is_err());
    assert!(RwpParams::new(PExponent::TWO, 0.0, 1.0).is_err());
    assert!(RwpParams::new(PExponent::TWO, 1.0, f64::NAN).is_err());
    assert!(SenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
    assert!(RecoveryProblem::new(SenseMatrix::identity(2).unwrap(), vec![1.0], 0.0, PExponent::TWO).is_err());
    assert!(RecoveryProblem::new(SenseMatrix::identity(1).unwrap(), vec![1.0], -1.0, PExponent::TWO).is_err());
}
