//! Independent oracles: brute force, grids, quadrature and dense linear
//! algebra from `nalgebra`, checked against the library.

use nalgebra::DMatrix;

use lpcs::experiments::estimate_width;
use lpcs::geometry::{gaussian_tail, lp_norm, project_lp_ball, sigma_s_l1, support_function_capped_l1};
use lpcs::properties::{
    split_check, nsp_falsify, nsp_to_rwp, rip_estimate, rwp_search, small_ball_lower_bound,
    traditional_to_general_nsp, RipMode, RipSearchConfig, RwpSearchConfig, SmallBallParams,
};
use lpcs::sensing::{gen_gaussian_matrix, RngStream};
use lpcs::{PExponent, RwpParams, SenseMatrix};

fn normals(seed: u64, n: usize) -> Vec<f64> {
    RngStream::new(seed, 99).sampler().normals(n)
}

fn to_dense(phi: &SenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(phi.rows(), phi.cols(), phi.data())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

#[test]
fn sigma_matches_exhaustive_supports() {
    for seed in 0..200u64 {
        let n = 1 + (seed % 8) as usize;
        let mut v = normals(seed, n);
        // repeated magnitudes exercise ties
        if n > 2 && seed % 3 == 0 {
            v[1] = -v[0];
        }
        for s in 0..=n {
            let brute = (0..=s)
                .flat_map(|k| subsets(n, k))
                .map(|z| {
                    (0..n).filter(|i| !z.contains(i)).map(|i| v[i].abs()).sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            let got = sigma_s_l1(&v, s).unwrap();
            assert!((got - brute).abs() <= 1e-15 * (1.0 + brute), "seed {seed} s {s}: {got} vs {brute}");
        }
    }
}

/// Nearest point of the 2-D `l_p` sphere of radius `r` to `v` by a polar grid
/// refined with golden-section search.
fn lp_sphere_grid_projection(v: [f64; 2], p: f64, r: f64) -> [f64; 2] {
    let point = |th: f64| {
        let (c, s) = (th.cos(), th.sin());
        let norm = (c.abs().powf(p) + s.abs().powf(p)).powf(1.0 / p);
        [r * c / norm, r * s / norm]
    };
    let dist = |th: f64| {
        let z = point(th);
        (z[0] - v[0]).powi(2) + (z[1] - v[1]).powi(2)
    };
    let k = 20_000;
    let h = std::f64::consts::TAU / k as f64;
    let best = (0..k).min_by(|&a, &b| dist(a as f64 * h).total_cmp(&dist(b as f64 * h))).unwrap();
    let (mut lo, mut hi) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if dist(a) < dist(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    point(0.5 * (lo + hi))
}

#[test]
fn lp_projection_matches_polar_grid() {
    let z = project_lp_ball(&[2.0, 1.0], 1.5, 1.0).unwrap();
    let o = lp_sphere_grid_projection([2.0, 1.0], 1.5, 1.0);
    assert!((z[0] - o[0]).abs() < 1e-4 && (z[1] - o[1]).abs() < 1e-4, "{z:?} vs {o:?}");

    for seed in 0..100u64 {
        let mut s = RngStream::new(seed, 7).sampler();
        let p = 1.05 + 6.0 * s.uniform();
        let r = 0.1 + 2.0 * s.uniform();
        let scale = 0.5 + 4.0 * s.uniform();
        let v = [scale * s.normal(), scale * s.normal()];
        let z = project_lp_ball(&v, p, r).unwrap();
        if lp_norm(&v, PExponent::Finite(p)) <= r {
            assert_eq!(z, v.to_vec());
            continue;
        }
        let o = lp_sphere_grid_projection(v, p, r);
        assert!(
            (z[0] - o[0]).abs() < 1e-4 && (z[1] - o[1]).abs() < 1e-4,
            "seed {seed}: v {v:?} p {p} r {r}: {z:?} vs {o:?}"
        );
    }
}

#[test]
fn capped_support_function_matches_angle_grid() {
    let g = [1.0, 1.0];
    let t = 1.2;
    let feasible = |th: f64| th.cos().abs() + th.sin().abs() <= t;
    let value = |th: f64| g[0] * th.cos() + g[1] * th.sin();
    let k = 100_000;
    let h = std::f64::consts::TAU / k as f64;
    let mut best = f64::NEG_INFINITY;
    for i in 0..k {
        let th = i as f64 * h;
        if !feasible(th) {
            continue;
        }
        best = best.max(value(th));
        // refine at the feasibility boundary next to this grid point
        for nb in [th - h, th + h] {
            if !feasible(nb) {
                let (mut a, mut b) = (th, nb);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    if feasible(mid) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                best = best.max(value(a));
            }
        }
    }
    let got = support_function_capped_l1(&g, t).unwrap();
    assert!((got - best).abs() < 1e-6, "{got} vs {best}");
}

/// Adaptive Simpson quadrature.
fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[test]
fn gaussian_tail_matches_quadrature() {
    let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for u in [0.0, 0.002, 0.3, 1.0, 1.7, 2.5, 4.0, 6.0] {
        let oracle = 1.0 - 2.0 * simpson(density, 0.0, u, 1e-15);
        let got = gaussian_tail(u);
        assert!((got - oracle).abs() < 1e-10, "u {u}: {got} vs {oracle}");
    }
    assert!((gaussian_tail(1.0) - 0.317_310_507_862_914_1).abs() < 1e-12);
}

#[test]
fn width_of_scalar_problem_is_half_normal_mean() {
    let w = estimate_width(1, 1.0, 100_000, &RngStream::new(11, 0)).unwrap();
    let target = (2.0 / std::f64::consts::PI).sqrt();
    assert!((w.mean - target).abs() <= 3.0 * w.std_error, "{} ± {}", w.mean, w.std_error);
}

#[test]
fn width_at_large_radius_is_mean_gaussian_norm() {
    let w = estimate_width(16, 4.0, 10_000, &RngStream::new(12, 0)).unwrap();
    let draws = 10_000;
    let mut s = RngStream::new(999, 5).sampler();
    let norms: Vec<f64> = (0..draws).map(|_| s.normals(16).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mean = norms.iter().sum::<f64>() / draws as f64;
    let var = norms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
    let se = (var / draws as f64).sqrt();
    let combined = (se * se + w.std_error * w.std_error).sqrt();
    assert!((w.mean - mean).abs() <= 3.0 * combined, "{} vs {mean}", w.mean);
}

#[test]
fn rwp_search_matches_circle_grid_in_two_dimensions() {
    for seed in 0..5u64 {
        let phi = gen_gaussian_matrix(3, 2, &RngStream::new(seed, 3)).unwrap();
        let p = PExponent::Finite(1.5);
        let t = 1.2;
        let k = 100_000;
        let mut best = f64::INFINITY;
        for i in 0..k {
            let th = std::f64::consts::TAU * i as f64 / k as f64;
            let x = [th.cos(), th.sin()];
            if x[0].abs() + x[1].abs() > t {
                continue;
            }
            let img: Vec<f64> = (0..3).map(|r| phi.get(r, 0) * x[0] + phi.get(r, 1) * x[1]).collect();
            best = best.min(lp_norm(&img, p));
        }
        let params = RwpParams::new(p, 1.0 / t, 1e-3).unwrap();
        let v = rwp_search(&phi, &params, 20, &RngStream::new(seed, 4), &RwpSearchConfig::default()).unwrap();
        assert!((v.min_found - best).abs() < 1e-3, "seed {seed}: {} vs grid {best}", v.min_found);
    }
}

#[test]
fn rip_p2_matches_dense_svd_per_support() {
    for seed in 0..6u64 {
        for &(m, n, s) in &[(4, 6, 2), (5, 8, 3), (6, 10, 4), (3, 7, 1)] {
            let phi = gen_gaussian_matrix(m, n, &RngStream::new(seed, 21)).unwrap();
            let dense = to_dense(&phi);
            let (mut lo, mut hi) = (f64::INFINITY, 0f64);
            for sup in subsets(n, s) {
                let sub = dense.select_columns(&sup);
                // squared singular values are the eigenvalues of the s x s Gram matrix
                let eig = (sub.transpose() * &sub).symmetric_eigenvalues();
                let smin = eig.min().max(0.0).sqrt();
                let smax = eig.max().sqrt();
                // zero singular values beyond the rank
                let smin = if s > m { 0.0 } else { smin };
                lo = lo.min(smin);
                hi = hi.max(smax);
            }
            let est = rip_estimate(&phi, s, PExponent::TWO, RipMode::Enumerate, &RngStream::new(0, 0), &RipSearchConfig::default()).unwrap();
            assert!((est.min_ratio() - lo).abs() < 1e-8, "min {} vs {lo}", est.min_ratio());
            assert!((est.max_ratio() - hi).abs() < 1e-8, "max {} vs {hi}", est.max_ratio());
        }
    }
}

/// Traditional NSP margin at a unit vector, computed from scratch.
fn margin_oracle(phi: &SenseMatrix, v: &[f64], s: usize, p: PExponent, psi: f64, tau: f64) -> f64 {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    let head = idx[..s].iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt();
    let tail: f64 = idx[s..].iter().map(|&i| v[i].abs()).sum();
    let img: Vec<f64> = (0..phi.rows()).map(|r| (0..v.len()).map(|c| phi.get(r, c) * v[c]).sum()).collect();
    head - psi / (s as f64).sqrt() * tail - tau * lp_norm(&img, p)
}

#[test]
fn nsp_falsifier_agrees_with_sphere_grid() {
    let (s, p, psi) = (1, PExponent::TWO, 0.5);
    let mut agreements = 0;
    for seed in 0..4u64 {
        let phi = gen_gaussian_matrix(2, 3, &RngStream::new(seed, 31)).unwrap();
        // skip tau values where the grid verdict is borderline
        for tau in [0.05, 0.3, 1.0, 3.0] {
            let mut gmax = f64::NEG_INFINITY;
            for a in 0..=180 {
                for b in 0..360 {
                    let (th, ph) = ((a as f64).to_radians(), (b as f64).to_radians());
                    let v = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    gmax = gmax.max(margin_oracle(&phi, &v, s, p, psi, tau));
                }
            }
            if gmax.abs() < 0.02 {
                continue;
            }
            let verdict = nsp_falsify(&phi, s, p, psi, tau, 200, &RngStream::new(seed, 32)).unwrap();
            assert_eq!(verdict.violation_found, gmax > 0.0, "seed {seed} tau {tau}: grid max {gmax}");
            if verdict.violation_found {
                let w = verdict.witness.as_slice();
                assert!(margin_oracle(&phi, w, s, p, psi, tau) > 0.0);
            }
            agreements += 1;
        }
    }
    assert!(agreements >= 8);
}

#[test]
fn split_bounds_hold_with_measured_rip() {
    for seed in 0..20u64 {
        let (n, s) = (10, 3);
        let phi = gen_gaussian_matrix(6, n, &RngStream::new(seed, 41)).unwrap();
        let est = rip_estimate(&phi, s, PExponent::TWO, RipMode::Enumerate, &RngStream::new(0, 0), &RipSearchConfig::default()).unwrap();
        let x = normals(seed + 1000, n);
        let rho = 0.5 * lp_norm(&x, PExponent::TWO) / lp_norm(&x, PExponent::ONE);
        let check = split_check(&phi, &x, s, rho, est.mu(), est.delta(), PExponent::TWO).unwrap();
        assert!(check.l2_bound && check.image_bound, "seed {seed}: {check:?}");
    }
}

#[test]
fn small_ball_negative_inner_term_is_reported() {
    let sb = SmallBallParams { u: 0.5, deviation: 1.0, m: 100, p: PExponent::TWO, width: 20.0 };
    let inner = gaussian_tail(1.0) - 8.0 * 2.0 - 0.1;
    let got = small_ball_lower_bound(&sb).unwrap();
    assert!(inner < 0.0);
    assert!((got - 0.25 * inner).abs() < 1e-14);
}

#[test]
fn nsp_to_rwp_radius_is_vacuous_for_l1_ball() {
    // rho = 2 phi > 2, so T = rho^{-1} B_1 ∩ S^{N-1} is empty and the search rejects it.
    let c = traditional_to_general_nsp(0.5, 4, 2.0).unwrap();
    let r = nsp_to_rwp(&c, PExponent::TWO).unwrap();
    assert!(r.rho() > 1.0);
    let phi = gen_gaussian_matrix(3, 5, &RngStream::new(1, 1)).unwrap();
    assert!(rwp_search(&phi, &r, 5, &RngStream::new(1, 2), &RwpSearchConfig::default()).is_err());
}

#[test]
fn gaussian_matrix_moments() {
    let phi = gen_gaussian_matrix(200, 200, &RngStream::new(1, 0)).unwrap();
    let d = phi.data();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64;
    assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.05, "{mean} {var}");
}

#[test]
fn distinct_streams_are_uncorrelated() {
    let a = RngStream::new(5, 0).sampler().normals(10_000);
    let b = RngStream::new(5, 1).sampler().normals(10_000);
    let k = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / k, b.iter().sum::<f64>() / k);
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / k;
    let sa = (a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / k).sqrt();
    let sb = (b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / k).sqrt();
    assert!((cov / (sa * sb)).abs() < 0.05);
}
