use super::{illinois, l1, l2, lp_norm};
use crate::error::{Error, Result};
use crate::model::PExponent;

/// Smallest exponent accepted by [`project_lp_ball`].
pub const LP_PROJECTION_MIN_P: f64 = 1.0 + 1e-3;
/// Largest exponent accepted by [`project_lp_ball`].
pub const LP_PROJECTION_MAX_P: f64 = 64.0;

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("radius", format!("must be finite and > 0, got {r}")))
    }
}

/// Euclidean projection onto `{x : ||x||_1 <= r}` (sort-based pivot search).
pub fn project_l1_ball(v: &[f64], r: f64) -> Result<Vec<f64>> {
    check_radius(r)?;
    if l1(v) <= r {
        return Ok(v.to_vec());
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - r) / (k + 1) as f64;
        if u > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    Ok(v.iter().map(|&x| super::soft(x, theta)).collect())
}

/// Euclidean projection onto `{x : ||x||_2 <= r}`.
pub fn project_l2_ball(v: &[f64], r: f64) -> Result<Vec<f64>> {
    check_radius(r)?;
    let n = l2(v);
    if n <= r {
        return Ok(v.to_vec());
    }
    let scale = r / n;
    Ok(v.iter().map(|x| x * scale).collect())
}

/// Euclidean projection onto `{x : ||x||_inf <= r}`: a coordinatewise clamp.
pub fn project_linf_ball(v: &[f64], r: f64) -> Result<Vec<f64>> {
    check_radius(r)?;
    Ok(v.iter().map(|x| x.clamp(-r, r)).collect())
}

/// Euclidean projection onto `{z : ||z||_p <= r}` for `1 < p < inf`.
///
/// Outside the ball the projection satisfies the KKT system
/// `z_i + lambda p sign(z_i) |z_i|^{p-1} = v_i`. Each coordinate is a
/// monotone scalar root in `|z_i|`, nested inside a root solve for
/// `lambda` on `||z(lambda)||_p = r`. The returned point is taken on the
/// feasible side of the final bracket.
pub fn project_lp_ball(v: &[f64], p: f64, r: f64) -> Result<Vec<f64>> {
    if !(LP_PROJECTION_MIN_P..=LP_PROJECTION_MAX_P).contains(&p) {
        return Err(Error::invalid(
            "p",
            format!(
                "lp-ball projection needs {LP_PROJECTION_MIN_P} <= p <= {LP_PROJECTION_MAX_P}, got {p}; \
                 use the l1 or l-infinity projection"
            ),
        ));
    }
    check_radius(r)?;
    if lp_norm(v, PExponent::Finite(p)) <= r {
        return Ok(v.to_vec());
    }
    if p == 2.0 {
        return project_l2_ball(v, r);
    }

    // Work on the unit ball with magnitudes a_i = |v_i| / r.
    let a: Vec<f64> = v.iter().map(|x| x.abs() / r).collect();
    let mut h = vec![0.0; a.len()];
    let excess = |lambda: f64, h: &mut [f64]| -> f64 {
        let mut s = 0.0;
        for (hi, &ai) in h.iter_mut().zip(&a) {
            *hi = shrink_root(ai, lambda * p, p);
            s += hi.powf(p);
        }
        s - 1.0
    };

    // the scaled excess can round to <= 0 for points on the sphere
    if excess(0.0, &mut h) <= 0.0 {
        return Ok(v.to_vec());
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while excess(hi, &mut h) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::invalid("v", "lp projection failed to bracket the multiplier"));
        }
    }
    if lo == 0.0 {
        // Tighten from above so the bracket is not absurdly wide for large p.
        let mut probe = hi / 2.0;
        while probe > 1e-300 && excess(probe, &mut h) <= 0.0 {
            hi = probe;
            probe /= 2.0;
        }
        lo = if probe > 1e-300 { probe } else { 0.0 };
    }
    let lambda = illinois(|lam| excess(lam, &mut h), lo, hi, 1e-16, 1e-15, 300);
    excess(lambda, &mut h);
    Ok(v.iter()
        .zip(&h)
        .map(|(&x, &m)| (m * r).copysign(x))
        .collect())
}

/// Solves `h + c h^{p-1} = a` for `h` in `[0, a]` (safeguarded Newton).
fn shrink_root(a: f64, c: f64, p: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if c == 0.0 {
        return a;
    }
    let f = |h: f64| h + c * h.powf(p - 1.0) - a;
    let mut lo = 0.0;
    // Both `a` and `(a/c)^{1/(p-1)}` bound the root from above.
    let mut hi = a.min((a / c).powf(1.0 / (p - 1.0)));
    if f(hi) <= 0.0 {
        return hi;
    }
    let mut h = hi;
    for _ in 0..200 {
        let fh = f(h);
        if fh == 0.0 {
            return h;
        }
        if fh > 0.0 {
            hi = h;
        } else {
            lo = h;
        }
        let df = 1.0 + c * (p - 1.0) * h.powf(p - 2.0);
        let mut next = h - fh / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - h).abs() <= 1e-17 * a.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return next.min(hi);
        }
        h = next;
    }
    h
}

/// Projection onto the `l_p` ball of radius `r` for any exponent, dispatching
/// to the exact `l_1`, `l_2` and `l_inf` routines where they apply.
pub fn project_p_ball(v: &[f64], p: PExponent, r: f64) -> Result<Vec<f64>> {
    match p {
        PExponent::Infinity => project_linf_ball(v, r),
        PExponent::Finite(q) if q == 1.0 => project_l1_ball(v, r),
        PExponent::Finite(q) if q == 2.0 => project_l2_ball(v, r),
        PExponent::Finite(q) => project_lp_ball(v, q, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn l1_examples() {
        assert_eq!(project_l1_ball(&[0.3, -0.2], 1.0).unwrap(), vec![0.3, -0.2]);
        assert_eq!(project_l1_ball(&[2.0, 0.0], 1.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_l1_ball(&[1.0, 1.0], 1.0).unwrap(), vec![0.5, 0.5]);
        assert!(project_l1_ball(&[1.0], 0.0).is_err());
    }

    #[test]
    fn l2_examples() {
        assert!(close(&project_l2_ball(&[3.0, 4.0], 1.0).unwrap(), &[0.6, 0.8], 1e-15));
        assert_eq!(project_l2_ball(&[0.1, 0.0], 1.0).unwrap(), vec![0.1, 0.0]);
        assert_eq!(project_l2_ball(&[0.0, 0.0], 1.0).unwrap(), vec![0.0, 0.0]);
        assert!(project_l2_ball(&[1.0], -1.0).is_err());
    }

    #[test]
    fn linf_examples() {
        assert_eq!(project_linf_ball(&[2.0, -3.0], 1.0).unwrap(), vec![1.0, -1.0]);
        assert_eq!(project_linf_ball(&[0.5, 0.5], 1.0).unwrap(), vec![0.5, 0.5]);
        assert_eq!(project_linf_ball(&[1.0, -2.0, 0.0], 1.5).unwrap(), vec![1.0, -1.5, 0.0]);
        assert!(project_linf_ball(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn lp_interior_is_identity() {
        let v = [0.1, -0.2, 0.05];
        assert_eq!(project_lp_ball(&v, 1.5, 1.0).unwrap(), v.to_vec());
        assert_eq!(project_lp_ball(&v, 7.0, 1.0).unwrap(), v.to_vec());
    }

    #[test]
    fn lp_rejects_bad_exponents() {
        assert!(project_lp_ball(&[1.0], 1.0, 1.0).is_err());
        assert!(project_lp_ball(&[1.0], 1.0000001, 1.0).is_err());
        assert!(project_lp_ball(&[1.0], 100.0, 1.0).is_err());
        assert!(project_lp_ball(&[1.0], f64::INFINITY, 1.0).is_err());
        assert!(project_lp_ball(&[1.0], 1.5, 0.0).is_err());
    }

    #[test]
    fn lp_boundary_accuracy() {
        let v = [2.0, -1.0, 0.5, 0.0, 3.0];
        for &p in &[1.01, 1.2, 1.5, 2.5, 3.0, 8.0, 40.0, 64.0] {
            for &r in &[0.01, 1.0, 2.5] {
                let z = project_lp_ball(&v, p, r).unwrap();
                let n = lp_norm(&z, PExponent::Finite(p));
                assert!(n <= r * (1.0 + 1e-12), "p={p} r={r} n={n}");
                assert!((n - r).abs() <= 1e-10 * r, "p={p} r={r} n={n}");
                assert_eq!(z[3], 0.0);
                assert!(z.iter().zip(&v).all(|(a, b)| a * b >= 0.0));
            }
        }
    }

    #[test]
    fn lp_at_two_matches_l2() {
        let v = [3.0, -4.0, 1.0];
        let a = project_lp_ball(&v, 2.0, 1.5).unwrap();
        let b = project_l2_ball(&v, 1.5).unwrap();
        assert!(close(&a, &b, 1e-12));
    }

    #[test]
    fn dispatcher_routes_by_exponent() {
        let v = [2.0, -3.0];
        assert_eq!(project_p_ball(&v, PExponent::Infinity, 1.0).unwrap(), vec![1.0, -1.0]);
        assert_eq!(project_p_ball(&v, PExponent::ONE, 1.0).unwrap(), vec![0.0, -1.0]);
    }
}
