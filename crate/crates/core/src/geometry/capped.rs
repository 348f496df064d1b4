//! The set `T = t B_1 ∩ S^{N-1}` and its support function.
//!
//! For `t >= 1` the maximiser of `<g, x>` over the convex body `B_2 ∩ t B_1`
//! is `soft(g, l*) / ||soft(g, l*)||_2`, where `l*` is the smallest threshold
//! whose soft-thresholded vector has `l_1 / l_2` ratio at most `t`. That
//! maximiser has unit norm, so it also solves the problem over `T`, and
//! since `||x||_2 = 1` on `T` it is the nearest point of `T` to `g`.

use super::{l1, l2, linf, soft};
use crate::error::{Error, Result};

fn check_radius(t: f64) -> Result<()> {
    if t.is_finite() && t >= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "t",
            format!("l1 radius must be finite and >= 1 (T is empty below 1), got {t}"),
        ))
    }
}

/// `(||soft(g, l)||_1, ||soft(g, l)||_2)`.
fn soft_norms(g: &[f64], lambda: f64) -> (f64, f64) {
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for &x in g {
        let s = soft(x, lambda);
        n1 += s.abs();
        n2 += s * s;
    }
    (n1, n2.sqrt())
}

/// Threshold bracket `(lo, hi)` with ratio above `t` at `lo` and at most `t`
/// at `hi`. `None` when no shrinkage is needed.
fn threshold_bracket(g: &[f64], t: f64) -> Option<(f64, f64)> {
    let top = linf(g);
    if top == 0.0 || l1(g) <= t * l2(g) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (n1, n2) = soft_norms(g, mid);
        if n2 > 0.0 && n1 > t * n2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

/// `sup { <g, x> : ||x||_2 <= 1, ||x||_1 <= t }` for `t >= 1`.
///
/// Evaluated through the dual `min_{l >= 0} l t + ||soft(g, l)||_2`, whose
/// derivative `t - ||soft||_1 / ||soft||_2` is monotone, so the minimiser is
/// located by bisection on the sign of the derivative.
pub fn support_function_capped_l1(g: &[f64], t: f64) -> Result<f64> {
    check_radius(t)?;
    let Some((lo, hi)) = threshold_bracket(g, t) else {
        return Ok(l2(g));
    };
    let dual = |lambda: f64| lambda * t + soft_norms(g, lambda).1;
    Ok(dual(lo).min(dual(hi)))
}

/// A maximiser of `<g, x>` over `T = t B_1 ∩ S^{N-1}`.
///
/// The result has unit `l_2` norm and `l_1` norm at most `t` up to rounding.
/// For `g = 0` (or a degenerate tie that leaves no unit-norm maximiser) a
/// signed basis vector at the largest entry is returned.
pub fn capped_l1_maximizer(g: &[f64], t: f64) -> Result<Vec<f64>> {
    check_radius(t)?;
    if g.is_empty() {
        return Err(Error::invalid("g", "must be nonempty"));
    }
    let fallback = || {
        let (k, _) = g
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bk, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bk, bv) });
        let mut e = vec![0.0; g.len()];
        e[k] = if g[k] < 0.0 { -1.0 } else { 1.0 };
        e
    };
    let norm = l2(g);
    if norm == 0.0 {
        return Ok(fallback());
    }
    let shrunk: Vec<f64> = match threshold_bracket(g, t) {
        None => g.to_vec(),
        Some((_, hi)) => g.iter().map(|&x| soft(x, hi)).collect(),
    };
    let n2 = l2(&shrunk);
    if n2 == 0.0 {
        return Ok(fallback());
    }
    let x: Vec<f64> = shrunk.iter().map(|v| v / n2).collect();
    if l1(&x) > t * (1.0 + 1e-12) {
        return Ok(fallback());
    }
    Ok(x)
}

/// Nearest point of `T = t B_1 ∩ S^{N-1}` to `v` (a retraction onto `T`).
pub fn project_onto_capped_sphere(v: &[f64], t: f64) -> Result<Vec<f64>> {
    capped_l1_maximizer(v, t)
}
