//! Norms, ball projections, best `s`-term approximation and the support
//! function of `T = t B_1 ∩ S^{N-1}`.
//!
//! Everything here is a pure function of its arguments.

mod capped;
mod projection;
mod roots;
mod tail;

pub use capped::{capped_l1_maximizer, project_onto_capped_sphere, support_function_capped_l1};
pub use projection::{
    project_l1_ball, project_l2_ball, project_linf_ball, project_lp_ball, project_p_ball,
    LP_PROJECTION_MAX_P, LP_PROJECTION_MIN_P,
};
pub use tail::{erfc, gaussian_tail};
pub(crate) use roots::illinois;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PExponent;

/// `l_p` norm of `v`; the max-abs entry for `p = inf`. Returns 0 for an
/// empty slice.
///
/// General finite `p` is evaluated on `v / ||v||_inf` to avoid overflow for
/// large exponents.
pub fn lp_norm(v: &[f64], p: PExponent) -> f64 {
    match p {
        PExponent::Infinity => linf(v),
        PExponent::Finite(p) if p == 1.0 => v.iter().map(|x| x.abs()).sum(),
        PExponent::Finite(p) if p == 2.0 => l2(v),
        PExponent::Finite(p) => {
            let scale = linf(v);
            if scale == 0.0 {
                return 0.0;
            }
            let s: f64 = v.iter().map(|x| (x.abs() / scale).powf(p)).sum();
            scale * s.powf(1.0 / p)
        }
    }
}

pub(crate) fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub(crate) fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    let scale = linf(v);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

/// Indices of a support set: strictly increasing, each below `N`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("support", "duplicate index"));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::invalid("support", format!("index {last} out of range for N = {n}")));
            }
        }
        Ok(SupportSet { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Keeps the `s` largest-magnitude nonzero entries of `v`, zeroing the rest.
///
/// Ties in magnitude go to the lower index. Zero entries never enter the
/// support, so it may hold fewer than `s` indices.
pub fn best_s_term(v: &[f64], s: usize) -> Result<(Vec<f64>, SupportSet)> {
    if s > v.len() {
        return Err(Error::invalid(
            "s",
            format!("must not exceed N = {}, got {s}", v.len()),
        ));
    }
    let mut order: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    order.truncate(s);
    order.sort_unstable();
    let mut truncated = vec![0.0; v.len()];
    for &i in &order {
        truncated[i] = v[i];
    }
    Ok((truncated, SupportSet { indices: order }))
}

/// `sigma_s(v)_1`: the `l_1` distance from `v` to the nearest `s`-sparse vector.
pub fn sigma_s_l1(v: &[f64], s: usize) -> Result<f64> {
    let (kept, _) = best_s_term(v, s)?;
    Ok(v.iter().zip(&kept).map(|(x, k)| (x - k).abs()).sum())
}

/// Componentwise soft threshold `sign(x) max(|x| - lambda, 0)`.
pub fn soft_threshold(v: &[f64], lambda: f64) -> Vec<f64> {
    v.iter().map(|&x| soft(x, lambda)).collect()
}

#[inline]
pub(crate) fn soft(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}
