//! Estimation, falsification and constant transfer for the robust width
//! property, the robust null space property and `RIP_{p,2}`.

mod split;
mod nsp;
mod rip;
mod rwp;
mod small_ball;
mod transfer;

pub use split::{split_check, SplitCheck};
pub use nsp::{nsp_falsify, nsp_margin, NspVerdict};
pub use rip::{rip_estimate, RipMode, RipSearchConfig, ENUMERATION_CAP};
pub use rwp::{rwp_search, RwpSearchConfig, RwpVerdict, CERTIFICATION_MARGIN};
pub use small_ball::{
    rwp_probability_exponent, small_ball_alpha, small_ball_lower_bound, SmallBallParams,
};
pub use transfer::{
    nsp_to_rwp, recovery_to_rwp_constants, rip_constants_to_rwp, rip_to_rwp, rwp_to_recovery_constants,
    traditional_to_general_nsp,
};

use crate::geometry::lp_norm;
use crate::model::PExponent;

/// A subgradient of `||.||_p` at `v`, written into `out`; zero at `v = 0`.
pub(crate) fn lp_subgradient(v: &[f64], p: PExponent, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let norm = lp_norm(v, p);
    if norm == 0.0 {
        return;
    }
    match p {
        PExponent::Infinity => {
            let mut k = 0;
            for (i, x) in v.iter().enumerate() {
                if x.abs() > v[k].abs() {
                    k = i;
                }
            }
            out[k] = v[k].signum();
        }
        PExponent::Finite(q) if q == 1.0 => {
            for (o, x) in out.iter_mut().zip(v) {
                if *x != 0.0 {
                    *o = x.signum();
                }
            }
        }
        PExponent::Finite(q) => {
            for (o, x) in out.iter_mut().zip(v) {
                *o = x.signum() * (x.abs() / norm).powf(q - 1.0);
            }
        }
    }
}

/// `C(n, k)` as a float, saturating at infinity.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
