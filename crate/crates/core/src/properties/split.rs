use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{best_s_term, l1, l2, lp_norm};
use crate::linalg::matvec;
use crate::model::{PExponent, SenseMatrix};

/// Both inequalities of the tail split for a vector with `||x||_2 > rho ||x||_1`:
/// `||x - x_S||_2 < ||x||_2 / (rho sqrt(s))` and
/// `||Phi (x - x_S)||_p < (1 + delta) mu ||x||_2 / (rho sqrt(s))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitCheck {
    pub l2_bound: bool,
    pub image_bound: bool,
    /// Right side minus left side of the `l_2` inequality.
    pub l2_slack: f64,
    pub image_slack: f64,
}

/// Evaluates the tail split at `x` with `S` its best `s`-term support.
///
/// The upper `RIP_{p,2}` inequality at `(mu, delta, s)` is assumed, not
/// checked.
#[allow(clippy::too_many_arguments)]
pub fn split_check(
    phi: &SenseMatrix,
    x: &[f64],
    s: usize,
    rho: f64,
    mu: f64,
    delta: f64,
    p: PExponent,
) -> Result<SplitCheck> {
    if x.len() != phi.cols() {
        return Err(Error::DimensionMismatch {
            context: "vector length vs matrix columns",
            expected: phi.cols(),
            actual: x.len(),
        });
    }
    if !(rho > 0.0 && mu > 0.0 && delta >= 0.0) {
        return Err(Error::invalid("rho/mu/delta", "need rho > 0, mu > 0, delta >= 0"));
    }
    let norm = l2(x);
    if !(norm > rho * l1(x)) {
        return Err(Error::invalid(
            "x",
            format!("hypothesis fails: ||x||_2 = {norm} is not above rho ||x||_1 = {}", rho * l1(x)),
        ));
    }
    let (kept, _) = best_s_term(x, s)?;
    let rest: Vec<f64> = x.iter().zip(&kept).map(|(a, b)| a - b).collect();
    let scale = norm / (rho * (s as f64).sqrt());
    let l2_slack = scale - l2(&rest);
    let mut image = vec![0.0; phi.rows()];
    matvec(phi, &rest, &mut image);
    let image_slack = (1.0 + delta) * mu * scale - lp_norm(&image, p);
    Ok(SplitCheck {
        l2_bound: l2_slack > 0.0,
        image_bound: image_slack > 0.0,
        l2_slack,
        image_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_vector_has_full_slack() {
        let phi = SenseMatrix::identity(4).unwrap();
        let r = split_check(&phi, &[0.0, 1.0, 0.0, 0.0], 1, 0.5, 1.0, 0.0, PExponent::TWO)
            .unwrap();
        assert!(r.l2_bound && r.image_bound);
        assert_eq!(r.l2_slack, 2.0);
    }

    #[test]
    fn hypothesis_is_enforced() {
        let phi = SenseMatrix::identity(2).unwrap();
        assert!(split_check(&phi, &[1.0, 1.0], 1, 1.0, 1.0, 0.0, PExponent::TWO).is_err());
    }
}
