use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lp_subgradient, CERTIFICATION_MARGIN};
use crate::error::{Error, Result};
use crate::geometry::{best_s_term, l2, lp_norm};
use crate::linalg::{cholesky, cholesky_solve, gram_rows, matvec, matvec_t};
use crate::model::{PExponent, SenseMatrix, Signal};
use crate::sensing::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NspVerdict {
    /// True only when `witness` violates the inequality by more than the
    /// certification margin.
    pub violation_found: bool,
    /// Unit-norm probe with the largest margin.
    pub witness: Signal,
    /// `||v_S||_2 - psi/sqrt(s) ||v_{S^c}||_1 - tau ||Phi v||_p` at the witness.
    pub margin: f64,
}

fn check_constants(psi: f64, tau: f64) -> Result<()> {
    if !(psi > 0.0 && psi < 1.0) {
        return Err(Error::invalid("psi", format!("must lie in (0, 1), got {psi}")));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid("tau", format!("must be finite and > 0, got {tau}")));
    }
    Ok(())
}

/// Violation margin of the traditional robust null space inequality at `v`,
/// with `S` the best `s`-term support of `v`, after scaling `v` to unit norm.
pub fn nsp_margin(
    phi: &SenseMatrix,
    v: &[f64],
    s: usize,
    p: PExponent,
    psi: f64,
    tau: f64,
) -> Result<f64> {
    if v.len() != phi.cols() {
        return Err(Error::DimensionMismatch {
            context: "probe length vs matrix columns",
            expected: phi.cols(),
            actual: v.len(),
        });
    }
    let norm = l2(v);
    if norm == 0.0 {
        return Err(Error::invalid("v", "probe must be nonzero"));
    }
    let (kept, _) = best_s_term(v, s)?;
    let head = l2(&kept);
    let tail: f64 = v.iter().zip(&kept).map(|(a, b)| (a - b).abs()).sum();
    let mut image = vec![0.0; phi.rows()];
    matvec(phi, v, &mut image);
    let rhs = psi / (s as f64).sqrt() * tail + tau * lp_norm(&image, p);
    Ok((head - rhs) / norm)
}

/// Searches for a unit `v` with `||v_S||_2 > psi/sqrt(s) ||v_{S^c}||_1 + tau ||Phi v||_p`.
///
/// Probes are the basis vectors, `trials` Gaussian vectors and `trials`
/// Gaussian vectors projected onto the null space of `Phi` (when `Phi` has
/// full row rank); the best few are then refined by subgradient ascent on
/// the margin. A reported violation is a certificate; its absence is not.
pub fn nsp_falsify(
    phi: &SenseMatrix,
    s: usize,
    p: PExponent,
    psi: f64,
    tau: f64,
    trials: usize,
    rng: &RngStream,
) -> Result<NspVerdict> {
    check_constants(psi, tau)?;
    let (m, n) = (phi.rows(), phi.cols());
    if s == 0 || s > n {
        return Err(Error::invalid("s", format!("need 1 <= s <= N = {n}, got {s}")));
    }

    let mut probes: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let mut smp = rng.derive(0).sampler();
    for _ in 0..trials {
        probes.push(smp.unit_vector(n));
    }
    if m < n {
        if let Some(factor) = cholesky(&gram_rows(phi), m, 1e-12) {
            let mut smp = rng.derive(1).sampler();
            let mut w = vec![0.0; m];
            let mut back = vec![0.0; n];
            for _ in 0..trials {
                let mut g = smp.normals(n);
                matvec(phi, &g, &mut w);
                cholesky_solve(&factor, m, &mut w);
                matvec_t(phi, &w, &mut back);
                g.iter_mut().zip(&back).for_each(|(gi, bi)| *gi -= bi);
                if l2(&g) > 1e-12 {
                    probes.push(g);
                }
            }
        }
    }

    let mut scored: Vec<(f64, usize)> = probes
        .par_iter()
        .enumerate()
        .map(|(i, v)| Ok((nsp_margin(phi, v, s, p, psi, tau)?, i)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let refined: Vec<(f64, Vec<f64>)> = scored
        .iter()
        .take(8)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, i)| ascend_margin(phi, s, p, psi, tau, probes[*i].clone()))
        .collect::<Result<_>>()?;

    let (mut best_margin, mut best) = (scored[0].0, probes[scored[0].1].clone());
    for (val, v) in refined {
        if val > best_margin {
            best_margin = val;
            best = v;
        }
    }
    let norm = l2(&best);
    best.iter_mut().for_each(|x| *x /= norm);
    let margin = nsp_margin(phi, &best, s, p, psi, tau)?;
    Ok(NspVerdict {
        violation_found: margin > CERTIFICATION_MARGIN,
        witness: Signal::new(best)?,
        margin,
    })
}

fn ascend_margin(
    phi: &SenseMatrix,
    s: usize,
    p: PExponent,
    psi: f64,
    tau: f64,
    mut v: Vec<f64>,
) -> Result<(f64, Vec<f64>)> {
    let (m, n) = (phi.rows(), phi.cols());
    let nv = l2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut best = (nsp_margin(phi, &v, s, p, psi, tau)?, v.clone());
    let mut image = vec![0.0; m];
    let mut sub = vec![0.0; m];
    let mut back = vec![0.0; n];
    let mut step = 0.3;
    let weight = psi / (s as f64).sqrt();
    for _ in 0..150 {
        let (kept, _) = best_s_term(&v, s)?;
        let head = l2(&kept);
        matvec(phi, &v, &mut image);
        lp_subgradient(&image, p, &mut sub);
        matvec_t(phi, &sub, &mut back);
        let mut grad: Vec<f64> = (0..n)
            .map(|i| {
                let local = if kept[i] != 0.0 {
                    kept[i] / head
                } else if v[i] != 0.0 {
                    -weight * v[i].signum()
                } else {
                    0.0
                };
                local - tau * back[i]
            })
            .collect();
        let radial: f64 = grad.iter().zip(&v).map(|(g, x)| g * x).sum();
        grad.iter_mut().zip(&v).for_each(|(g, x)| *g -= radial * x);
        let gn = l2(&grad);
        if gn == 0.0 || head == 0.0 {
            break;
        }
        v.iter_mut().zip(&grad).for_each(|(x, g)| *x += step * g / gn);
        let nv = l2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let val = nsp_margin(phi, &v, s, p, psi, tau)?;
        if val > best.0 {
            best = (val, v.clone());
        }
        step *= 0.97;
    }
    Ok(best)
}
