use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial, for_each_subset, lp_subgradient};
use crate::error::{Error, Result};
use crate::geometry::{l1, l2, lp_norm, project_onto_capped_sphere};
use crate::linalg::{matvec, matvec_t};
use crate::model::{PExponent, RwpParams, SenseMatrix, Signal};
use crate::sensing::RngStream;

/// A found value must undercut `alpha` by this much to count as a violation.
pub const CERTIFICATION_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RwpSearchConfig {
    /// Projected subgradient steps per start.
    pub iterations: usize,
    pub initial_step: f64,
    pub final_step: f64,
    /// Sparse sign-pattern starts are used only if there are at most this many.
    pub sparse_start_cap: usize,
}

impl Default for RwpSearchConfig {
    fn default() -> Self {
        RwpSearchConfig {
            iterations: 200,
            initial_step: 0.5,
            final_step: 1e-4,
            sparse_start_cap: 4096,
        }
    }
}

impl RwpSearchConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if !(self.initial_step > 0.0 && self.final_step > 0.0 && self.final_step <= self.initial_step)
        {
            return Err(Error::invalid(
                "step",
                "need 0 < finalStep <= initialStep",
            ));
        }
        Ok(())
    }
}

/// Outcome of a search for small values of `||Phi x||_p` over
/// `T = rho^{-1} B_1 ∩ S^{N-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RwpVerdict {
    /// `||Phi w||_p` recomputed at the witness.
    pub min_found: f64,
    pub witness: Signal,
    /// True only when the witness lies in `T` and undercuts `alpha`; this is a
    /// proof that the property fails. False is heuristic evidence.
    pub violation_certified: bool,
    pub restarts_used: u64,
}

enum Start {
    Random(u64),
    Basis(usize, f64),
    Pattern(Vec<f64>),
}

/// Multi-start projected subgradient descent of `||Phi x||_p` over `T`.
///
/// Starts: `restarts` random unit vectors, every signed basis vector, and
/// when affordable every flat sign pattern on `floor(t^2)` coordinates
/// (one sign fixed, since the objective is even). Each start takes
/// normalised subgradient steps with geometrically shrinking length and
/// retracts onto `T` by the exact nearest-point map.
pub fn rwp_search(
    phi: &SenseMatrix,
    params: &RwpParams,
    restarts: usize,
    rng: &RngStream,
    cfg: &RwpSearchConfig,
) -> Result<RwpVerdict> {
    cfg.validate()?;
    let t = params.l1_radius();
    if !(t >= 1.0) {
        return Err(Error::invalid(
            "rho",
            format!("T is empty: 1/rho = {t} is below 1"),
        ));
    }
    let n = phi.cols();
    let p = params.p();

    let mut starts: Vec<Start> = (0..restarts as u64).map(Start::Random).collect();
    for j in 0..n {
        starts.push(Start::Basis(j, 1.0));
        starts.push(Start::Basis(j, -1.0));
    }
    let k = (t * t + 1e-9).floor().min(n as f64) as usize;
    if k >= 2 {
        let count = binomial(n, k) * 2f64.powi(k as i32 - 1);
        if count <= cfg.sparse_start_cap as f64 {
            let amp = 1.0 / (k as f64).sqrt();
            for_each_subset(n, k, |support| {
                for signs in 0..(1u64 << (k - 1)) {
                    let mut x = vec![0.0; n];
                    for (b, &i) in support.iter().enumerate() {
                        let neg = b > 0 && (signs >> (b - 1)) & 1 == 1;
                        x[i] = if neg { -amp } else { amp };
                    }
                    starts.push(Start::Pattern(x));
                }
            });
        }
    }

    let runs: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|start| {
            let x0 = match start {
                Start::Random(i) => {
                    let v = rng.derive(*i).sampler().unit_vector(n);
                    project_onto_capped_sphere(&v, t)?
                }
                Start::Basis(j, s) => {
                    let mut v = vec![0.0; n];
                    v[*j] = *s;
                    v
                }
                Start::Pattern(v) if l1(v) <= t * (1.0 + 1e-12) => v.clone(),
                Start::Pattern(v) => project_onto_capped_sphere(v, t)?,
            };
            descend(phi, p, t, x0, cfg)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 < runs[best].0 {
            best = i;
        }
    }
    let witness = runs[best].1.clone();
    let mut image = vec![0.0; phi.rows()];
    matvec(phi, &witness, &mut image);
    let min_found = lp_norm(&image, p);
    let in_t = (l2(&witness) - 1.0).abs() <= 1e-8 && l1(&witness) <= t + 1e-8;
    Ok(RwpVerdict {
        min_found,
        witness: Signal::new(witness)?,
        violation_certified: in_t && min_found < params.alpha() - CERTIFICATION_MARGIN,
        restarts_used: starts.len() as u64,
    })
}

fn descend(
    phi: &SenseMatrix,
    p: PExponent,
    t: f64,
    mut x: Vec<f64>,
    cfg: &RwpSearchConfig,
) -> Result<(f64, Vec<f64>)> {
    let (m, n) = (phi.rows(), phi.cols());
    let mut image = vec![0.0; m];
    let mut sub = vec![0.0; m];
    let mut grad = vec![0.0; n];
    matvec(phi, &x, &mut image);
    let mut best_val = lp_norm(&image, p);
    let mut best_x = x.clone();
    let decay = (cfg.final_step / cfg.initial_step).powf(1.0 / cfg.iterations.max(2) as f64);
    let mut step = cfg.initial_step;
    for _ in 0..cfg.iterations {
        if best_val == 0.0 {
            break;
        }
        lp_subgradient(&image, p, &mut sub);
        matvec_t(phi, &sub, &mut grad);
        // Only the tangential part moves along the sphere.
        let radial: f64 = grad.iter().zip(&x).map(|(g, xi)| g * xi).sum();
        grad.iter_mut().zip(&x).for_each(|(g, xi)| *g -= radial * xi);
        let gn = l2(&grad);
        if gn == 0.0 {
            break;
        }
        for (xi, g) in x.iter_mut().zip(&grad) {
            *xi -= step * g / gn;
        }
        x = project_onto_capped_sphere(&x, t)?;
        matvec(phi, &x, &mut image);
        let val = lp_norm(&image, p);
        if val < best_val {
            best_val = val;
            best_x.copy_from_slice(&x);
        }
        step *= decay;
    }
    Ok((best_val, best_x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_is_always_violated() {
        let phi = SenseMatrix::zeros(3, 5).unwrap();
        let params = RwpParams::new(PExponent::TWO, 0.5, 0.1).unwrap();
        let v = rwp_search(&phi, &params, 5, &RngStream::new(1, 0), &RwpSearchConfig::default())
            .unwrap();
        assert_eq!(v.min_found, 0.0);
        assert!(v.violation_certified);
    }

    #[test]
    fn scaled_identity_has_constant_image_norm() {
        let phi = SenseMatrix::identity(4).unwrap().scaled(0.7).unwrap();
        for (alpha, violated) in [(0.5, false), (0.8, true)] {
            let params = RwpParams::new(PExponent::TWO, 0.6, alpha).unwrap();
            let v =
                rwp_search(&phi, &params, 10, &RngStream::new(2, 0), &RwpSearchConfig::default())
                    .unwrap();
            assert!((v.min_found - 0.7).abs() < 1e-6);
            assert_eq!(v.violation_certified, violated);
        }
    }

    #[test]
    fn empty_t_is_rejected() {
        let phi = SenseMatrix::identity(2).unwrap();
        let params = RwpParams::new(PExponent::TWO, 1.5, 0.1).unwrap();
        assert!(rwp_search(&phi, &params, 1, &RngStream::new(0, 0), &RwpSearchConfig::default())
            .is_err());
    }

    #[test]
    fn duplicated_columns_expose_a_kernel_vector() {
        let a = [[1.0, 2.0], [0.5, -1.0]];
        let phi = SenseMatrix::from_rows(&[
            vec![a[0][0], a[0][1], a[0][0], a[0][1]],
            vec![a[1][0], a[1][1], a[1][0], a[1][1]],
        ])
        .unwrap();
        let params = RwpParams::new(PExponent::ONE, 1.0 / 2f64.sqrt(), 1e-3).unwrap();
        let v = rwp_search(&phi, &params, 0, &RngStream::new(3, 0), &RwpSearchConfig::default())
            .unwrap();
        assert!(v.violation_certified);
        assert!(v.min_found < 1e-12);
    }
}
