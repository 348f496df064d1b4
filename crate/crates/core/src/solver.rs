//! The decoder `argmin ||x||_1 subject to ||Phi x - y||_p <= eps`.
//!
//! [`decode`] runs a primal-dual splitting (Chambolle-Pock) on
//! `min ||x||_1 + I_C(Phi x)` with `C = y + eps B_p`: the primal step is a
//! soft threshold, the dual step goes through the Moreau identity and a
//! projection onto the `eps`-radius `l_p` ball. The problem is first rescaled
//! so that `||Phi|| = 1` and `||y||_2 = 1`, which makes every tolerance
//! scale-free. When `Phi` has full row rank the final iterate gets a
//! minimum-norm correction that lands its residual inside the ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{l1, lp_norm, project_p_ball, soft};
use crate::linalg::{self, cholesky, cholesky_solve, gram_rows, jacobi_svd, matvec, matvec_t};
use crate::model::{PExponent, RecoveryProblem, RecoveryResult, SenseMatrix, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: u64,
    /// Absolute tolerance on `residual_lp - eps`.
    pub feasibility_tol: f64,
    /// Tolerance on the sup-norm displacement of the normalised iterates.
    pub fixed_point_tol: f64,
    /// Fraction of the largest stable step, in `(0, 1]`.
    pub step_scale: f64,
    /// `||Phi||_2` if known; otherwise 100 power iterations estimate it.
    pub operator_norm_estimate: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 20_000,
            feasibility_tol: 1e-8,
            fixed_point_tol: 1e-9,
            step_scale: 0.95,
            operator_norm_estimate: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("maxIterations", "must be at least 1"));
        }
        for (name, v) in [
            ("feasibilityTol", self.feasibility_tol),
            ("fixedPointTol", self.fixed_point_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return Err(Error::invalid(
                "stepScale",
                format!("must lie in (0, 1], got {}", self.step_scale),
            ));
        }
        if let Some(l) = self.operator_norm_estimate {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::invalid(
                    "operatorNormEstimate",
                    format!("must be finite and > 0, got {l}"),
                ));
            }
        }
        Ok(())
    }
}

/// `||Phi x - y||_p`.
pub fn residual_lp(problem: &RecoveryProblem, x: &Signal) -> Result<f64> {
    let phi = problem.matrix();
    if x.len() != phi.cols() {
        return Err(Error::DimensionMismatch {
            context: "signal length vs matrix columns",
            expected: phi.cols(),
            actual: x.len(),
        });
    }
    Ok(residual_of(phi, problem.observations(), x.as_slice(), problem.p()))
}

fn residual_of(phi: &SenseMatrix, y: &[f64], x: &[f64], p: PExponent) -> f64 {
    let mut r = vec![0.0; phi.rows()];
    matvec(phi, x, &mut r);
    r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= yi);
    lp_norm(&r, p)
}

/// Lower bound on `||v||_p` from `||v||_2` for `v` in `R^m`.
fn lp_from_l2_lower(l2: f64, m: usize, p: PExponent) -> f64 {
    match p {
        PExponent::Finite(q) if q <= 2.0 => l2,
        PExponent::Finite(q) => l2 * (m as f64).powf(1.0 / q - 0.5),
        PExponent::Infinity => l2 / (m as f64).sqrt(),
    }
}

/// Closed-form minimiser for `Phi = I` and `p` in `{1, inf}`.
///
/// For `p = inf` the constraint decouples and each coordinate is
/// soft-thresholded by `eps`. For `p = 1` any allocation of an `l_1`
/// shrinkage budget of `eps` is optimal; the canonical one shrinks
/// coordinates in order of decreasing magnitude (lower index first on ties),
/// each to zero before moving on.
pub fn decode_identity_closed_form(y: &[f64], eps: f64, p: PExponent) -> Result<Signal> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid("eps", format!("must be finite and >= 0, got {eps}")));
    }
    match p {
        PExponent::Infinity => Signal::new(y.iter().map(|&v| soft(v, eps)).collect()),
        PExponent::Finite(q) if q == 1.0 => {
            let mut order: Vec<usize> = (0..y.len()).collect();
            order.sort_by(|&a, &b| y[b].abs().total_cmp(&y[a].abs()).then(a.cmp(&b)));
            let mut x = y.to_vec();
            let mut budget = eps;
            for i in order {
                if budget <= 0.0 {
                    break;
                }
                let cut = budget.min(x[i].abs());
                x[i] -= cut.copysign(x[i]);
                budget -= cut;
            }
            Signal::new(x)
        }
        other => Err(Error::invalid(
            "p",
            format!("identity closed form exists only for p = 1 or inf, got {other}"),
        )),
    }
}

/// Solves `min ||x||_1` subject to `||Phi x - y||_p <= eps`.
///
/// Returns [`Error::Infeasible`] when a certified lower bound on the smallest
/// attainable residual exceeds `eps + feasibility_tol`. Failure to converge
/// is reported through `converged = false`, never as an error.
pub fn decode(problem: &RecoveryProblem, cfg: &SolverConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    let phi = problem.matrix();
    let y = problem.observations();
    let eps = problem.noise_level();
    let p = problem.p();
    let (m, n) = (phi.rows(), phi.cols());
    if let PExponent::Finite(q) = p {
        if q != 1.0 && q != 2.0 {
            // Fail early on exponents the ball projection cannot handle.
            project_p_ball(&[1.0], p, 1.0)?;
        }
    }

    let y_norm = lp_norm(y, p);
    if y_norm <= eps {
        return finish(problem, vec![0.0; n], 0, true, cfg);
    }

    let gram = gram_rows(phi);
    let factor = cholesky(&gram, m, 1e-12);
    if factor.is_none() {
        check_feasible(phi, y, eps, p, cfg.feasibility_tol)?;
    }

    let op_norm = match cfg.operator_norm_estimate {
        Some(l) => l,
        None => linalg::operator_norm(phi, 100),
    };
    if op_norm == 0.0 {
        return Err(Error::Infeasible {
            min_residual: y_norm,
            eps,
        });
    }
    let y_scale = lp_norm(y, PExponent::TWO);
    // x = (y_scale / op_norm) * xs, Phi x - y = y_scale * (A xs - b)
    let inv_l = 1.0 / op_norm;
    let b: Vec<f64> = y.iter().map(|v| v / y_scale).collect();
    let e = eps / y_scale;

    let (xs, iterations, settled) = pdhg(phi, inv_l, &b, e, p, cfg)?;

    let mut x: Vec<f64> = xs.iter().map(|v| v * y_scale * inv_l).collect();
    if let Some(l) = &factor {
        restore_feasibility(phi, y, eps, p, l, &mut x)?;
    }
    finish(problem, x, iterations, settled, cfg)
}

fn finish(
    problem: &RecoveryProblem,
    x: Vec<f64>,
    iterations: u64,
    settled: bool,
    cfg: &SolverConfig,
) -> Result<RecoveryResult> {
    let residual = residual_of(problem.matrix(), problem.observations(), &x, problem.p());
    let gap = (residual - problem.noise_level()).max(0.0);
    Ok(RecoveryResult {
        objective: l1(&x),
        solution: Signal::new(x)?,
        residual_lp: residual,
        iterations,
        converged: settled && gap <= cfg.feasibility_tol,
        feasibility_gap: gap,
    })
}

/// Certifies infeasibility for rank-deficient `Phi`.
///
/// The residual of any `x` splits orthogonally into a column-space part and
/// `y - P y`, so `||Phi x - y||_2 >= ||y - P y||_2`; norm equivalence turns
/// that into an `l_p` lower bound.
fn check_feasible(phi: &SenseMatrix, y: &[f64], eps: f64, p: PExponent, tol: f64) -> Result<()> {
    let svd = jacobi_svd(phi.data(), phi.rows(), phi.cols());
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = top * 1e-12 * phi.rows().max(phi.cols()) as f64;
    let mut r = y.to_vec();
    for (s, u) in svd.singular_values.iter().zip(&svd.left) {
        if *s <= cutoff {
            continue;
        }
        let c = linalg::dot(u, y);
        r.iter_mut().zip(u).for_each(|(ri, ui)| *ri -= c * ui);
    }
    let bound = lp_from_l2_lower(lp_norm(&r, PExponent::TWO), phi.rows(), p);
    if bound > eps + tol {
        return Err(Error::Infeasible {
            min_residual: bound,
            eps,
        });
    }
    Ok(())
}

/// Moves `x` by the least-norm `d` with `Phi (x + d) - y` equal to the
/// projection of the current residual onto the `eps` ball.
fn restore_feasibility(
    phi: &SenseMatrix,
    y: &[f64],
    eps: f64,
    p: PExponent,
    factor: &[f64],
    x: &mut [f64],
) -> Result<()> {
    let m = phi.rows();
    let mut r = vec![0.0; m];
    matvec(phi, x, &mut r);
    r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= yi);
    if lp_norm(&r, p) <= eps {
        return Ok(());
    }
    let target = if eps > 0.0 {
        project_p_ball(&r, p, eps)?
    } else {
        vec![0.0; m]
    };
    let mut w: Vec<f64> = target.iter().zip(&r).map(|(t, ri)| t - ri).collect();
    cholesky_solve(factor, m, &mut w);
    let mut d = vec![0.0; phi.cols()];
    matvec_t(phi, &w, &mut d);
    x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
    Ok(())
}

/// Convergence and restarts are evaluated every this many iterations.
const CHECK_EVERY: u64 = 16;
const RESTART_SUFFICIENT: f64 = 0.2;
const RESTART_NECESSARY: f64 = 0.8;
const RESTART_ARTIFICIAL: f64 = 0.36;

/// Workspace for one Chambolle-Pock step on the normalised problem
/// `min ||x||_1 s.t. ||A x - b||_p <= e`, `A = inv_l * Phi`.
struct Stepper<'a> {
    phi: &'a SenseMatrix,
    inv_l: f64,
    b: &'a [f64],
    e: f64,
    p: PExponent,
    atu: Vec<f64>,
    ax: Vec<f64>,
    shifted: Vec<f64>,
    extrap: Vec<f64>,
}

/// Sup-norm displacement of a step, divided by the step sizes.
#[derive(Clone, Copy)]
struct Movement {
    dx: f64,
    du: f64,
    x_scale: f64,
    u_scale: f64,
    /// Step-size weighted Euclidean displacement, used for restarts.
    weighted: f64,
}

impl Stepper<'_> {
    /// `x+ = soft(x - tau A^T u, tau)`, `u+ = prox_{sigma g*}(u + sigma A (2 x+ - x))`.
    fn step(
        &mut self,
        x: &[f64],
        u: &[f64],
        tau: f64,
        sigma: f64,
        x_out: &mut [f64],
        u_out: &mut [f64],
    ) -> Result<Movement> {
        matvec_t(self.phi, u, &mut self.atu);
        let (mut dx, mut x_scale, mut wx) = (0.0_f64, 0.0_f64, 0.0);
        for j in 0..x.len() {
            let next = soft(x[j] - tau * self.inv_l * self.atu[j], tau);
            let d = next - x[j];
            dx = dx.max(d.abs());
            wx += d * d;
            x_scale = x_scale.max(next.abs());
            x_out[j] = next;
            self.extrap[j] = 2.0 * next - x[j];
        }
        matvec(self.phi, &self.extrap, &mut self.ax);
        for i in 0..u.len() {
            self.ax[i] = u[i] + sigma * self.inv_l * self.ax[i];
            self.shifted[i] = self.ax[i] / sigma - self.b[i];
        }
        let inside = if self.e > 0.0 {
            project_p_ball(&self.shifted, self.p, self.e)?
        } else {
            vec![0.0; u.len()]
        };
        let (mut du, mut u_scale, mut wu) = (0.0_f64, 0.0_f64, 0.0);
        for i in 0..u.len() {
            let next = self.ax[i] - sigma * (self.b[i] + inside[i]);
            let d = next - u[i];
            du = du.max(d.abs());
            wu += d * d;
            u_scale = u_scale.max(next.abs());
            u_out[i] = next;
        }
        Ok(Movement {
            dx: dx / tau,
            du: du / sigma,
            x_scale,
            u_scale,
            weighted: (wx / tau + wu / sigma).sqrt(),
        })
    }
}

fn settled(mv: &Movement, cfg: &SolverConfig) -> bool {
    let eta = cfg.step_scale;
    eta * mv.dx <= cfg.fixed_point_tol * mv.x_scale.max(1.0)
        && eta * mv.du <= cfg.fixed_point_tol * mv.u_scale.max(1.0)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Restarted Chambolle-Pock with adaptive primal weight. Returns the primal
/// iterate, the iteration count and whether the fixed-point test passed.
fn pdhg(
    phi: &SenseMatrix,
    inv_l: f64,
    b: &[f64],
    e: f64,
    p: PExponent,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, u64, bool)> {
    let (m, n) = (phi.rows(), phi.cols());
    let mut st = Stepper {
        phi,
        inv_l,
        b,
        e,
        p,
        atu: vec![0.0; n],
        ax: vec![0.0; m],
        shifted: vec![0.0; m],
        extrap: vec![0.0; n],
    };
    let mut weight = 1.0_f64;
    let mut x = vec![0.0; n];
    let mut u = vec![0.0; m];
    let (mut x_next, mut u_next) = (vec![0.0; n], vec![0.0; m]);
    let (mut x_sum, mut u_sum) = (vec![0.0; n], vec![0.0; m]);
    let (mut x_avg, mut u_avg) = (vec![0.0; n], vec![0.0; m]);
    let (mut x_probe, mut u_probe) = (vec![0.0; n], vec![0.0; m]);
    let (mut x_start, mut u_start) = (x.clone(), u.clone());
    let mut start_residual = f64::INFINITY;
    let mut last_candidate = f64::INFINITY;
    let mut since_restart = 0u64;

    for k in 1..=cfg.max_iterations {
        let tau = cfg.step_scale / weight;
        let sigma = cfg.step_scale * weight;
        let mv = st.step(&x, &u, tau, sigma, &mut x_next, &mut u_next)?;
        std::mem::swap(&mut x, &mut x_next);
        std::mem::swap(&mut u, &mut u_next);
        since_restart += 1;
        x_sum.iter_mut().zip(&x).for_each(|(s, v)| *s += v);
        u_sum.iter_mut().zip(&u).for_each(|(s, v)| *s += v);
        if start_residual.is_infinite() {
            start_residual = mv.weighted;
        }
        if k % CHECK_EVERY != 0 {
            continue;
        }
        if settled(&mv, cfg) {
            return Ok((x, k, true));
        }

        let count = since_restart as f64;
        x_avg.iter_mut().zip(&x_sum).for_each(|(a, s)| *a = s / count);
        u_avg.iter_mut().zip(&u_sum).for_each(|(a, s)| *a = s / count);
        let avg_mv = st.step(&x_avg, &u_avg, tau, sigma, &mut x_probe, &mut u_probe)?;
        let use_avg = avg_mv.weighted < mv.weighted;
        let candidate = if use_avg { avg_mv.weighted } else { mv.weighted };

        let restart = candidate <= RESTART_SUFFICIENT * start_residual
            || (candidate <= RESTART_NECESSARY * start_residual && candidate > last_candidate)
            || since_restart as f64 >= RESTART_ARTIFICIAL * k as f64;
        last_candidate = candidate;
        if !restart {
            continue;
        }
        if use_avg {
            x.copy_from_slice(&x_avg);
            u.copy_from_slice(&u_avg);
        }
        let dx = distance(&x, &x_start);
        let du = distance(&u, &u_start);
        if dx > 1e-10 && du > 1e-10 {
            weight = (0.5 * (du / dx).ln() + 0.5 * weight.ln()).exp();
        }
        x_start.copy_from_slice(&x);
        u_start.copy_from_slice(&u);
        x_sum.iter_mut().for_each(|v| *v = 0.0);
        u_sum.iter_mut().for_each(|v| *v = 0.0);
        since_restart = 0;
        start_residual = f64::INFINITY;
        last_candidate = f64::INFINITY;
    }
    Ok((x, cfg.max_iterations, false))
}
