use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rwp_probability::search_exponent;
use super::{p_key, tag, ExperimentOutput};
use crate::error::{Error, Result};
use crate::geometry::{l2, sigma_s_l1};
use crate::model::{Column, ExperimentReport, PExponent, RecoveryProblem, RwpParams};
use crate::properties::{rwp_search, RwpSearchConfig, CERTIFICATION_MARGIN};
use crate::sensing::{apply, gen_compressible_signal, gen_gaussian_matrix, gen_noise, NoiseModel, RngStream};
use crate::solver::{decode, SolverConfig};

/// Slack allowed on the error bound for solver inexactness.
pub const BOUND_SLACK: f64 = 1e-6;

fn default_restarts() -> usize {
    200
}

fn default_tail() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CrosscheckConfig {
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub p: PExponent,
    /// `t = 1/rho`.
    pub rho_inverse: f64,
    /// `alpha = alpha0 * m^{1/p}`.
    pub alpha0: f64,
    pub matrices: usize,
    pub signals_per_matrix: usize,
    pub eps: f64,
    #[serde(default = "default_tail")]
    pub compressible_tail: f64,
    pub master_seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub search: RwpSearchConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl CrosscheckConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid("n/m", "must be positive"));
        }
        if self.s == 0 || self.s > self.n {
            return Err(Error::invalid("s", format!("must lie in [1, {}]", self.n)));
        }
        if !(self.rho_inverse.is_finite() && self.rho_inverse >= 1.0) {
            return Err(Error::invalid("rhoInverse", "must be finite and >= 1"));
        }
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return Err(Error::invalid("alpha0", "must be finite and > 0"));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::invalid("eps", "must be finite and >= 0"));
        }
        if self.matrices == 0 || self.signals_per_matrix == 0 {
            return Err(Error::invalid("matrices/signalsPerMatrix", "must be at least 1"));
        }
        self.p.validate()?;
        self.solver.validate()
    }
}

struct MatrixCheck {
    min_found: f64,
    holds: bool,
}

/// Searches each Gaussian matrix for a robust width violation at
/// `(rho, alpha)` and decodes compressible signals with it. Rows where the
/// search found no violation and `rho <= 1/(4 sqrt s)` are marked applicable;
/// for those the error must satisfy `err <= 4 rho sigma_s(x)_1 + 2 eps / alpha`
/// up to `BOUND_SLACK`.
pub fn recovery_crosscheck(cfg: &CrosscheckConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let (n, m, s) = (cfg.n, cfg.m, cfg.s);
    let rho = 1.0 / cfg.rho_inverse;
    let alpha = cfg.alpha0 * cfg.p.root_of(m as f64);
    let applicable_rho = rho <= 1.0 / (4.0 * (s as f64).sqrt()) + 1e-15;
    let matrix_rng = |k: u64| RngStream::keyed(cfg.master_seed, &[tag::MATRIX, n as u64, m as u64, k]);

    let checks: Vec<MatrixCheck> = (0..cfg.matrices as u64)
        .into_par_iter()
        .map(|k| {
            let phi = gen_gaussian_matrix(m, n, &matrix_rng(k))?;
            let (q, factor) = search_exponent(cfg.p, m);
            let params = RwpParams::new(q, rho, alpha * factor)?;
            let rng = RngStream::keyed(cfg.master_seed, &[tag::SEARCH, n as u64, cfg.rho_inverse.to_bits(), m as u64, k]);
            let verdict = rwp_search(&phi, &params, cfg.restarts, &rng, &cfg.search)?;
            let min_found = verdict.min_found / factor;
            Ok(MatrixCheck {
                min_found,
                holds: min_found >= alpha - CERTIFICATION_MARGIN,
            })
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<(u64, u64)> = (0..cfg.matrices as u64)
        .flat_map(|k| (0..cfg.signals_per_matrix as u64).map(move |j| (k, j)))
        .collect();
    let trials: Vec<(f64, f64, bool)> = tasks
        .par_iter()
        .map(|&(k, j)| {
            let phi = gen_gaussian_matrix(m, n, &matrix_rng(k))?;
            let key = [tag::CROSSCHECK, n as u64, s as u64, m as u64, k, j];
            let x = gen_compressible_signal(n, s, cfg.compressible_tail, &RngStream::keyed(cfg.master_seed, &key))?;
            let noise_rng = RngStream::keyed(cfg.master_seed, &[tag::NOISE, m as u64, p_key(cfg.p), k, j]);
            let e = gen_noise(m, cfg.p, cfg.eps, &noise_rng, NoiseModel::GaussianDirection)?;
            let mut y = apply(&phi, &x)?;
            y.iter_mut().zip(&e).for_each(|(yi, ei)| *yi += ei);
            let sigma = sigma_s_l1(x.as_slice(), s)?;
            let problem = RecoveryProblem::new(phi, y, cfg.eps, cfg.p)?;
            Ok(match decode(&problem, &cfg.solver) {
                Ok(r) => {
                    let diff: Vec<f64> = r.solution.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a - b).collect();
                    (l2(&diff), sigma, r.converged)
                }
                Err(_) => (f64::NAN, sigma, false),
            })
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new(
        "crosscheck",
        cfg.master_seed,
        vec![
            Column::integer("matrix"),
            Column::integer("trial"),
            Column::real("minFound"),
            Column::boolean("rwpHolds"),
            Column::boolean("applicable"),
            Column::real("err"),
            Column::real("sigmaS"),
            Column::real("bound"),
            Column::boolean("boundHolds"),
            Column::boolean("converged"),
        ],
    )?;
    for (&(k, j), &(err, sigma, converged)) in tasks.iter().zip(&trials) {
        let check = &checks[k as usize];
        let bound = 4.0 * rho * sigma + 2.0 * cfg.eps / alpha;
        report.push_row(vec![
            (k as usize).into(),
            (j as usize).into(),
            check.min_found.into(),
            check.holds.into(),
            (check.holds && applicable_rho).into(),
            err.into(),
            sigma.into(),
            bound.into(),
            (err <= bound + BOUND_SLACK).into(),
            converged.into(),
        ])?;
    }
    Ok(ExperimentOutput {
        reports: vec![report],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_has_one_row_per_trial() {
        let cfg = CrosscheckConfig {
            n: 16,
            s: 1,
            m: 12,
            p: PExponent::TWO,
            rho_inverse: 4.0,
            alpha0: 0.05,
            matrices: 2,
            signals_per_matrix: 3,
            eps: 0.01,
            compressible_tail: 0.0,
            master_seed: 9,
            restarts: 10,
            search: RwpSearchConfig::default(),
            solver: SolverConfig::default(),
        };
        let out = recovery_crosscheck(&cfg).unwrap();
        let r = out.primary();
        assert_eq!(r.column_f64("trial").unwrap().len(), 6);
        let holds = r.column_f64("applicable").unwrap();
        let ok = r.column_f64("boundHolds").unwrap();
        for (a, b) in holds.iter().zip(&ok) {
            if *a == 1.0 {
                assert_eq!(*b, 1.0);
            }
        }
    }
}
