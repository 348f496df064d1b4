use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{median, tag, ExperimentOutput};
use crate::error::{Error, Result};
use crate::model::{Column, ExperimentReport, PExponent, RwpParams};
use crate::properties::{rwp_probability_exponent, rwp_search, RwpSearchConfig, CERTIFICATION_MARGIN};
use crate::sensing::{gen_gaussian_matrix, RngStream};

use super::width::estimate_width;

fn default_restarts() -> usize {
    50
}

fn default_width_draws() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RwpProbabilityConfig {
    pub ns: Vec<usize>,
    /// Values of `t = 1/rho`.
    pub rho_inverses: Vec<f64>,
    pub ms: Vec<usize>,
    pub p: PExponent,
    pub trials: usize,
    /// Threshold multipliers: `alpha = alpha0 * m^{1/p}`.
    pub alpha0s: Vec<f64>,
    pub master_seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub search: RwpSearchConfig,
    #[serde(default = "default_width_draws")]
    pub width_draws: usize,
    #[serde(default)]
    pub u_star: Option<f64>,
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default)]
    pub c1: Option<f64>,
}

impl RwpProbabilityConfig {
    fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns.contains(&0) || self.ms.is_empty() || self.ms.contains(&0) {
            return Err(Error::invalid("ns/ms", "must be nonempty with positive entries"));
        }
        if self.rho_inverses.is_empty() || self.rho_inverses.iter().any(|t| !(t.is_finite() && *t >= 1.0)) {
            return Err(Error::invalid("rhoInverses", "need finite values >= 1"));
        }
        if self.alpha0s.is_empty() || self.alpha0s.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::invalid("alpha0s", "need finite positive values"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        self.p.validate()?;
        Ok(())
    }
}

/// Exponent actually searched and the factor that converts its minimum into
/// a lower bound for the requested norm. For `p = inf` the search runs at
/// `q = log m` (at least 1) and `||v||_inf >= ||v||_q / m^{1/q}`.
pub(crate) fn search_exponent(p: PExponent, m: usize) -> (PExponent, f64) {
    match p {
        PExponent::Infinity => {
            let q = (m as f64).ln().max(1.0);
            (PExponent::Finite(q), (m as f64).powf(1.0 / q))
        }
        finite => (finite, 1.0),
    }
}

struct MatrixOutcome {
    /// Smallest value found, in units of the requested norm.
    min_found: f64,
}

/// Empirical frequency of certified robust width violations for Gaussian
/// matrices over `(N, t, m)` and a sweep of `alpha0`.
///
/// Each matrix is searched once; a violation at `alpha` is recorded when
/// the smallest value found is below `alpha - 1e-9`. The summary report
/// gives, per `(N, t, m)`, the largest violation-free `alpha0`, the estimated
/// width of `T` and `m / w(T)^2`.
pub fn rwp_probability_experiment(cfg: &RwpProbabilityConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.ns {
        for &t in &cfg.rho_inverses {
            for &m in &cfg.ms {
                cells.push((n, t, m));
            }
        }
    }
    let c2 = match (cfg.u_star, cfg.c0, cfg.c1) {
        (Some(u), Some(c0), Some(c1)) => rwp_probability_exponent(u, c0, c1, cfg.p)?,
        (None, None, None) => f64::NAN,
        _ => return Err(Error::invalid("uStar/c0/c1", "give all three or none")),
    };

    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|i| (0..cfg.trials as u64).map(move |k| (i, k)))
        .collect();
    let outcomes: Vec<MatrixOutcome> = tasks
        .par_iter()
        .map(|&(i, k)| {
            let (n, t, m) = cells[i];
            let phi = gen_gaussian_matrix(m, n, &RngStream::keyed(cfg.master_seed, &[tag::MATRIX, n as u64, m as u64, k]))?;
            let (q, factor) = search_exponent(cfg.p, m);
            let params = RwpParams::new(q, 1.0 / t, 1.0)?;
            let rng = RngStream::keyed(cfg.master_seed, &[tag::SEARCH, n as u64, t.to_bits(), m as u64, k]);
            let verdict = rwp_search(&phi, &params, cfg.restarts, &rng, &cfg.search)?;
            Ok(MatrixOutcome {
                min_found: verdict.min_found / factor,
            })
        })
        .collect::<Result<_>>()?;
    let per_cell: Vec<&[MatrixOutcome]> = outcomes.chunks(cfg.trials).collect();

    let mut sweep = ExperimentReport::new(
        "rwp_probability",
        cfg.master_seed,
        vec![
            Column::integer("n"),
            Column::real("t"),
            Column::integer("m"),
            Column::real("p"),
            Column::real("alpha0"),
            Column::real("alpha"),
            Column::integer("trials"),
            Column::integer("violations"),
            Column::real("violationFrequency"),
        ],
    )?;
    let mut summary = ExperimentReport::new(
        "rwp_probability.summary",
        cfg.master_seed,
        vec![
            Column::integer("n"),
            Column::real("t"),
            Column::integer("m"),
            Column::real("p"),
            Column::real("width"),
            Column::real("widthStdError"),
            Column::real("mOverWidthSq"),
            Column::real("minFoundMin"),
            Column::real("minFoundMedian"),
            Column::real("largestViolationFreeAlpha0"),
            Column::real("c2"),
        ],
    )?;
    for (&(n, t, m), outs) in cells.iter().zip(&per_cell) {
        let scale = cfg.p.root_of(m as f64);
        let mut best_free = f64::NAN;
        for &a0 in &cfg.alpha0s {
            let alpha = a0 * scale;
            let violations = outs.iter().filter(|o| o.min_found < alpha - CERTIFICATION_MARGIN).count();
            if violations == 0 && !(best_free >= a0) {
                best_free = a0;
            }
            sweep.push_row(vec![
                n.into(),
                t.into(),
                m.into(),
                cfg.p.value().into(),
                a0.into(),
                alpha.into(),
                outs.len().into(),
                violations.into(),
                (violations as f64 / outs.len() as f64).into(),
            ])?;
        }
        let w = estimate_width(
            n,
            t,
            cfg.width_draws,
            &RngStream::keyed(cfg.master_seed, &[tag::WIDTH, n as u64, t.to_bits()]),
        )?;
        let mins: Vec<f64> = outs.iter().map(|o| o.min_found).collect();
        summary.push_row(vec![
            n.into(),
            t.into(),
            m.into(),
            cfg.p.value().into(),
            w.mean.into(),
            w.std_error.into(),
            (m as f64 / (w.mean * w.mean)).into(),
            mins.iter().copied().fold(f64::INFINITY, f64::min).into(),
            median(&mins).into(),
            best_free.into(),
            c2.into(),
        ])?;
    }
    Ok(ExperimentOutput {
        reports: vec![sweep, summary],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_uses_log_m() {
        let (q, f) = search_exponent(PExponent::Infinity, 64);
        assert_eq!(q, PExponent::Finite(64f64.ln()));
        assert!((f - std::f64::consts::E).abs() < 1e-12);
        let (q, f) = search_exponent(PExponent::Infinity, 2);
        assert_eq!((q, f), (PExponent::ONE, 2.0));
        assert_eq!(search_exponent(PExponent::TWO, 9), (PExponent::TWO, 1.0));
    }

    #[test]
    fn tiny_thresholds_see_no_violations() {
        let cfg = RwpProbabilityConfig {
            ns: vec![8],
            rho_inverses: vec![1.5],
            ms: vec![16],
            p: PExponent::TWO,
            trials: 2,
            alpha0s: vec![1e-6, 10.0],
            master_seed: 3,
            restarts: 5,
            search: RwpSearchConfig::default(),
            width_draws: 50,
            u_star: None,
            c0: None,
            c1: None,
        };
        let out = rwp_probability_experiment(&cfg).unwrap();
        assert_eq!(out.primary().column_f64("violations").unwrap(), vec![0.0, 2.0]);
        assert_eq!(
            out.secondary("summary").unwrap().column_f64("largestViolationFreeAlpha0").unwrap(),
            vec![1e-6]
        );
    }
}
