//! Reproducible desk-scale experiments. Every experiment is a deterministic
//! function of its configuration: per-trial random streams are keyed by grid
//! coordinates, trials run in parallel and rows are assembled in grid order.

mod crosscheck;
mod recovery;
mod rwp_probability;
mod width;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use crosscheck::{recovery_crosscheck, CrosscheckConfig};
pub use recovery::{phase_transition, recovery_bound_experiment, BoundConfig};
pub use rwp_probability::{rwp_probability_experiment, RwpProbabilityConfig};
pub use width::{estimate_width, width_scaling_experiment, WidthScalingConfig};

use crate::error::{Error, Result};
use crate::format::{report_to_csv, report_to_json, write_text, ReportFormat};
use crate::model::{ExperimentReport, PExponent};
use crate::sensing::{MagnitudeModel, NoiseModel};
use crate::solver::SolverConfig;

/// Labels separating the random streams of different roles.
pub(crate) mod tag {
    pub const MATRIX: u64 = 1;
    pub const SIGNAL: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const WIDTH: u64 = 4;
    pub const SEARCH: u64 = 5;
    pub const CROSSCHECK: u64 = 6;
}

/// One or more reports; the first is the primary one. Secondary reports are
/// named `<primary>.<suffix>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub reports: Vec<ExperimentReport>,
}

impl ExperimentOutput {
    pub fn primary(&self) -> &ExperimentReport {
        &self.reports[0]
    }

    /// The report whose name ends in `.suffix`.
    pub fn secondary(&self, suffix: &str) -> Option<&ExperimentReport> {
        self.reports
            .iter()
            .skip(1)
            .find(|r| r.experiment_name().rsplit('.').next() == Some(suffix))
    }
}

/// Writes a report in the requested format, with an optional creation time
/// (JSON only).
pub fn emit_report(
    report: &ExperimentReport,
    path: &Path,
    format: ReportFormat,
    created_at_unix: Option<u64>,
) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report_to_csv(report)?,
        ReportFormat::Json => report_to_json(report, created_at_unix),
    };
    write_text(path, &text)
}

fn default_ps() -> Vec<PExponent> {
    vec![PExponent::TWO]
}

fn default_epsilons() -> Vec<f64> {
    vec![0.0]
}

fn default_success_threshold() -> f64 {
    1e-4
}

fn default_noise_factor() -> f64 {
    10.0
}

fn default_tail() -> f64 {
    0.05
}

fn default_magnitudes() -> MagnitudeModel {
    MagnitudeModel::GaussianAmplitudes
}

fn default_noise() -> NoiseModel {
    NoiseModel::GaussianDirection
}

/// Grid of recovery trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TrialGrid {
    pub ns: Vec<usize>,
    pub ss: Vec<usize>,
    pub ms: Vec<usize>,
    #[serde(default = "default_ps")]
    pub ps: Vec<PExponent>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    pub trials_per_cell: usize,
    pub master_seed: u64,
    /// Relative `l_2` error counted as exact recovery when `eps = 0`.
    #[serde(default = "default_success_threshold")]
    pub success_threshold: f64,
    /// For `eps > 0`, success means `err <= factor * eps / m^{1/p}`.
    #[serde(default = "default_noise_factor")]
    pub noise_success_factor: f64,
    /// Scale of the dense tail of compressible signals.
    #[serde(default = "default_tail")]
    pub compressible_tail: f64,
    #[serde(default = "default_magnitudes")]
    pub signal_model: MagnitudeModel,
    #[serde(default = "default_noise")]
    pub noise_model: NoiseModel,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl TrialGrid {
    /// A grid with defaults for everything but the axes.
    pub fn new(ns: Vec<usize>, ss: Vec<usize>, ms: Vec<usize>, trials_per_cell: usize, master_seed: u64) -> Self {
        TrialGrid {
            ns,
            ss,
            ms,
            ps: default_ps(),
            epsilons: default_epsilons(),
            trials_per_cell,
            master_seed,
            success_threshold: default_success_threshold(),
            noise_success_factor: default_noise_factor(),
            compressible_tail: default_tail(),
            signal_model: default_magnitudes(),
            noise_model: default_noise(),
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("ns", &self.ns), ("ss", &self.ss), ("ms", &self.ms)] {
            if axis.is_empty() || axis.contains(&0) {
                return Err(Error::invalid(name, "must be nonempty with positive entries"));
            }
        }
        if self.ps.is_empty() {
            return Err(Error::invalid("ps", "must be nonempty"));
        }
        for p in &self.ps {
            p.validate()?;
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::invalid("epsilons", "must be nonempty, finite and >= 0"));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::invalid("trialsPerCell", "must be at least 1"));
        }
        for (name, v) in [
            ("successThreshold", self.success_threshold),
            ("noiseSuccessFactor", self.noise_success_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        if !(self.compressible_tail.is_finite() && self.compressible_tail >= 0.0) {
            return Err(Error::invalid("compressibleTail", "must be finite and >= 0"));
        }
        self.solver.validate()
    }
}

/// Stable 64-bit key for an exponent, used in stream keys.
pub(crate) fn p_key(p: PExponent) -> u64 {
    match p {
        PExponent::Finite(q) => q.to_bits(),
        PExponent::Infinity => u64::MAX,
    }
}

/// `s log(e N / s)`.
pub fn sparsity_scale(n: usize, s: usize) -> f64 {
    let (n, s) = (n as f64, s as f64);
    s * (std::f64::consts::E * n / s).ln()
}

/// Median under the total order (NaN sorts last); NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Ordinary least squares `y = slope x + intercept`, with `R^2`. NaNs when
/// fewer than two points or `x` is constant.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len().min(ys.len());
    if k < 2 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mx = xs.iter().sum::<f64>() / k as f64;
    let my = ys.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (a, b, r2) = linear_fit(&xs, &ys);
        assert!((a - 2.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).0.is_nan());
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[1.0, f64::NAN, 0.0]), 1.0);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn grid_config_rejects_unknown_keys() {
        let ok = r#"{"ns":[16],"ss":[1],"ms":[8],"trialsPerCell":2,"masterSeed":1}"#;
        let g: TrialGrid = crate::format::parse_config(ok).unwrap();
        assert_eq!(g, TrialGrid::new(vec![16], vec![1], vec![8], 2, 1));
        let bad = r#"{"ns":[16],"ss":[1],"ms":[8],"trialsPerCell":2,"masterSeed":1,"colour":1}"#;
        assert!(crate::format::parse_config::<TrialGrid>(bad).is_err());
    }
}
