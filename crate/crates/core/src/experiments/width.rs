use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sparsity_scale, tag, ExperimentOutput};
use crate::error::{Error, Result};
use crate::geometry::{l2, linf, support_function_capped_l1};
use crate::model::{Column, ExperimentReport, WidthEstimate};
use crate::sensing::RngStream;

/// Monte Carlo estimate of `w(T) = E sup_{x in T} <g, x>` for
/// `T = t B_1 ∩ S^{N-1}`. Draw `i` uses the stream `rng.derive(i)`.
///
/// # Panics
///
/// If a sample falls outside `[||g||_inf, ||g||_2]`, which would mean the
/// support function evaluation is broken.
pub fn estimate_width(n: usize, t: f64, draws: usize, rng: &RngStream) -> Result<WidthEstimate> {
    if n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    if draws < 2 {
        return Err(Error::invalid("draws", "need at least 2 draws"));
    }
    if !(t.is_finite() && t >= 1.0) {
        return Err(Error::invalid("t", format!("must be finite and >= 1, got {t}")));
    }
    let samples: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let g = rng.derive(i).sampler().normals(n);
            let v = support_function_capped_l1(&g, t)?;
            let (lo, hi) = (linf(&g), l2(&g));
            let slack = 1e-12 * hi;
            assert!(
                v >= lo - slack && v <= hi + slack,
                "support value {v} outside [{lo}, {hi}]"
            );
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let k = draws as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    WidthEstimate::new(n, t, mean, (var / k).sqrt(), draws as u64, rng.master_seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WidthScalingConfig {
    pub ns: Vec<usize>,
    pub ss: Vec<usize>,
    pub draws: usize,
    pub master_seed: u64,
}

/// Width of `sqrt(s) B_1 ∩ S^{N-1}` against `sqrt(s log(eN/s))` over a grid.
/// Cells with `s > N` are skipped. The `empiricalC` column repeats the
/// largest ratio of the run.
pub fn width_scaling_experiment(cfg: &WidthScalingConfig) -> Result<ExperimentOutput> {
    if cfg.ns.is_empty() || cfg.ss.is_empty() {
        return Err(Error::invalid("ns/ss", "must be nonempty"));
    }
    let cells: Vec<(usize, usize)> = cfg
        .ns
        .iter()
        .flat_map(|&n| cfg.ss.iter().map(move |&s| (n, s)))
        .filter(|&(n, s)| s >= 1 && s <= n)
        .collect();
    let estimates = cells
        .iter()
        .map(|&(n, s)| {
            let rng = RngStream::keyed(cfg.master_seed, &[tag::WIDTH, n as u64, s as u64]);
            estimate_width(n, (s as f64).sqrt(), cfg.draws, &rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = cells
        .iter()
        .zip(&estimates)
        .map(|(&(n, s), w)| w.mean / sparsity_scale(n, s).sqrt())
        .collect();
    let c = ratios.iter().copied().fold(f64::NAN, f64::max);

    let mut report = ExperimentReport::new(
        "width_scaling",
        cfg.master_seed,
        vec![
            Column::integer("n"),
            Column::integer("s"),
            Column::real("t"),
            Column::real("width"),
            Column::real("stdError"),
            Column::real("scale"),
            Column::real("ratio"),
            Column::real("empiricalC"),
        ],
    )?;
    for ((&(n, s), w), ratio) in cells.iter().zip(&estimates).zip(&ratios) {
        report.push_row(vec![
            n.into(),
            s.into(),
            w.l1_radius.into(),
            w.mean.into(),
            w.std_error.into(),
            sparsity_scale(n, s).sqrt().into(),
            (*ratio).into(),
            c.into(),
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
    fn width_is_monotone_in_t_for_fixed_draws() {
        let rng = RngStream::new(3, 0);
        let a = estimate_width(20, 1.5, 200, &rng).unwrap();
        let b = estimate_width(20, 2.5, 200, &rng).unwrap();
        assert!(a.mean <= b.mean);
    }

    #[test]
    fn rejects_small_radius_and_too_few_draws() {
        let rng = RngStream::new(3, 0);
        assert!(estimate_width(4, 0.9, 10, &rng).is_err());
        assert!(estimate_width(4, 1.0, 1, &rng).is_err());
    }
}
