use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{linear_fit, median, p_key, sparsity_scale, tag, ExperimentOutput, TrialGrid};
use crate::error::Result;
use crate::geometry::{l2, sigma_s_l1};
use crate::model::{Column, ExperimentReport, PExponent, RecoveryConstants, RecoveryProblem, Value};
use crate::sensing::{apply, gen_compressible_signal, gen_gaussian_matrix, gen_noise, gen_sparse_signal, RngStream};
use crate::solver::decode;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Cell {
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub p: PExponent,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Trial {
    pub err: f64,
    pub planted_norm: f64,
    pub sigma: f64,
    pub converged: bool,
}

pub(crate) fn cells(grid: &TrialGrid) -> Vec<Cell> {
    let mut out = Vec::new();
    for &n in &grid.ns {
        for &s in &grid.ss {
            if s > n {
                continue;
            }
            for &m in &grid.ms {
                for &p in &grid.ps {
                    for &eps in &grid.epsilons {
                        out.push(Cell { n, s, m, p, eps });
                    }
                }
            }
        }
    }
    out
}

/// Streams: the matrix depends on `(N, m, trial)`, the signal on
/// `(N, s, trial, kind)` and the noise direction on `(m, p, trial)`, so
/// changing `eps` rescales the same noise vector and adding grid values
/// leaves existing cells untouched.
pub(crate) fn run_trial(grid: &TrialGrid, c: Cell, trial: u64, compressible: bool) -> Result<Trial> {
    let seed = grid.master_seed;
    let phi = gen_gaussian_matrix(
        c.m,
        c.n,
        &RngStream::keyed(seed, &[tag::MATRIX, c.n as u64, c.m as u64, trial]),
    )?;
    let signal_rng = RngStream::keyed(seed, &[tag::SIGNAL, c.n as u64, c.s as u64, trial, compressible as u64]);
    let x = if compressible {
        gen_compressible_signal(c.n, c.s, grid.compressible_tail, &signal_rng)?
    } else {
        gen_sparse_signal(c.n, c.s, &signal_rng, grid.signal_model)?
    };
    let noise_rng = RngStream::keyed(seed, &[tag::NOISE, c.m as u64, p_key(c.p), trial]);
    let e = gen_noise(c.m, c.p, c.eps, &noise_rng, grid.noise_model)?;
    let mut y = apply(&phi, &x)?;
    y.iter_mut().zip(&e).for_each(|(yi, ei)| *yi += ei);
    let planted_norm = l2(x.as_slice());
    let sigma = sigma_s_l1(x.as_slice(), c.s)?;
    let problem = RecoveryProblem::new(phi, y, c.eps, c.p)?;
    Ok(match decode(&problem, &grid.solver) {
        Ok(r) => {
            let diff: Vec<f64> = r.solution.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a - b).collect();
            Trial {
                err: l2(&diff),
                planted_norm,
                sigma,
                converged: r.converged,
            }
        }
        Err(_) => Trial {
            err: f64::NAN,
            planted_norm,
            sigma,
            converged: false,
        },
    })
}

fn run_all(grid: &TrialGrid, cells: &[Cell], compressible: impl Fn(&Cell) -> bool + Sync) -> Result<Vec<Vec<Trial>>> {
    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|i| (0..grid.trials_per_cell as u64).map(move |t| (i, t)))
        .collect();
    let flat: Vec<Trial> = tasks
        .par_iter()
        .map(|&(i, t)| run_trial(grid, cells[i], t, compressible(&cells[i])))
        .collect::<Result<_>>()?;
    Ok(flat.chunks(grid.trials_per_cell).map(<[Trial]>::to_vec).collect())
}

fn noise_term(c: &Cell) -> f64 {
    c.eps / c.p.root_of(c.m as f64)
}

fn cell_prefix(c: &Cell) -> Vec<Value> {
    vec![c.n.into(), c.s.into(), c.m.into(), c.p.value().into(), c.eps.into()]
}

fn cell_columns() -> Vec<Column> {
    vec![
        Column::integer("n"),
        Column::integer("s"),
        Column::integer("m"),
        Column::real("p"),
        Column::real("eps"),
    ]
}

/// Success fraction per `(N, s, m, p, eps)` cell and the transition point
/// `m*` per `(N, s, p, eps)` with a least-squares fit of `m*` against
/// `s log(eN/s)` within each `(N, p, eps)` group.
///
/// With `eps = 0` a trial succeeds when it converged with relative error at
/// most `successThreshold`; with `eps > 0` when it converged with
/// `err <= noiseSuccessFactor * eps / m^{1/p}`.
pub fn phase_transition(grid: &TrialGrid) -> Result<ExperimentOutput> {
    grid.validate()?;
    let cells = cells(grid);
    let results = run_all(grid, &cells, |_| false)?;

    let mut cols = cell_columns();
    cols.extend([
        Column::integer("trials"),
        Column::integer("successes"),
        Column::real("successFraction"),
        Column::integer("nonConverged"),
        Column::real("medianRelError"),
    ]);
    let mut report = ExperimentReport::new("phase_transition", grid.master_seed, cols)?;
    let mut fractions = Vec::with_capacity(cells.len());
    for (c, trials) in cells.iter().zip(&results) {
        let ok = trials
            .iter()
            .filter(|t| {
                t.converged
                    && if c.eps == 0.0 {
                        t.err <= grid.success_threshold * t.planted_norm
                    } else {
                        t.err <= grid.noise_success_factor * noise_term(c)
                    }
            })
            .count();
        let rel: Vec<f64> = trials.iter().map(|t| t.err / t.planted_norm).collect();
        let frac = ok as f64 / trials.len() as f64;
        fractions.push(frac);
        let mut row = cell_prefix(c);
        row.extend::<[Value; _]>([
            trials.len().into(),
            ok.into(),
            frac.into(),
            trials.iter().filter(|t| !t.converged).count().into(),
            median(&rel).into(),
        ]);
        report.push_row(row)?;
    }

    // m* per (N, s, p, eps), in first-appearance order.
    let mut keys: Vec<(usize, usize, PExponent, f64)> = Vec::new();
    for c in &cells {
        let k = (c.n, c.s, c.p, c.eps);
        if !keys.iter().any(|q| q.0 == k.0 && q.1 == k.1 && q.2 == k.2 && q.3.to_bits() == k.3.to_bits()) {
            keys.push(k);
        }
    }
    let m_star: Vec<f64> = keys
        .iter()
        .map(|&(n, s, p, eps)| {
            cells
                .iter()
                .zip(&fractions)
                .filter(|(c, f)| c.n == n && c.s == s && c.p == p && c.eps.to_bits() == eps.to_bits() && **f >= 0.9)
                .map(|(c, _)| c.m)
                .min()
                .map_or(f64::NAN, |m| m as f64)
        })
        .collect();
    let mut thresholds = ExperimentReport::new(
        "phase_transition.thresholds",
        grid.master_seed,
        vec![
            Column::integer("n"),
            Column::integer("s"),
            Column::real("p"),
            Column::real("eps"),
            Column::real("mStar"),
            Column::real("sparsityScale"),
            Column::real("fitSlope"),
            Column::real("fitIntercept"),
            Column::real("fitR2"),
            Column::integer("fitPoints"),
        ],
    )?;
    for (i, &(n, s, p, eps)) in keys.iter().enumerate() {
        let (xs, ys): (Vec<f64>, Vec<f64>) = keys
            .iter()
            .zip(&m_star)
            .filter(|(k, m)| k.0 == n && k.2 == p && k.3.to_bits() == eps.to_bits() && m.is_finite())
            .map(|(k, m)| (sparsity_scale(k.0, k.1), *m))
            .unzip();
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        thresholds.push_row(vec![
            n.into(),
            s.into(),
            p.value().into(),
            eps.into(),
            m_star[i].into(),
            sparsity_scale(n, s).into(),
            slope.into(),
            intercept.into(),
            r2.into(),
            xs.len().into(),
        ])?;
    }
    Ok(ExperimentOutput {
        reports: vec![report, thresholds],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BoundConfig {
    pub grid: TrialGrid,
    #[serde(default)]
    pub constants: Option<RecoveryConstants>,
}

/// Per-trial errors against the two terms of the Gaussian recovery bound.
///
/// Cells with `eps = 0` use compressible signals and fit
/// `C' = max err / (sigma_s / sqrt(s))`; cells with `eps > 0` use exactly
/// sparse signals and fit `D' = max err / (eps / m^{1/p})`. With constants
/// given, each trial also records whether the bound holds: with `C', D'`
/// present the Gaussian form, otherwise `err <= C0 sigma_s + C1 eps`.
pub fn recovery_bound_experiment(cfg: &BoundConfig) -> Result<ExperimentOutput> {
    let grid = &cfg.grid;
    grid.validate()?;
    let cells = cells(grid);
    let results = run_all(grid, &cells, |c| c.eps == 0.0)?;

    let bound = |c: &Cell, t: &Trial| -> Option<bool> {
        let k = cfg.constants?;
        let limit = match (k.c_prime(), k.d_prime()) {
            (Some(cp), Some(dp)) => cp * t.sigma / (c.s as f64).sqrt() + dp * noise_term(c),
            _ => k.c0() * t.sigma + k.c1() * c.eps,
        };
        Some(t.err <= limit + 1e-6)
    };

    let mut cols = cell_columns();
    cols.extend([
        Column::integer("trial"),
        Column::boolean("compressible"),
        Column::real("err"),
        Column::real("sigmaS"),
        Column::real("term1"),
        Column::real("term2"),
        Column::boolean("converged"),
    ]);
    if cfg.constants.is_some() {
        cols.push(Column::boolean("boundHolds"));
    }
    let mut trials_report = ExperimentReport::new("recovery_bound", grid.master_seed, cols)?;

    let mut cell_cols = cell_columns();
    cell_cols.extend([
        Column::integer("trials"),
        Column::real("medianErr"),
        Column::real("maxErr"),
        Column::real("fittedCPrime"),
        Column::real("fittedDPrime"),
    ]);
    if cfg.constants.is_some() {
        cell_cols.push(Column::real("boundFraction"));
    }
    let mut cells_report = ExperimentReport::new("recovery_bound.cells", grid.master_seed, cell_cols)?;

    for (c, trials) in cells.iter().zip(&results) {
        let compressible = c.eps == 0.0;
        let mut holds = 0usize;
        for (i, t) in trials.iter().enumerate() {
            let mut row = cell_prefix(c);
            row.extend::<[Value; _]>([
                i.into(),
                compressible.into(),
                t.err.into(),
                t.sigma.into(),
                (t.sigma / (c.s as f64).sqrt()).into(),
                noise_term(c).into(),
                t.converged.into(),
            ]);
            if let Some(b) = bound(c, t) {
                holds += usize::from(b);
                row.push(b.into());
            }
            trials_report.push_row(row)?;
        }
        let errs: Vec<f64> = trials.iter().map(|t| t.err).collect();
        let max_ratio = |denom: &dyn Fn(&Trial) -> f64| {
            trials
                .iter()
                .filter(|t| denom(t) > 0.0)
                .map(|t| t.err / denom(t))
                .fold(f64::NAN, f64::max)
        };
        let (c_fit, d_fit) = if compressible {
            (max_ratio(&|t: &Trial| t.sigma / (c.s as f64).sqrt()), f64::NAN)
        } else {
            (f64::NAN, max_ratio(&|_: &Trial| noise_term(c)))
        };
        let mut row = cell_prefix(c);
        row.extend::<[Value; _]>([
            trials.len().into(),
            median(&errs).into(),
            errs.iter().copied().fold(f64::NAN, f64::max).into(),
            c_fit.into(),
            d_fit.into(),
        ]);
        if cfg.constants.is_some() {
            row.push((holds as f64 / trials.len() as f64).into());
        }
        cells_report.push_row(row)?;
    }
    Ok(ExperimentOutput {
        reports: vec![trials_report, cells_report],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_systems_recover_exactly() {
        let grid = TrialGrid::new(vec![16], vec![1], vec![16], 4, 5);
        let out = phase_transition(&grid).unwrap();
        assert_eq!(out.primary().column_f64("successFraction").unwrap(), vec![1.0]);
    }

    #[test]
    fn too_few_measurements_fail() {
        let grid = TrialGrid::new(vec![32], vec![6], vec![3], 6, 5);
        let out = phase_transition(&grid).unwrap();
        assert_eq!(out.primary().column_f64("successFraction").unwrap(), vec![0.0]);
        assert!(out.secondary("thresholds").unwrap().column_f64("mStar").unwrap()[0].is_nan());
    }

    #[test]
    fn adding_cells_keeps_existing_rows() {
        let small = TrialGrid::new(vec![20], vec![2], vec![12], 3, 9);
        let big = TrialGrid::new(vec![20, 24], vec![1, 2], vec![8, 12], 3, 9);
        let a = phase_transition(&small).unwrap();
        let b = phase_transition(&big).unwrap();
        let row = &a.primary().rows()[0];
        assert!(b.primary().rows().iter().any(|r| r == row));
    }
}
