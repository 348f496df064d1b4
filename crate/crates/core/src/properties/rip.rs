use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial, for_each_subset, lp_subgradient};
use crate::error::{Error, Result};
use crate::geometry::{l2, lp_norm};
use crate::linalg::{jacobi_svd, matvec, matvec_t};
use crate::model::{PExponent, RipEstimate, RipMethod, SenseMatrix};
use crate::sensing::RngStream;

/// Largest number of supports `enumerate` mode will visit.
pub const ENUMERATION_CAP: f64 = 1e6;

/// Which supports to examine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RipMode {
    Enumerate,
    Sample(usize),
}

impl FromStr for RipMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("enumerate") {
            return Ok(RipMode::Enumerate);
        }
        if let Some(k) = s.strip_prefix("sample:") {
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::invalid("mode", format!("bad sample count in {s:?}")))?;
            if k == 0 {
                return Err(Error::invalid("mode", "sample count must be at least 1"));
            }
            return Ok(RipMode::Sample(k));
        }
        Err(Error::invalid(
            "mode",
            format!("expected \"enumerate\" or \"sample:K\", got {s:?}"),
        ))
    }
}

impl fmt::Display for RipMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RipMode::Enumerate => f.write_str("enumerate"),
            RipMode::Sample(k) => write!(f, "sample:{k}"),
        }
    }
}

impl Serialize for RipMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RipMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Local search budget for the per-support extremes when `p != 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RipSearchConfig {
    /// Random starts per support, on top of the basis vectors.
    pub starts: usize,
    pub iterations: usize,
}

impl Default for RipSearchConfig {
    fn default() -> Self {
        RipSearchConfig {
            starts: 8,
            iterations: 200,
        }
    }
}

/// Extremes of `||Phi_S z||_p / ||z||_2` over supports `S` of size `s`.
///
/// For `p = 2` the per-support extremes are the extreme singular values of
/// `Phi_S`. Otherwise the maximum comes from a generalised power iteration
/// (monotone for a convex objective on the sphere) and the minimum from
/// projected subgradient descent; both are local searches, so `delta` is then
/// a lower bound on the true distortion.
pub fn rip_estimate(
    phi: &SenseMatrix,
    s: usize,
    p: PExponent,
    mode: RipMode,
    rng: &RngStream,
    cfg: &RipSearchConfig,
) -> Result<RipEstimate> {
    let n = phi.cols();
    if s == 0 || s > n {
        return Err(Error::invalid("s", format!("need 1 <= s <= N = {n}, got {s}")));
    }
    let supports: Vec<Vec<usize>> = match mode {
        RipMode::Enumerate => {
            let count = binomial(n, s);
            if count > ENUMERATION_CAP {
                return Err(Error::invalid(
                    "mode",
                    format!("C({n}, {s}) = {count} supports exceeds the enumeration cap {ENUMERATION_CAP}"),
                ));
            }
            let mut all = Vec::with_capacity(count as usize);
            for_each_subset(n, s, |sup| all.push(sup.to_vec()));
            all
        }
        RipMode::Sample(k) => (0..k as u64)
            .map(|i| rng.derive(i).sampler().subset(n, s))
            .collect(),
    };

    let extremes: Vec<(f64, f64)> = supports
        .par_iter()
        .enumerate()
        .map(|(i, sup)| support_extremes(phi, sup, p, &rng.derive(u64::MAX - i as u64), cfg))
        .collect::<Result<_>>()?;
    let min = extremes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let max = extremes.iter().map(|e| e.1).fold(0.0, f64::max);

    let method = match (p, mode) {
        (PExponent::Finite(q), RipMode::Enumerate) if q == 2.0 => RipMethod::ExactSvd,
        (PExponent::Finite(q), RipMode::Sample(_)) if q == 2.0 => RipMethod::EnumeratedSearch,
        _ => RipMethod::SampledSearch,
    };
    RipEstimate::from_ratios(min, max, s, p, method, supports.len() as u64)
}

fn support_extremes(
    phi: &SenseMatrix,
    support: &[usize],
    p: PExponent,
    rng: &RngStream,
    cfg: &RipSearchConfig,
) -> Result<(f64, f64)> {
    let s = support.len();
    let sub = phi.select_columns(support);
    if p == PExponent::TWO {
        let svd = jacobi_svd(&sub, phi.rows(), s);
        return Ok((svd.singular_values[s - 1], svd.singular_values[0]));
    }
    let sub = SenseMatrix::new(phi.rows(), s, sub)?;
    let mut starts: Vec<Vec<f64>> = (0..s)
        .map(|j| {
            let mut e = vec![0.0; s];
            e[j] = 1.0;
            e
        })
        .collect();
    let mut smp = rng.sampler();
    for _ in 0..cfg.starts {
        starts.push(smp.unit_vector(s));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for z in &starts {
        hi = hi.max(ascend(&sub, p, z.clone(), cfg.iterations));
        lo = lo.min(descend_sphere(&sub, p, z.clone(), cfg.iterations));
    }
    Ok((lo.min(hi), hi))
}

/// Generalised power iteration `z <- grad f(z) / ||grad f(z)||` for
/// `f(z) = ||A z||_p`; returns the largest value seen.
fn ascend(a: &SenseMatrix, p: PExponent, mut z: Vec<f64>, iterations: usize) -> f64 {
    let mut image = vec![0.0; a.rows()];
    let mut sub = vec![0.0; a.rows()];
    let mut grad = vec![0.0; a.cols()];
    matvec(a, &z, &mut image);
    let mut best = lp_norm(&image, p);
    for _ in 0..iterations {
        lp_subgradient(&image, p, &mut sub);
        matvec_t(a, &sub, &mut grad);
        let gn = l2(&grad);
        if gn == 0.0 {
            break;
        }
        z.iter_mut().zip(&grad).for_each(|(zi, g)| *zi = g / gn);
        matvec(a, &z, &mut image);
        let val = lp_norm(&image, p);
        if val <= best * (1.0 + 1e-15) {
            best = best.max(val);
            break;
        }
        best = val;
    }
    best
}

/// Projected subgradient descent of `||A z||_p` on the unit sphere.
fn descend_sphere(a: &SenseMatrix, p: PExponent, mut z: Vec<f64>, iterations: usize) -> f64 {
    let mut image = vec![0.0; a.rows()];
    let mut sub = vec![0.0; a.rows()];
    let mut grad = vec![0.0; a.cols()];
    matvec(a, &z, &mut image);
    let mut best = lp_norm(&image, p);
    let mut step = 0.5;
    let decay = (1e-4_f64 / 0.5).powf(1.0 / iterations.max(2) as f64);
    for _ in 0..iterations {
        if best == 0.0 {
            break;
        }
        lp_subgradient(&image, p, &mut sub);
        matvec_t(a, &sub, &mut grad);
        let radial: f64 = grad.iter().zip(&z).map(|(g, zi)| g * zi).sum();
        grad.iter_mut().zip(&z).for_each(|(g, zi)| *g -= radial * zi);
        let gn = l2(&grad);
        if gn == 0.0 {
            break;
        }
        z.iter_mut().zip(&grad).for_each(|(zi, g)| *zi -= step * g / gn);
        let zn = l2(&z);
        z.iter_mut().for_each(|zi| *zi /= zn);
        matvec(a, &z, &mut image);
        best = best.min(lp_norm(&image, p));
        step *= decay;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::gen_gaussian_matrix;

    #[test]
    fn identity_is_an_isometry() {
        let phi = SenseMatrix::identity(5).unwrap();
        for s in 1..=5 {
            let r = rip_estimate(
                &phi,
                s,
                PExponent::TWO,
                RipMode::Enumerate,
                &RngStream::new(0, 0),
                &RipSearchConfig::default(),
            )
            .unwrap();
            assert!((r.mu() - 1.0).abs() < 1e-14);
            assert!(r.delta() < 1e-14);
            assert_eq!(r.method(), RipMethod::ExactSvd);
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("enumerate".parse::<RipMode>().unwrap(), RipMode::Enumerate);
        assert_eq!("sample:25".parse::<RipMode>().unwrap(), RipMode::Sample(25));
        assert!("sample:0".parse::<RipMode>().is_err());
        assert!("all".parse::<RipMode>().is_err());
        assert_eq!(RipMode::Sample(3).to_string(), "sample:3");
    }

    #[test]
    fn rejects_bad_sparsity_and_huge_enumerations() {
        let phi = SenseMatrix::identity(3).unwrap();
        let cfg = RipSearchConfig::default();
        let rng = RngStream::new(0, 0);
        assert!(rip_estimate(&phi, 0, PExponent::TWO, RipMode::Enumerate, &rng, &cfg).is_err());
        assert!(rip_estimate(&phi, 4, PExponent::TWO, RipMode::Enumerate, &rng, &cfg).is_err());
        let wide = SenseMatrix::zeros(1, 64).unwrap();
        assert!(rip_estimate(&wide, 8, PExponent::TWO, RipMode::Enumerate, &rng, &cfg).is_err());
    }

    #[test]
    fn search_brackets_the_two_norm_case() {
        // With p = 2 the local search must land inside the exact extremes.
        let phi = gen_gaussian_matrix(5, 6, &RngStream::new(4, 0)).unwrap();
        let rng = RngStream::new(5, 0);
        let exact =
            rip_estimate(&phi, 2, PExponent::TWO, RipMode::Enumerate, &rng, &Default::default())
                .unwrap();
        let sub = SenseMatrix::new(5, 2, phi.select_columns(&[0, 1])).unwrap();
        let z = vec![0.6, 0.8];
        let hi = ascend(&sub, PExponent::Finite(2.0 + 1e-12), z.clone(), 500);
        let lo = descend_sphere(&sub, PExponent::Finite(2.0 + 1e-12), z, 500);
        assert!(hi <= exact.max_ratio() * (1.0 + 1e-9));
        assert!(lo >= exact.min_ratio() * (1.0 - 1e-9));
    }

    #[test]
    fn general_p_reports_sampled_search() {
        let phi = gen_gaussian_matrix(4, 5, &RngStream::new(8, 0)).unwrap();
        let r = rip_estimate(
            &phi,
            2,
            PExponent::Finite(1.5),
            RipMode::Enumerate,
            &RngStream::new(9, 0),
            &RipSearchConfig::default(),
        )
        .unwrap();
        assert_eq!(r.method(), RipMethod::SampledSearch);
        assert_eq!(r.supports_examined(), 10);
        assert!(r.min_ratio() <= r.max_ratio());
    }
}
