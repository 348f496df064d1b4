//! Seeded generation of Gaussian measurement matrices, sparse test signals
//! and calibrated noise, plus the forward map `y = Phi x`.
//!
//! Randomness comes from [`RngStream`], a `(masterSeed, streamId)` pair that
//! selects a ChaCha12 key and stream. Normal variates use Box-Muller, so the
//! output depends only on the pair and never on thread scheduling.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::lp_norm;
use crate::linalg;
use crate::model::{PExponent, Provenance, SenseMatrix, Signal};

/// An immutable handle on one reproducible random sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// The stream with the next id under the same master seed.
    pub fn advance(self) -> Self {
        RngStream::new(self.master_seed, self.stream_id.wrapping_add(1))
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        RngStream::new(self.master_seed, stream_id)
    }

    /// A child stream keyed by `label`, independent of its siblings and of
    /// the parent. Used to give each role inside one trial its own sequence.
    pub fn derive(self, label: u64) -> Self {
        let key = splitmix64(self.master_seed ^ splitmix64(self.stream_id ^ splitmix64(label)));
        RngStream::new(key, label)
    }

    /// Stream id built from a tuple of grid coordinates.
    pub fn keyed(master_seed: u64, key: &[u64]) -> Self {
        let id = key.iter().fold(0x1234_5678_9ABC_DEF0_u64, |h, &k| splitmix64(h ^ k));
        RngStream::new(master_seed, id)
    }

    pub fn sampler(self) -> Sampler {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        Sampler { rng, spare: None }
    }
}

/// Mutable cursor over an [`RngStream`].
pub struct Sampler {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl Sampler {
    /// Uniform in `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.open_unit();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn sign(&mut self) -> f64 {
        if self.rng.next_u32() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `k` distinct indices from `0..n`, uniformly, in increasing order.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx = index::sample(&mut self.rng, n, k).into_vec();
        idx.sort_unstable();
        idx
    }

    /// A uniformly random unit vector in `R^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let g = self.normals(n);
            let norm = crate::geometry::lp_norm(&g, PExponent::TWO);
            if norm > 1e-300 {
                return g.into_iter().map(|v| v / norm).collect();
            }
        }
    }
}

/// An `m x N` matrix of i.i.d. standard normals (not rescaled by `1/sqrt(m)`).
pub fn gen_gaussian_matrix(m: usize, n: usize, rng: &RngStream) -> Result<SenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("dimensions", format!("must be positive, got {m}x{n}")));
    }
    let mut s = rng.sampler();
    SenseMatrix::with_provenance(
        m,
        n,
        s.normals(m * n),
        Provenance::Gaussian {
            seed: rng.master_seed,
            stream: rng.stream_id,
        },
    )
}

/// How the nonzero amplitudes of a sparse signal are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MagnitudeModel {
    /// `+-1` with random signs.
    UnitSigns,
    /// Standard normals, redrawn while within `1e-6` of zero.
    GaussianAmplitudes,
}

impl std::str::FromStr for MagnitudeModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" | "unitSigns" | "unit-signs" => Ok(MagnitudeModel::UnitSigns),
            "gaussian" | "gaussianAmplitudes" | "gaussian-amplitudes" => {
                Ok(MagnitudeModel::GaussianAmplitudes)
            }
            other => Err(Error::invalid("model", format!("unknown magnitude model {other:?}"))),
        }
    }
}

/// A signal with exactly `s` nonzeros on a uniformly random support.
pub fn gen_sparse_signal(
    n: usize,
    s: usize,
    rng: &RngStream,
    model: MagnitudeModel,
) -> Result<Signal> {
    if n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    if s == 0 || s > n {
        return Err(Error::invalid("s", format!("must satisfy 1 <= s <= N = {n}, got {s}")));
    }
    let mut smp = rng.sampler();
    let support = smp.subset(n, s);
    let mut x = vec![0.0; n];
    for i in support {
        x[i] = match model {
            MagnitudeModel::UnitSigns => smp.sign(),
            MagnitudeModel::GaussianAmplitudes => loop {
                let v = smp.normal();
                if v.abs() > 1e-6 {
                    break v;
                }
            },
        };
    }
    Signal::new(x)
}

/// An `s`-sparse Gaussian signal plus a dense tail `tail * g` on the
/// off-support coordinates, so `sigma_s(x)_1 > 0` when `tail > 0`.
pub fn gen_compressible_signal(n: usize, s: usize, tail: f64, rng: &RngStream) -> Result<Signal> {
    if !(tail.is_finite() && tail >= 0.0) {
        return Err(Error::invalid("tail", format!("must be finite and >= 0, got {tail}")));
    }
    let head = gen_sparse_signal(n, s, &rng.derive(0), MagnitudeModel::GaussianAmplitudes)?;
    let mut smp = rng.derive(1).sampler();
    let x = head
        .as_slice()
        .iter()
        .map(|&v| if v != 0.0 { v } else { tail * smp.normal() })
        .collect();
    Signal::new(x)
}

/// How a noise vector's direction is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NoiseModel {
    /// A Gaussian vector rescaled to the target norm.
    GaussianDirection,
    /// All mass on one random coordinate with a random sign.
    SingleCoordinate,
}

/// A noise vector `e` of length `m` with `||e||_p = eps`.
pub fn gen_noise(
    m: usize,
    p: PExponent,
    eps: f64,
    rng: &RngStream,
    model: NoiseModel,
) -> Result<Vec<f64>> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid("eps", format!("must be finite and >= 0, got {eps}")));
    }
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if eps == 0.0 {
        return Ok(vec![0.0; m]);
    }
    let mut smp = rng.sampler();
    match model {
        NoiseModel::SingleCoordinate => {
            let mut e = vec![0.0; m];
            let i = smp.below(m);
            e[i] = eps * smp.sign();
            Ok(e)
        }
        NoiseModel::GaussianDirection => {
            let g = loop {
                let g = smp.normals(m);
                if lp_norm(&g, p) > 1e-300 {
                    break g;
                }
            };
            let scale = eps / lp_norm(&g, p);
            Ok(g.into_iter().map(|v| v * scale).collect())
        }
    }
}

/// `Phi x`.
pub fn apply(phi: &SenseMatrix, x: &Signal) -> Result<Vec<f64>> {
    if x.len() != phi.cols() {
        return Err(Error::DimensionMismatch {
            context: "signal length vs matrix columns",
            expected: phi.cols(),
            actual: x.len(),
        });
    }
    let mut out = vec![0.0; phi.rows()];
    linalg::matvec(phi, x.as_slice(), &mut out);
    Ok(out)
}
