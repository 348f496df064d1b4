//! Validated domain types shared by every module.
//!
//! Every constructor checks the structural invariants of its type and fails
//! with [`Error::InvalidArgument`] (or [`Error::DimensionMismatch`]) when they
//! do not hold. Values are immutable after construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

fn check_finite(name: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(
            name,
            format!("entry {i} is not finite ({})", values[i]),
        )),
        None => Ok(()),
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// A real signal of fixed length `N >= 1` with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("signal", "length must be at least 1"));
        }
        check_finite("signal", &values)?;
        Ok(Signal { values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Signal::new(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Signal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        Signal::new(values).map_err(serde::de::Error::custom)
    }
}

/// Where a measurement matrix came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Provenance {
    Gaussian { seed: u64, stream: u64 },
    Custom,
}

/// Dense `m x N` real measurement operator stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    provenance: Provenance,
}

impl SenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_provenance(rows, cols, data, Provenance::Custom)
    }

    pub fn with_provenance(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(
                "matrix",
                format!("dimensions must be positive, got {rows}x{cols}"),
            ));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::invalid("matrix", "dimensions overflow"))?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected,
                actual: data.len(),
            });
        }
        check_finite("matrix", &data)?;
        Ok(SenseMatrix {
            rows,
            cols,
            data,
            provenance,
        })
    }

    /// Builds a matrix from a list of rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: n,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        SenseMatrix::new(m, n, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        SenseMatrix::new(n, n, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        SenseMatrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Returns `c * self`, keeping the shape and marking the result custom.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        SenseMatrix::new(self.rows, self.cols, self.data.iter().map(|v| v * c).collect())
    }

    /// The `m x |cols|` submatrix made of the given columns, row-major.
    pub fn select_columns(&self, cols: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            out.extend(cols.iter().map(|&j| row[j]));
        }
        out
    }
}

/// The exponent `p` of the residual norm: a finite real `p >= 1` or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub const ONE: PExponent = PExponent::Finite(1.0);
    pub const TWO: PExponent = PExponent::Finite(2.0);

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(PExponent::Infinity);
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid("p", format!("must be >= 1, got {p}")));
        }
        Ok(PExponent::Finite(p))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinity)
    }

    /// The exponent as a float (`f64::INFINITY` for the max norm).
    pub fn value(self) -> f64 {
        match self {
            PExponent::Finite(p) => p,
            PExponent::Infinity => f64::INFINITY,
        }
    }

    /// `m^{1/p}`, the growth rate of `||Phi x||_p` for standard Gaussian rows.
    pub fn root_of(self, m: f64) -> f64 {
        match self {
            PExponent::Finite(p) => m.powf(1.0 / p),
            PExponent::Infinity => 1.0,
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            PExponent::Finite(p) => PExponent::finite(p),
            PExponent::Infinity => Ok(self),
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "max" => return Ok(PExponent::Infinity),
            _ => {}
        }
        if t == "∞" {
            return Ok(PExponent::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| Error::invalid("p", format!("cannot parse {t:?} as an exponent")))?;
        if p.is_nan() {
            return Err(Error::invalid("p", "NaN is not an exponent"));
        }
        PExponent::finite(p)
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExponent::Finite(p) => serializer.serialize_f64(*p),
            PExponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(p) => PExponent::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// One instance of the decoder: `min ||x||_1` subject to `||Phi x - y||_p <= eps`.
#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    matrix: SenseMatrix,
    observations: Vec<f64>,
    noise_level: f64,
    p: PExponent,
}

impl RecoveryProblem {
    pub fn new(
        matrix: SenseMatrix,
        observations: Vec<f64>,
        noise_level: f64,
        p: PExponent,
    ) -> Result<Self> {
        if observations.len() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                context: "observations vs matrix rows",
                expected: matrix.rows(),
                actual: observations.len(),
            });
        }
        check_finite("observations", &observations)?;
        check_nonnegative("eps", noise_level)?;
        let p = p.validate()?;
        Ok(RecoveryProblem {
            matrix,
            observations,
            noise_level,
            p,
        })
    }

    pub fn matrix(&self) -> &SenseMatrix {
        &self.matrix
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn p(&self) -> PExponent {
        self.p
    }
}

/// Output of the decoder together with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecoveryResult {
    pub solution: Signal,
    /// `||solution||_1`.
    pub objective: f64,
    pub residual_lp: f64,
    pub iterations: u64,
    pub converged: bool,
    /// `max(0, residual_lp - eps)`.
    pub feasibility_gap: f64,
}

/// The sparsity CS space `(R^N, Sigma_s, ||.||_1)` with its decomposition bound `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "CsSpaceSparseRaw")]
pub struct CsSpaceSparse {
    ambient_dim: usize,
    sparsity: usize,
    decomposition_bound: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CsSpaceSparseRaw {
    ambient_dim: usize,
    sparsity: usize,
    decomposition_bound: f64,
}

impl TryFrom<CsSpaceSparseRaw> for CsSpaceSparse {
    type Error = Error;

    fn try_from(raw: CsSpaceSparseRaw) -> Result<Self> {
        let space = CsSpaceSparse::new(raw.ambient_dim, raw.sparsity)?;
        if space.decomposition_bound.to_bits() != raw.decomposition_bound.to_bits() {
            return Err(Error::invalid(
                "decompositionBound",
                format!("must equal sqrt(s) = {}", space.decomposition_bound),
            ));
        }
        Ok(space)
    }
}

impl CsSpaceSparse {
    /// `L = sqrt(s)`: the off-support part of any `v` satisfies
    /// `||v_S||_1 <= sqrt(s) ||v||_2`.
    pub fn new(ambient_dim: usize, sparsity: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        if sparsity == 0 || sparsity > ambient_dim {
            return Err(Error::invalid(
                "s",
                format!("must satisfy 1 <= s <= N = {ambient_dim}, got {sparsity}"),
            ));
        }
        Ok(CsSpaceSparse {
            ambient_dim,
            sparsity,
            decomposition_bound: (sparsity as f64).sqrt(),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn decomposition_bound(&self) -> f64 {
        self.decomposition_bound
    }
}

/// Robust width parameters `(p, rho, alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RwpParamsRaw")]
pub struct RwpParams {
    p: PExponent,
    rho: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct RwpParamsRaw {
    p: PExponent,
    rho: f64,
    alpha: f64,
}

impl TryFrom<RwpParamsRaw> for RwpParams {
    type Error = Error;

    fn try_from(raw: RwpParamsRaw) -> Result<Self> {
        RwpParams::new(raw.p, raw.rho, raw.alpha)
    }
}

impl RwpParams {
    pub fn new(p: PExponent, rho: f64, alpha: f64) -> Result<Self> {
        check_positive("rho", rho)?;
        check_positive("alpha", alpha)?;
        Ok(RwpParams {
            p: p.validate()?,
            rho,
            alpha,
        })
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Radius `t = 1/rho` of the `l_1` ball cutting out `T = t B_1 ∩ S^{N-1}`.
    pub fn l1_radius(&self) -> f64 {
        1.0 / self.rho
    }
}

/// The traditional robust NSP pair `(psi, s)` a general constant set was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraditionalNsp {
    pub psi: f64,
    pub s: usize,
}

/// General robust NSP constants `(phi, tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NspConstantsRaw")]
pub struct NspConstants {
    phi: f64,
    tau: f64,
    traditional: Option<TraditionalNsp>,
}

#[derive(Deserialize)]
struct NspConstantsRaw {
    phi: f64,
    tau: f64,
    traditional: Option<TraditionalNsp>,
}

impl TryFrom<NspConstantsRaw> for NspConstants {
    type Error = Error;

    fn try_from(raw: NspConstantsRaw) -> Result<Self> {
        let c = match raw.traditional {
            Some(t) => NspConstants::from_traditional(t.psi, t.s, raw.tau)?,
            None => NspConstants::general(raw.phi, raw.tau)?,
        };
        if c.phi.to_bits() != raw.phi.to_bits() {
            return Err(Error::invalid(
                "phi",
                format!("must equal psi/sqrt(s) + 1 = {}", c.phi),
            ));
        }
        Ok(c)
    }
}

impl NspConstants {
    pub fn general(phi: f64, tau: f64) -> Result<Self> {
        check_positive("phi", phi)?;
        check_positive("tau", tau)?;
        Ok(NspConstants {
            phi,
            tau,
            traditional: None,
        })
    }

    /// `phi = psi / sqrt(s) + 1`.
    pub fn from_traditional(psi: f64, s: usize, tau: f64) -> Result<Self> {
        if !(psi > 0.0 && psi < 1.0) {
            return Err(Error::invalid("psi", format!("must lie in (0, 1), got {psi}")));
        }
        if s == 0 {
            return Err(Error::invalid("s", "must be at least 1"));
        }
        check_positive("tau", tau)?;
        Ok(NspConstants {
            phi: psi / (s as f64).sqrt() + 1.0,
            tau,
            traditional: Some(TraditionalNsp { psi, s }),
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn traditional(&self) -> Option<TraditionalNsp> {
        self.traditional
    }
}

/// How a [`RipEstimate`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RipMethod {
    /// Every support examined, per-support extremes from singular values.
    ExactSvd,
    /// A sample of supports, per-support extremes exact.
    EnumeratedSearch,
    /// Per-support extremes found by local search; `delta` is a lower bound.
    SampledSearch,
}

/// Measured `RIP_{p,2}` constants `(mu, delta)` at sparsity `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RipEstimateRaw")]
pub struct RipEstimate {
    mu: f64,
    delta: f64,
    sparsity: usize,
    p: PExponent,
    method: RipMethod,
    supports_examined: u64,
    min_ratio: f64,
    max_ratio: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RipEstimateRaw {
    mu: f64,
    delta: f64,
    sparsity: usize,
    p: PExponent,
    method: RipMethod,
    supports_examined: u64,
    min_ratio: f64,
    max_ratio: f64,
}

impl TryFrom<RipEstimateRaw> for RipEstimate {
    type Error = Error;

    fn try_from(raw: RipEstimateRaw) -> Result<Self> {
        let est = RipEstimate::from_ratios(
            raw.min_ratio,
            raw.max_ratio,
            raw.sparsity,
            raw.p,
            raw.method,
            raw.supports_examined,
        )?;
        if est.mu.to_bits() != raw.mu.to_bits() || est.delta.to_bits() != raw.delta.to_bits() {
            return Err(Error::invalid(
                "rip estimate",
                "mu/delta disagree with minRatio/maxRatio",
            ));
        }
        Ok(est)
    }
}

impl RipEstimate {
    /// `mu = (max + min)/2`, `delta = (max - min)/(max + min)`.
    pub fn from_ratios(
        min_ratio: f64,
        max_ratio: f64,
        sparsity: usize,
        p: PExponent,
        method: RipMethod,
        supports_examined: u64,
    ) -> Result<Self> {
        check_nonnegative("minRatio", min_ratio)?;
        check_positive("maxRatio", max_ratio)?;
        if min_ratio > max_ratio {
            return Err(Error::invalid(
                "minRatio",
                format!("{min_ratio} exceeds maxRatio {max_ratio}"),
            ));
        }
        if sparsity == 0 {
            return Err(Error::invalid("s", "must be at least 1"));
        }
        let sum = max_ratio + min_ratio;
        Ok(RipEstimate {
            mu: sum / 2.0,
            delta: (max_ratio - min_ratio) / sum,
            sparsity,
            p: p.validate()?,
            method,
            supports_examined,
            min_ratio,
            max_ratio,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn method(&self) -> RipMethod {
        self.method
    }

    pub fn supports_examined(&self) -> u64 {
        self.supports_examined
    }

    pub fn min_ratio(&self) -> f64 {
        self.min_ratio
    }

    pub fn max_ratio(&self) -> f64 {
        self.max_ratio
    }
}

/// Monte Carlo estimate of the Gaussian width of `t B_1 ∩ S^{N-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "WidthEstimateRaw")]
pub struct WidthEstimate {
    pub ambient_dim: usize,
    pub l1_radius: f64,
    pub mean: f64,
    pub std_error: f64,
    pub draws: u64,
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct WidthEstimateRaw {
    ambient_dim: usize,
    l1_radius: f64,
    mean: f64,
    std_error: f64,
    draws: u64,
    seed: u64,
}

impl TryFrom<WidthEstimateRaw> for WidthEstimate {
    type Error = Error;

    fn try_from(r: WidthEstimateRaw) -> Result<Self> {
        WidthEstimate::new(r.ambient_dim, r.l1_radius, r.mean, r.std_error, r.draws, r.seed)
    }
}

impl WidthEstimate {
    pub fn new(
        ambient_dim: usize,
        l1_radius: f64,
        mean: f64,
        std_error: f64,
        draws: u64,
        seed: u64,
    ) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        check_positive("t", l1_radius)?;
        check_nonnegative("mean", mean)?;
        check_nonnegative("stdError", std_error)?;
        if draws == 0 {
            return Err(Error::invalid("draws", "must be at least 1"));
        }
        Ok(WidthEstimate {
            ambient_dim,
            l1_radius,
            mean,
            std_error,
            draws,
            seed,
        })
    }
}

/// Recovery constants: `C0, C1` of the RWP equivalence and optionally the
/// Gaussian-matrix constants `C', D'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RecoveryConstantsRaw")]
pub struct RecoveryConstants {
    c0: f64,
    c1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d_prime: Option<f64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RecoveryConstantsRaw {
    c0: f64,
    c1: f64,
    #[serde(default)]
    c_prime: Option<f64>,
    #[serde(default)]
    d_prime: Option<f64>,
}

impl TryFrom<RecoveryConstantsRaw> for RecoveryConstants {
    type Error = Error;

    fn try_from(r: RecoveryConstantsRaw) -> Result<Self> {
        let mut c = RecoveryConstants::new(r.c0, r.c1)?;
        if let (Some(cp), Some(dp)) = (r.c_prime, r.d_prime) {
            c = c.with_gaussian(cp, dp)?;
        } else if r.c_prime.is_some() || r.d_prime.is_some() {
            return Err(Error::invalid("cPrime/dPrime", "must be given together"));
        }
        Ok(c)
    }
}

impl RecoveryConstants {
    pub fn new(c0: f64, c1: f64) -> Result<Self> {
        check_nonnegative("C0", c0)?;
        check_nonnegative("C1", c1)?;
        Ok(RecoveryConstants {
            c0,
            c1,
            c_prime: None,
            d_prime: None,
        })
    }

    pub fn with_gaussian(self, c_prime: f64, d_prime: f64) -> Result<Self> {
        check_nonnegative("C'", c_prime)?;
        check_nonnegative("D'", d_prime)?;
        Ok(RecoveryConstants {
            c_prime: Some(c_prime),
            d_prime: Some(d_prime),
            ..self
        })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c_prime(&self) -> Option<f64> {
        self.c_prime
    }

    pub fn d_prime(&self) -> Option<f64> {
        self.d_prime
    }
}

/// Column types of an [`ExperimentReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Real,
    Integer,
    Boolean,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ColumnKind,
}

impl Column {
    pub fn real(name: &str) -> Self {
        Column {
            name: name.to_owned(),
            kind: ColumnKind::Real,
        }
    }

    pub fn integer(name: &str) -> Self {
        Column {
            name: name.to_owned(),
            kind: ColumnKind::Integer,
        }
    }

    pub fn boolean(name: &str) -> Self {
        Column {
            name: name.to_owned(),
            kind: ColumnKind::Boolean,
        }
    }
}

/// One cell of a report row.
#[derive(Clone, Copy, Debug)]
pub enum Value {
    Real(f64),
    Integer(i64),
    Boolean(bool),
}

impl PartialEq for Value {
    /// Bitwise equality for reals, so `NaN` rows compare equal to themselves.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Integer(a), Value::Integer(b)) => a == b,
            (Value::Boolean(a), Value::Boolean(b)) => a == b,
            _ => false,
        }
    }
}

impl Value {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Value::Real(_) => ColumnKind::Real,
            Value::Integer(_) => ColumnKind::Integer,
            Value::Boolean(_) => ColumnKind::Boolean,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Real(v) => v,
            Value::Integer(v) => v as f64,
            Value::Boolean(b) => f64::from(u8::from(b)),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Integer(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Integer(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Boolean(v)
    }
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Tabular experiment output. Every row matches the column schema.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    schema_version: u32,
    experiment_name: String,
    master_seed: u64,
    columns: Vec<Column>,
    rows: Vec<Vec<Value>>,
}

impl ExperimentReport {
    pub fn new(experiment_name: &str, master_seed: u64, columns: Vec<Column>) -> Result<Self> {
        Self::with_version(REPORT_SCHEMA_VERSION, experiment_name, master_seed, columns)
    }

    pub fn with_version(
        schema_version: u32,
        experiment_name: &str,
        master_seed: u64,
        columns: Vec<Column>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("columns", "a report needs at least one column"));
        }
        for (i, c) in columns.iter().enumerate() {
            if c.name.is_empty() {
                return Err(Error::invalid("columns", format!("column {i} has an empty name")));
            }
            if columns[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::invalid("columns", format!("duplicate column {:?}", c.name)));
            }
        }
        Ok(ExperimentReport {
            schema_version,
            experiment_name: experiment_name.to_owned(),
            master_seed,
            columns,
            rows: Vec::new(),
        })
    }

    pub fn push_row(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                context: "report row",
                expected: self.columns.len(),
                actual: row.len(),
            });
        }
        for (v, c) in row.iter().zip(&self.columns) {
            if v.kind() != c.kind {
                return Err(Error::invalid(
                    "report row",
                    format!("column {:?} expects {:?}, got {:?}", c.name, c.kind, v),
                ));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn experiment_name(&self) -> &str {
        &self.experiment_name
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// All values of one column as floats.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }
}
