//! Sparse recovery with an `l_p` residual constraint, plus tools for probing the
//! matrix properties that govern it: robust width, robust null space and
//! `RIP_{p,2}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the validated domain types.
//! * [`geometry`] has norms, ball projections and best `s`-term machinery.
//! * [`sensing`] generates seeded Gaussian matrices, sparse signals and noise.
//! * [`solver`] is the decoder `argmin ||x||_1 s.t. ||Phi x - y||_p <= eps`.
//! * [`properties`] searches for robust width / NSP violations, estimates RIP
//!   constants and maps constants between the properties.
//! * [`experiments`] runs the reproducible desk-scale studies.
//! * [`format`] reads and writes the on-disk data, config and report files.

pub mod error;
pub mod experiments;
pub mod format;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod properties;
pub mod sensing;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    CsSpaceSparse, ExperimentReport, NspConstants, PExponent, RecoveryConstants, RecoveryProblem,
    RecoveryResult, RipEstimate, RipMethod, RwpParams, SenseMatrix, Signal, WidthEstimate,
};
