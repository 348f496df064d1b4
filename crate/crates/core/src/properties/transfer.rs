//! Exact constant maps between the traditional and general null space
//! properties, `RIP_{p,2}`, the robust width property and the recovery
//! guarantee.

use crate::error::{Error, Result};
use crate::model::{CsSpaceSparse, NspConstants, PExponent, RecoveryConstants, RipEstimate, RwpParams};

/// `phi = psi / sqrt(s) + 1`, `tau` unchanged.
pub fn traditional_to_general_nsp(psi: f64, s: usize, tau: f64) -> Result<NspConstants> {
    NspConstants::from_traditional(psi, s, tau)
}

/// `rho = 2 phi`, `alpha = 1 / (2 tau)`.
pub fn nsp_to_rwp(c: &NspConstants, p: PExponent) -> Result<RwpParams> {
    RwpParams::new(p, 2.0 * c.phi(), 1.0 / (2.0 * c.tau()))
}

/// `rho = 3 / sqrt(s)`, `alpha = (1/3 - delta) mu`; needs `delta < 1/3`.
pub fn rip_to_rwp(r: &RipEstimate, s: usize) -> Result<RwpParams> {
    rip_constants_to_rwp(r.mu(), r.delta(), s, r.p())
}

/// [`rip_to_rwp`] from bare constants.
pub fn rip_constants_to_rwp(mu: f64, delta: f64, s: usize, p: PExponent) -> Result<RwpParams> {
    if s == 0 {
        return Err(Error::invalid("s", "must be at least 1"));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid("mu", format!("must be finite and > 0, got {mu}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta", format!("must be >= 0, got {delta}")));
    }
    if delta >= 1.0 / 3.0 {
        return Err(Error::invalid(
            "delta",
            format!("RIP too weak: delta = {delta} is not below 1/3"),
        ));
    }
    RwpParams::new(p, 3.0 / (s as f64).sqrt(), (1.0 / 3.0 - delta) * mu)
}

/// `C0 = 4 rho`, `C1 = 2 / alpha`; needs `rho <= 1 / (4 L)`.
pub fn rwp_to_recovery_constants(
    params: &RwpParams,
    space: &CsSpaceSparse,
) -> Result<RecoveryConstants> {
    let limit = 1.0 / (4.0 * space.decomposition_bound());
    if params.rho() > limit {
        return Err(Error::invalid(
            "rho",
            format!("{} exceeds 1/(4L) = {limit}", params.rho()),
        ));
    }
    RecoveryConstants::new(4.0 * params.rho(), 2.0 / params.alpha())
}

/// `rho = 2 C0`, `alpha = 1 / (2 C1)`.
pub fn recovery_to_rwp_constants(c: &RecoveryConstants, p: PExponent) -> Result<RwpParams> {
    if !(c.c0() > 0.0) {
        return Err(Error::invalid("C0", "must be > 0"));
    }
    if !(c.c1() > 0.0) {
        return Err(Error::invalid("C1", "must be > 0"));
    }
    RwpParams::new(p, 2.0 * c.c0(), 1.0 / (2.0 * c.c1()))
}
