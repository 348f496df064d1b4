use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::gaussian_tail;
use crate::model::PExponent;

/// Inputs of the small-ball lower bound for `F = {<., x> : x in T}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SmallBallParams {
    pub u: f64,
    /// Concentration parameter of the bound.
    pub deviation: f64,
    pub m: usize,
    pub p: PExponent,
    /// Gaussian width of `T`.
    pub width: f64,
}

impl SmallBallParams {
    fn validate(&self) -> Result<f64> {
        if !(self.u.is_finite() && self.u > 0.0) {
            return Err(Error::invalid("u", format!("must be finite and > 0, got {}", self.u)));
        }
        if !(self.deviation.is_finite() && self.deviation >= 0.0) {
            return Err(Error::invalid("t", "deviation must be finite and >= 0"));
        }
        if self.m == 0 {
            return Err(Error::invalid("m", "must be at least 1"));
        }
        if !(self.width.is_finite() && self.width >= 0.0) {
            return Err(Error::invalid("width", "must be finite and >= 0"));
        }
        match self.p {
            PExponent::Finite(q) if q.is_finite() && q >= 1.0 => Ok(q),
            _ => Err(Error::invalid(
                "p",
                "the small-ball bound needs finite p; compare against exponent log m instead",
            )),
        }
    }

    /// `P(|G| >= 2u) - (4/u) w / sqrt(m) - t / sqrt(m)`.
    fn inner(&self) -> f64 {
        let root_m = (self.m as f64).sqrt();
        gaussian_tail(2.0 * self.u) - 4.0 / self.u * self.width / root_m - self.deviation / root_m
    }
}

/// `u^p (P(|G| >= 2u) - (4/u) w / sqrt(m) - t / sqrt(m))`, possibly negative.
pub fn small_ball_lower_bound(sb: &SmallBallParams) -> Result<f64> {
    let p = sb.validate()?;
    Ok(sb.u.powf(p) * sb.inner())
}

/// The implied width threshold `m^{1/p} u max(0, inner)^{1/p}`.
pub fn small_ball_alpha(sb: &SmallBallParams) -> Result<f64> {
    let p = sb.validate()?;
    Ok((sb.m as f64).powf(1.0 / p) * sb.u * sb.inner().max(0.0).powf(1.0 / p))
}

/// Exponent `c2 = 2 (1/2 - 4/(u sqrt(c0)) - (c1/u)^p)^2` of the failure
/// probability `2 exp(-c2 m)`.
pub fn rwp_probability_exponent(u_star: f64, c0: f64, c1: f64, p: PExponent) -> Result<f64> {
    for (name, v) in [("uStar", u_star), ("c0", c0), ("c1", c1)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let q = match p {
        PExponent::Finite(q) => q,
        PExponent::Infinity => {
            return Err(Error::invalid("p", "the exponent formula needs finite p"))
        }
    };
    let inner = 0.5 - 4.0 / (u_star * c0.sqrt()) - (c1 / u_star).powf(q);
    Ok(2.0 * inner * inner)
}
