//! Both sides of the weighted fractional Poincaré inequality.
//!
//! All integrals are estimated by Monte Carlo over an outer [`Region`]
//! (importance-weighted) with the inner variable drawn in polar coordinates
//! around the outer point.
//!
//! [`Region`]: crate::geometry::Region

mod local;
mod norm;
mod oracle;
mod pairs;
mod quotient;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use local::{local_h, local_h_integral, representation_rhs, INNER_BUDGET};
pub use norm::{inf_lq_norm, inf_lq_norm_in, LqNorm};
pub use oracle::{grid_oracle_full, grid_oracle_seminorm, OracleBracket};
pub use pairs::{
    frac_seminorm_full, frac_seminorm_restricted, full_integral, restricted_integral, PairBank, RadialLaw,
    StoredPair,
};
pub use quotient::{poincare_quotient, poincare_quotient_in, Quotient};

/// Exponents of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FracParams {
    /// Smoothness order, in (0,1).
    pub s: f64,
    pub p: f64,
    pub q: f64,
    /// Weight exponent on the left-hand side.
    pub a: f64,
    /// Exponent of `delta(x,z) = min(d(x), d(z))` on the right-hand side.
    pub b: f64,
    /// Inner radius factor: `|x - z| <= tau d(x)`.
    pub tau: f64,
}

impl Default for FracParams {
    fn default() -> Self {
        Self {
            s: 0.5,
            p: 2.0,
            q: 2.0,
            a: 0.0,
            b: 0.0,
            tau: 0.5,
        }
    }
}

impl FracParams {
    pub fn new(s: f64, p: f64, q: f64, a: f64, b: f64) -> Self {
        Self {
            s,
            p,
            q,
            a,
            b,
            tau: 0.5,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let Self { s, p, q, a, b, tau } = *self;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParams(format!("s must lie in (0,1), got {s}")));
        }
        if !(p >= 1.0 && q >= p && q.is_finite()) {
            return Err(Error::InvalidParams(format!("need 1 <= p <= q < inf, got p={p}, q={q}")));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("a must be >= 0, got {a}")));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParams("b must be finite".into()));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParams(format!("tau must lie in (0,1), got {tau}")));
        }
        Ok(())
    }
}

/// `|t|^p` with the common exponents special-cased.
#[inline]
pub(crate) fn pow_abs(t: f64, p: f64) -> f64 {
    let t = t.abs();
    if p == 2.0 {
        t * t
    } else if p == 1.0 {
        t
    } else {
        t.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(FracParams::default().validate().is_ok());
        assert!(FracParams::new(1.0, 2.0, 2.0, 0.0, 0.0).validate().is_err());
        assert!(FracParams::new(0.5, 2.0, 1.5, 0.0, 0.0).validate().is_err());
        assert!(FracParams::new(0.5, 2.0, 2.0, -1.0, 0.0).validate().is_err());
        assert!(FracParams::default().with_tau(1.0).validate().is_err());
    }
}
