use serde::{Deserialize, Serialize};

use super::norm::{inf_lq_norm_in, LqNorm};
use super::pairs::restricted_integral;
use super::FracParams;
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::geometry::{Domain, Region};
use crate::mc::{Estimate, McConfig};

/// `inf_c ||f - c||_{L^q(d^a)}` over the restricted weighted seminorm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quotient {
    pub value: Estimate,
    pub numerator: LqNorm,
    /// Restricted seminorm (already raised to `1/p`).
    pub seminorm: Estimate,
}

pub fn poincare_quotient(f: &Field, domain: &Domain, params: &FracParams, mc: &McConfig) -> Result<Quotient> {
    poincare_quotient_in(f, &Region::whole(domain), params, mc)
}

/// Both sides use sub-seeds split from `mc.seed` (`"norm"`, `"seminorm"`).
pub fn poincare_quotient_in(f: &Field, region: &Region, params: &FracParams, mc: &McConfig) -> Result<Quotient> {
    params.validate()?;
    let integral = restricted_integral(f, region, params, &mc.child("seminorm"))?;
    if integral.value == 0.0 {
        return Err(Error::UndefinedQuotient);
    }
    let seminorm = integral.powf(1.0 / params.p);
    let numerator = inf_lq_norm_in(f, region, params.q, params.a, &mc.child("norm"))?;
    let ratio = numerator.value.value / seminorm.value;
    let rel = numerator.value.relative_error().hypot(seminorm.relative_error());
    let value = Estimate {
        value: ratio,
        std_error: ratio * rel,
        n_effective: seminorm.n_effective.min(numerator.value.n_effective),
        flags: seminorm.flags.clone(),
    };
    Ok(Quotient {
        value,
        numerator,
        seminorm,
    })
}
