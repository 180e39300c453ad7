use std::time::Instant;

use rand::Rng as _;
use serde_json::json;

use super::{Comparison, ExperimentReport, Tolerances, Verdict};
use crate::error::Result;
use crate::fields::Field;
use crate::functionals::{full_integral, inf_lq_norm, FracParams};
use crate::geometry::{Domain, Point};
use crate::mc::{derive_seed, stream_rng, McConfig};

/// `count` smooth fields cycling through Gaussian bumps, sines and scaled
/// coordinates, with parameters drawn from `seed`.
pub fn random_smooth_fields(domain: &Domain, count: usize, seed: u64) -> Vec<Field> {
    let mut rng = stream_rng(derive_seed(seed, "prop21/fields"), 0);
    let (lo, hi) = domain.bounding_box();
    let n = domain.dim();
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    (0..count)
        .map(|i| match i % 3 {
            0 => Field::GaussianBump {
                center: Point::new(lo.iter().zip(&hi).map(|(a, b)| rng.gen_range(*a..*b))),
                width: extent * rng.gen_range(0.15..0.6),
            },
            1 => Field::Sine {
                axis: rng.gen_range(0..n),
                wavenumber: rng.gen_range(1.0..6.0) / extent,
            },
            _ => Field::Coordinate(rng.gen_range(0..n)).scaled(rng.gen_range(0.5..2.0)),
        })
        .collect()
}

/// Checks `inf_c ||f - c||_p^p <= diam^(n+sp)/|Ω| * full seminorm^p` for each
/// field, allowing `tol.sigma` combined standard errors.
pub fn verify_prop21(
    domain: &Domain,
    fields: &[Field],
    s: f64,
    p: f64,
    mc: &McConfig,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    FracParams::new(s, p, p, 0.0, 0.0).validate()?;
    let n = domain.dim() as f64;
    let diam = domain.diameter();
    let measure = domain.measure().value;
    let constant = diam.powf(n + s * p) / measure;

    let mut report = ExperimentReport::new(
        "verify-prop21",
        json!({ "domain": domain.spec(), "s": s, "p": p, "fields": fields.len(), "mc": mc }),
    );
    report.predict("constant", constant);
    let mut margins = Vec::with_capacity(fields.len());
    for (i, f) in fields.iter().enumerate() {
        let tag = format!("field/{i}");
        let lhs = inf_lq_norm(f, domain, p, 0.0, &mc.child(&format!("{tag}/norm")))?.integral;
        let rhs = full_integral(f, domain, s, p, &mc.child(&format!("{tag}/seminorm")))?.scale(constant);
        let slack = tol.sigma * lhs.std_error.hypot(rhs.std_error);
        let gap = lhs.value - rhs.value;
        margins.push(json!({
            "lhs": lhs.value,
            "lhs_std_error": lhs.std_error,
            "rhs": rhs.value,
            "rhs_std_error": rhs.std_error,
            "divergent": rhs.flags.divergent,
        }));
        let mut verdict = Verdict::judge(format!("field {i}: lhs - rhs"), gap, Comparison::AtMost, 0.0, slack);
        verdict.passed &= !rhs.flags.divergent;
        report.verdict(verdict);
    }
    report.measure("fields", margins);
    report.runtime = start.elapsed();
    Ok(report)
}
