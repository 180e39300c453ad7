//! Reproducible numerical studies built on the functionals and thresholds.

mod bisection;
mod cusp;
mod mushroom;
mod prop21;
mod sweep;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub use bisection::{threshold_bisection, BisectionOutcome, BisectionStatus, Study};
pub use cusp::{cusp_divergence_study, CuspBanks, CuspSetup, ShellExponents};
pub use mushroom::{mushroom_scaling_study, MushroomSetup, MushroomSeries, TrendClass};
pub use prop21::{random_smooth_fields, verify_prop21};
pub use sweep::{sweep, sweep_to_writer, SweepGrid, SweepRow};

/// Judgement thresholds shared by the studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Monte Carlo slack, in standard errors.
    pub sigma: f64,
    /// Numerator slope of the mushroom study.
    pub numerator_slope: f64,
    /// Seminorm slope of the mushroom study.
    pub seminorm_slope: f64,
    /// Half-width of the "no trend" band of the log-quotient slope.
    pub dead_zone: f64,
    /// Required slope of a growing quotient.
    pub growth_slope: f64,
    /// Shell exponents of the cusp study.
    pub exponent: f64,
    /// Fitted exponent above which a truncated integral counts as convergent.
    pub convergence: f64,
    pub mushroom_threshold: f64,
    pub cusp_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            numerator_slope: 0.1,
            seminorm_slope: 0.15,
            dead_zone: 0.05,
            growth_slope: 0.1,
            exponent: 0.15,
            convergence: -0.05,
            mushroom_threshold: 0.15,
            cusp_threshold: 0.1,
        }
    }
}

/// Least-squares line through `(ln scale, ln value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope from the residuals.
    pub slope_std_error: f64,
    pub points: Vec<(f64, f64)>,
}

pub const MIN_FIT_POINTS: usize = 4;

impl ScalingFit {
    pub fn fit(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < MIN_FIT_POINTS {
            return Err(Error::Precondition(format!(
                "a scaling fit needs at least {MIN_FIT_POINTS} points, got {}",
                points.len()
            )));
        }
        if let Some(&(s, v)) = points.iter().find(|(s, v)| !(*s > 0.0 && *v > 0.0 && s.is_finite() && v.is_finite())) {
            return Err(Error::Precondition(format!("cannot take logs of ({s}, {v})")));
        }
        let logs: Vec<(f64, f64)> = points.iter().map(|(s, v)| (s.ln(), v.ln())).collect();
        let k = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::Precondition("scales must not all coincide".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
        let slope_std_error = (ss_res / (k - 2.0) / sxx).sqrt();
        Ok(Self {
            slope,
            intercept,
            r_squared,
            slope_std_error,
            points: points.to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured - expected| <= tolerance`.
    Within,
    /// `measured >= expected - tolerance`.
    AtLeast,
    /// `measured <= expected + tolerance`.
    AtMost,
}

/// One pass/fail judgement together with what it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
}

impl Verdict {
    pub fn judge(criterion: impl Into<String>, measured: f64, comparison: Comparison, expected: f64, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::Within => (measured - expected).abs() <= tolerance,
            Comparison::AtLeast => measured >= expected - tolerance,
            Comparison::AtMost => measured <= expected + tolerance,
        };
        Self {
            criterion: criterion.into(),
            passed,
            measured,
            expected,
            comparison,
            tolerance,
        }
    }

    pub fn line(&self) -> String {
        let op = match self.comparison {
            Comparison::Within => "within",
            Comparison::AtLeast => "at least",
            Comparison::AtMost => "at most",
        };
        format!(
            "[{}] {}: measured {:.4}, {op} {:.4} (tol {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.measured,
            self.expected,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Value,
    pub measurements: BTreeMap<String, Value>,
    pub fits: BTreeMap<String, ScalingFit>,
    pub predictions: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    /// Wall-clock time; excluded from serialized output so reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub runtime: Duration,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, parameters: Value) -> Self {
        Self {
            name: name.into(),
            parameters,
            measurements: BTreeMap::new(),
            fits: BTreeMap::new(),
            predictions: BTreeMap::new(),
            verdicts: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn measure(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.measurements.insert(key.to_string(), value);
    }

    pub fn predict(&mut self, key: &str, value: f64) {
        self.predictions.insert(key.to_string(), value);
    }

    pub fn verdict(&mut self, verdict: Verdict) {
        self.verdicts.push(verdict);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{} ({:.1}s)\n", self.name, self.runtime.as_secs_f64());
        for v in &self.verdicts {
            out.push_str("  ");
            out.push_str(&v.line());
            out.push('\n');
        }
        out
    }
}

/// Checks that `list` is strictly decreasing, positive and geometric to
/// within 1e-9, returning its ratio.
pub(crate) fn geometric_ratio(list: &[f64], what: &str) -> Result<f64> {
    if list.len() < MIN_FIT_POINTS {
        return Err(Error::Precondition(format!(
            "{what} needs at least {MIN_FIT_POINTS} entries, got {}",
            list.len()
        )));
    }
    if list.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Precondition(format!("{what} entries must be positive")));
    }
    let ratio = list[1] / list[0];
    if ratio >= 1.0 {
        return Err(Error::Precondition(format!("{what} must be decreasing")));
    }
    for w in list.windows(2) {
        if ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("{what} must be geometric")));
        }
    }
    Ok(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_powers() {
        for k in [1.0, 2.0, -0.5] {
            let pts: Vec<(f64, f64)> = (1..=5).map(|i| {
                let r = 0.5f64.powi(i);
                (r, 3.0 * r.powf(k))
            }).collect();
            let fit = ScalingFit::fit(&pts).unwrap();
            assert!((fit.slope - k).abs() < 1e-12);
            assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
            assert!((fit.r_squared - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_rejects_short_or_nonpositive() {
        assert!(ScalingFit::fit(&[(1.0, 1.0), (0.5, 1.0), (0.25, 1.0)]).is_err());
        assert!(ScalingFit::fit(&[(1.0, 1.0), (0.5, 0.0), (0.25, 1.0), (0.1, 1.0)]).is_err());
    }

    #[test]
    fn verdict_comparisons() {
        assert!(Verdict::judge("w", 1.05, Comparison::Within, 1.0, 0.1).passed);
        assert!(!Verdict::judge("w", 1.2, Comparison::Within, 1.0, 0.1).passed);
        assert!(Verdict::judge("l", -0.04, Comparison::AtLeast, 0.0, 0.05).passed);
        assert!(!Verdict::judge("m", 0.2, Comparison::AtMost, 0.0, 0.1).passed);
    }

    #[test]
    fn geometric_lists() {
        assert_eq!(geometric_ratio(&[0.25, 0.125, 0.0625, 0.03125], "r").unwrap(), 0.5);
        assert!(geometric_ratio(&[0.25, 0.125, 0.0625], "r").is_err());
        assert!(geometric_ratio(&[0.25, 0.125, 0.05, 0.01], "r").is_err());
        assert!(geometric_ratio(&[0.1, 0.2, 0.4, 0.8], "r").is_err());
    }
}
