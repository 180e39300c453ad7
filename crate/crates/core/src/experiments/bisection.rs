use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cusp::{CuspBanks, CuspSetup};
use super::mushroom::{MushroomSeries, MushroomSetup, TrendClass};
use super::{Comparison, ExperimentReport, Tolerances, Verdict};
use crate::error::{Error, Result};
use crate::mc::McConfig;
use crate::thresholds::{holder_b_sharp, mushroom_q_max};

const MAX_STEPS: usize = 60;

/// Which exponent is located, with the parameters held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Study {
    /// Free `q`; detector: trend of the mushroom quotient.
    MushroomQ { setup: MushroomSetup },
    /// Free `b`; detector: whether some scanned `ν` makes the left side
    /// diverge while the right side converges.
    CuspB { setup: CuspSetup, nu_grid: Vec<f64> },
}

impl Study {
    pub fn mushroom_default() -> Self {
        Study::MushroomQ {
            setup: MushroomSetup::default(),
        }
    }

    pub fn cusp_default() -> Self {
        Study::CuspB {
            setup: CuspSetup::default(),
            nu_grid: (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect(),
        }
    }

    pub fn default_bracket(&self) -> (f64, f64) {
        match self {
            Study::MushroomQ { .. } => (1.1, 2.0),
            Study::CuspB { .. } => (-0.5, 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BisectionStatus {
    /// The bracket shrank below the tolerance.
    Converged,
    /// The mushroom detector fell inside its dead zone; the estimate is the
    /// point where that happened.
    DeadZone,
    /// The detector disagreed with the expected classification at the
    /// bracket ends; no estimate is produced.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub value: f64,
    /// `true` when the detector placed `value` above the threshold.
    pub above: Option<bool>,
    /// Detector statistic: quotient slope (mushroom) or window width (cusp).
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionOutcome {
    pub analytic: f64,
    pub estimate: Option<f64>,
    pub bracket: (f64, f64),
    pub status: BisectionStatus,
    pub steps: Vec<BisectionStep>,
}

/// Detector answer: `Some(true)` above the threshold, `Some(false)` below,
/// `None` undecided.
type Detector<'a> = Box<dyn FnMut(f64) -> Result<BisectionStep> + 'a>;

fn bisect(mut detect: Detector, analytic: f64, bracket: (f64, f64), tol: f64) -> Result<BisectionOutcome> {
    let (mut lo, mut hi) = bracket;
    let mut steps = Vec::new();
    let outcome = |status, estimate, lo, hi, steps| BisectionOutcome {
        analytic,
        estimate,
        bracket: (lo, hi),
        status,
        steps,
    };
    let at_lo = detect(lo)?;
    let at_hi = detect(hi)?;
    let ends_ok = at_lo.above == Some(false) && at_hi.above == Some(true);
    steps.push(at_lo);
    steps.push(at_hi);
    if !ends_ok {
        return Ok(outcome(BisectionStatus::Inconclusive, None, lo, hi, steps));
    }
    for _ in 0..MAX_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let step = detect(mid)?;
        let above = step.above;
        steps.push(step);
        match above {
            Some(true) => hi = mid,
            Some(false) => lo = mid,
            None => return Ok(outcome(BisectionStatus::DeadZone, Some(mid), lo, hi, steps)),
        }
    }
    Ok(outcome(BisectionStatus::Converged, Some(0.5 * (lo + hi)), lo, hi, steps))
}

/// Locates a threshold exponent empirically by bisection on a detector and
/// compares it with the analytic value.
pub fn threshold_bisection(
    study: &Study,
    bracket: (f64, f64),
    mc: &McConfig,
    tol: f64,
    tolerances: &Tolerances,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    if !(bracket.0 < bracket.1 && tol > 0.0) {
        return Err(Error::Precondition("need lo < hi and a positive tolerance".into()));
    }
    let (analytic, allowed) = match study {
        Study::MushroomQ { setup } => (
            mushroom_q_max(2, setup.a, setup.p, setup.b, setup.s, setup.beta)?
                .value
                .ok_or_else(|| Error::Precondition("no finite q threshold".into()))?,
            tolerances.mushroom_threshold,
        ),
        Study::CuspB { setup, .. } => (
            holder_b_sharp(2, setup.p, setup.q, setup.alpha, setup.s)?.value.unwrap(),
            tolerances.cusp_threshold,
        ),
    };
    if !(bracket.0 < analytic && analytic < bracket.1) {
        return Err(Error::Precondition(format!(
            "bracket [{}, {}] does not straddle the analytic threshold {analytic}",
            bracket.0, bracket.1
        )));
    }

    let outcome = match study {
        Study::MushroomQ { setup } => {
            let series = MushroomSeries::build(setup, mc)?;
            let dead_zone = tolerances.dead_zone;
            bisect(
                Box::new(move |q| {
                    let (class, slope) = series.classify(q, dead_zone)?;
                    let above = match class {
                        TrendClass::Increasing => Some(true),
                        TrendClass::Bounded => Some(false),
                        TrendClass::DeadZone => None,
                    };
                    Ok(BisectionStep {
                        value: q,
                        above,
                        statistic: slope,
                    })
                }),
                analytic,
                bracket,
                tol,
            )?
        }
        Study::CuspB { setup, nu_grid } => {
            let banks = CuspBanks::build(setup, mc)?;
            let lhs: Vec<f64> = nu_grid
                .iter()
                .map(|&nu| banks.lhs_fit(nu).map(|f| f.slope))
                .collect::<Result<_>>()?;
            bisect(
                Box::new(move |b| {
                    let window = banks.empirical_window(nu_grid, &lhs, b)?;
                    Ok(BisectionStep {
                        value: b,
                        above: Some(window.is_some()),
                        statistic: window.map_or(0.0, |(lo, hi)| hi - lo),
                    })
                }),
                analytic,
                bracket,
                tol,
            )?
        }
    };

    let name = match study {
        Study::MushroomQ { .. } => "bisect-mushroom-q",
        Study::CuspB { .. } => "bisect-cusp-b",
    };
    let mut report = ExperimentReport::new(
        name,
        json!({ "study": study, "bracket": bracket, "tol": tol, "mc": mc }),
    );
    report.predict("threshold", analytic);
    report.verdict(Verdict::judge(
        "empirical threshold",
        outcome.estimate.unwrap_or(f64::NAN),
        Comparison::Within,
        analytic,
        allowed,
    ));
    report.measure("outcome", &outcome);
    report.runtime = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(value: f64, above: Option<bool>) -> BisectionStep {
        BisectionStep {
            value,
            above,
            statistic: 0.0,
        }
    }

    #[test]
    fn bisects_an_exact_detector() {
        let out = bisect(Box::new(|x| Ok(step(x, Some(x > 0.3)))), 0.3, (0.0, 1.0), 1e-6).unwrap();
        assert_eq!(out.status, BisectionStatus::Converged);
        assert!((out.estimate.unwrap() - 0.3).abs() < 1e-6);
    }

    #[test]
    fn dead_zone_and_inconclusive() {
        let out = bisect(
            Box::new(|x| Ok(step(x, if (x - 0.5).abs() < 0.1 { None } else { Some(x > 0.5) }))),
            0.5,
            (0.0, 1.0),
            1e-6,
        )
        .unwrap();
        assert_eq!(out.status, BisectionStatus::DeadZone);
        assert_eq!(out.estimate, Some(0.5));
        let out = bisect(Box::new(|x| Ok(step(x, Some(true)))), 0.5, (0.0, 1.0), 1e-6).unwrap();
        assert_eq!(out.status, BisectionStatus::Inconclusive);
        assert!(out.estimate.is_none());
    }

    #[test]
    fn bracket_must_straddle() {
        let r = threshold_bisection(
            &Study::mushroom_default(),
            (1.5, 2.0),
            &McConfig::new(100, 1),
            0.01,
            &Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
        let r = threshold_bisection(
            &Study::cusp_default(),
            (0.1, 0.5),
            &McConfig::new(100, 1),
            0.01,
            &Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
