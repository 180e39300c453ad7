use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{geometric_ratio, Comparison, ExperimentReport, ScalingFit, Tolerances, Verdict};
use crate::error::{Error, Result};
use crate::fields::{mushroom_bump, Field};
use crate::functionals::{inf_lq_norm, restricted_integral, FracParams, LqNorm};
use crate::geometry::{Domain, DomainSpec, Region};
use crate::mc::{Estimate, McConfig};
use crate::thresholds::{mushroom_q_max, mushroom_scaling_exponents};

/// Fixed parameters of a mushroom scaling family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MushroomSetup {
    pub beta: f64,
    pub p: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    /// Side of the square the mushroom sits on.
    pub cube_side: f64,
    /// Mushroom sizes, decreasing geometrically.
    pub r_list: Vec<f64>,
}

impl Default for MushroomSetup {
    fn default() -> Self {
        Self {
            beta: 2.0,
            p: 2.0,
            s: 0.5,
            a: 0.0,
            b: 0.0,
            tau: 0.5,
            cube_side: 1.0,
            r_list: (2..=5).map(|k| 0.5f64.powi(k)).collect(),
        }
    }
}

impl MushroomSetup {
    fn params(&self) -> FracParams {
        FracParams::new(self.s, self.p, self.p, self.a, self.b).with_tau(self.tau)
    }
}

/// Direction of the quotient as the mushroom shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendClass {
    /// The quotient grows as `r -> 0`: the inequality fails.
    Increasing,
    /// The quotient stays bounded.
    Bounded,
    /// The slope lies inside the dead zone.
    DeadZone,
}

impl TrendClass {
    /// Classifies the slope of `ln quotient` against `ln r`.
    pub fn of_slope(slope: f64, dead_zone: f64) -> Self {
        if slope < -dead_zone {
            TrendClass::Increasing
        } else if slope > dead_zone {
            TrendClass::Bounded
        } else {
            TrendClass::DeadZone
        }
    }
}

/// One single-mushroom domain per size with its ramp field and restricted
/// seminorm; the numerator is evaluated on demand for any `q`.
#[derive(Debug, Clone)]
pub struct MushroomSeries {
    pub setup: MushroomSetup,
    domains: Vec<Domain>,
    fields: Vec<Field>,
    /// Restricted integrals (not rooted), one per size.
    pub seminorm_integrals: Vec<Estimate>,
    mc: McConfig,
}

impl MushroomSeries {
    pub fn build(setup: &MushroomSetup, mc: &McConfig) -> Result<Self> {
        geometric_ratio(&setup.r_list, "r_list")?;
        let params = setup.params();
        params.validate()?;
        let mut domains = Vec::new();
        let mut fields = Vec::new();
        let mut seminorm_integrals = Vec::new();
        for (k, &r) in setup.r_list.iter().enumerate() {
            let domain = Domain::new(DomainSpec::mushroom(setup.beta, setup.cube_side, vec![r]))?;
            let f = mushroom_bump(&domain, 0)?;
            let est = restricted_integral(&f, &Region::whole(&domain), &params, &mc.child(&format!("r/{k}/seminorm")))?;
            if est.value.is_nan() || est.value <= 0.0 {
                return Err(Error::UndefinedQuotient);
            }
            domains.push(domain);
            fields.push(f);
            seminorm_integrals.push(est);
        }
        Ok(Self {
            setup: setup.clone(),
            domains,
            fields,
            seminorm_integrals,
            mc: *mc,
        })
    }

    pub fn seminorms(&self) -> Vec<Estimate> {
        self.seminorm_integrals.iter().map(|e| e.powf(1.0 / self.setup.p)).collect()
    }

    pub fn numerators(&self, q: f64) -> Result<Vec<LqNorm>> {
        self.domains
            .iter()
            .zip(&self.fields)
            .enumerate()
            .map(|(k, (d, f))| inf_lq_norm(f, d, q, self.setup.a, &self.mc.child(&format!("r/{k}/norm"))))
            .collect()
    }

    fn points(&self, values: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
        self.setup.r_list.iter().copied().zip(values).collect()
    }

    pub fn seminorm_fit(&self) -> Result<ScalingFit> {
        ScalingFit::fit(&self.points(self.seminorms().iter().map(|e| e.value)))
    }

    /// Fits of the numerator and of the quotient against `r`.
    pub fn fits(&self, q: f64) -> Result<(ScalingFit, ScalingFit)> {
        let num = self.numerators(q)?;
        let sem = self.seminorms();
        let numerator = ScalingFit::fit(&self.points(num.iter().map(|n| n.value.value)))?;
        let quotient = ScalingFit::fit(&self.points(num.iter().zip(&sem).map(|(n, s)| n.value.value / s.value)))?;
        Ok((numerator, quotient))
    }

    pub fn classify(&self, q: f64, dead_zone: f64) -> Result<(TrendClass, f64)> {
        let (_, quotient) = self.fits(q)?;
        Ok((TrendClass::of_slope(quotient.slope, dead_zone), quotient.slope))
    }
}

/// Fits the numerator and seminorm exponents of the mushroom ramp against
/// `r` and compares them, and the quotient trend, with the analytic values.
pub fn mushroom_scaling_study(
    setup: &MushroomSetup,
    qs: &[f64],
    mc: &McConfig,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    if qs.is_empty() {
        return Err(Error::Precondition("need at least one q".into()));
    }
    let series = MushroomSeries::build(setup, mc)?;
    let n = 2;
    let mut report = ExperimentReport::new(
        "mushroom-scaling",
        json!({ "setup": setup, "q": qs, "mc": mc }),
    );
    let q_max = mushroom_q_max(n, setup.a, setup.p, setup.b, setup.s, setup.beta)?.value;
    if let Some(v) = q_max {
        report.predict("q_max", v);
    }

    let sem = series.seminorms();
    report.measure("seminorm", &sem);
    let sem_fit = series.seminorm_fit()?;
    let exps0 = mushroom_scaling_exponents(n, setup.p, qs[0], setup.s, setup.beta, setup.a, setup.b)?;
    report.predict("seminorm_slope", exps0.rhs);
    report.predict("junction_slope", exps0.junction);
    report.verdict(Verdict::judge(
        "seminorm slope",
        sem_fit.slope,
        Comparison::Within,
        exps0.rhs,
        tol.seminorm_slope,
    ));
    report.fits.insert("seminorm".into(), sem_fit);

    for &q in qs {
        let exps = mushroom_scaling_exponents(n, setup.p, q, setup.s, setup.beta, setup.a, setup.b)?;
        let num = series.numerators(q)?;
        let (num_fit, quot_fit) = series.fits(q)?;
        report.measure(&format!("numerator/q={q}"), num.iter().map(|x| &x.value).collect::<Vec<_>>());
        report.predict(&format!("numerator_slope/q={q}"), exps.lhs);
        report.predict(&format!("quotient_slope/q={q}"), exps.quotient());
        report.verdict(Verdict::judge(
            format!("numerator slope q={q}"),
            num_fit.slope,
            Comparison::Within,
            exps.lhs,
            tol.numerator_slope,
        ));
        match q_max {
            Some(t) if q > t => report.verdict(Verdict::judge(
                format!("quotient increasing q={q}"),
                quot_fit.slope,
                Comparison::AtMost,
                -tol.growth_slope,
                0.0,
            )),
            Some(t) if q < t => report.verdict(Verdict::judge(
                format!("quotient bounded q={q}"),
                quot_fit.slope,
                Comparison::AtLeast,
                -tol.dead_zone,
                0.0,
            )),
            _ => {}
        }
        report.fits.insert(format!("numerator/q={q}"), num_fit);
        report.fits.insert(format!("quotient/q={q}"), quot_fit);
    }
    report.runtime = start.elapsed();
    Ok(report)
}
