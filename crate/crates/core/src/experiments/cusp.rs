use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{geometric_ratio, Comparison, ExperimentReport, ScalingFit, Tolerances, Verdict};
use crate::error::{Error, Result};
use crate::functionals::{pow_abs, FracParams, PairBank};
use crate::geometry::{Domain, DomainSpec, Region};
use crate::mc::{map_chunks, reduce, ChunkTally, Estimate, McConfig, Moments};
use crate::thresholds::cusp_nu_window;

/// Parameters of the cusp study for `f = x_n^(-ν)` on `{|x'| < x_n^(1/α)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CuspSetup {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub nu: f64,
    /// Truncation heights, decreasing geometrically.
    pub eps_list: Vec<f64>,
}

impl Default for CuspSetup {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            p: 2.0,
            q: 2.0,
            s: 0.5,
            a: 0.0,
            b: 0.5,
            tau: 0.5,
            nu: 1.75,
            eps_list: (2..=7).map(|k| 0.5f64.powi(k)).collect(),
        }
    }
}

impl CuspSetup {
    const N: usize = 2;

    /// `γ_L + 1 = -νq + (n-1+a)/α + 1`: growth exponent of the `L^q(d^a)`
    /// integral over `{x_n ~ ε}`.
    pub fn lhs_exponent(&self, nu: f64) -> f64 {
        -nu * self.q + (Self::N as f64 - 1.0 + self.a) / self.alpha + 1.0
    }

    /// `γ_R + 1 = -(ν+1)p + (b + (1-s)p + n-1)/α + 1`.
    pub fn rhs_exponent(&self, nu: f64, b: f64) -> f64 {
        -(nu + 1.0) * self.p + (b + (1.0 - self.s) * self.p + Self::N as f64 - 1.0) / self.alpha + 1.0
    }

    fn validate(&self) -> Result<()> {
        FracParams::new(self.s, self.p, self.q, self.a, self.b)
            .with_tau(self.tau)
            .validate()?;
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParams(format!("nu must be positive, got {}", self.nu)));
        }
        geometric_ratio(&self.eps_list, "eps_list")?;
        if self.eps_list[0] >= 1.0 {
            return Err(Error::Precondition("truncation heights must lie below 1".into()));
        }
        Ok(())
    }
}

/// Geometry of one pair, reduced to what a power of `x_n` needs.
#[derive(Debug, Clone, Copy)]
struct CuspPair {
    yx: f64,
    yz: f64,
    delta: f64,
    r_min: f64,
    base: f64,
}

/// Outer samples `(x_n, w d^a)` of one band.
#[derive(Debug, Clone)]
struct PointBank {
    chunks: Vec<(u64, Vec<(f64, f64)>)>,
}

impl PointBank {
    fn build(region: &Region, a: f64, mc: &McConfig) -> Self {
        let domain = region.domain();
        let chunks = map_chunks(mc, |_, rng, count| {
            let mut out = Vec::new();
            for _ in 0..count {
                if let Some((x, w)) = region.draw(rng) {
                    let weight = if a == 0.0 { w } else { w * domain.distance(&x).powf(a) };
                    out.push((x.last(), weight));
                }
            }
            (count as u64, out)
        });
        Self { chunks }
    }

    fn evaluate(&self, g: impl Fn(f64) -> f64) -> Estimate {
        let tallies: Vec<ChunkTally> = self
            .chunks
            .iter()
            .map(|(draws, pts)| {
                let mut tally = ChunkTally {
                    hits: pts.len() as u64,
                    ..ChunkTally::default()
                };
                for &(y, w) in pts {
                    tally.moments.push(w * g(y));
                }
                tally.moments.merge(&Moments {
                    n: draws - pts.len() as u64,
                    mean: 0.0,
                    m2: 0.0,
                });
                tally
            })
            .collect();
        reduce(&tallies)
    }
}

#[derive(Debug, Clone)]
struct Shell {
    lo: f64,
    hi: f64,
    points: PointBank,
    pairs: PairBank<CuspPair>,
}

impl Shell {
    fn build(domain: &Domain, setup: &CuspSetup, lo: f64, hi: f64, mc: &McConfig) -> Result<Self> {
        let region = Region::band(domain, lo, hi);
        let points = PointBank::build(&region, setup.a, &mc.child("lhs"));
        let pairs = PairBank::restricted(&region, setup.s, setup.p, setup.tau, &mc.child("rhs"))?.project(|pr| CuspPair {
            yx: pr.x.last(),
            yz: pr.z.last(),
            delta: pr.dx.min(pr.dz),
            r_min: pr.r_min,
            base: pr.base,
        });
        Ok(Self { lo, hi, points, pairs })
    }

    fn lhs(&self, nu: f64, q: f64) -> Estimate {
        self.points.evaluate(|y| y.powf(-nu * q))
    }

    fn rhs(&self, nu: f64, p: f64, b: f64) -> Estimate {
        self.pairs.evaluate_with(|c| {
            let diff = pow_abs(c.yz.powf(-nu) - c.yx.powf(-nu), p);
            if b == 0.0 {
                return (c.base * diff, false);
            }
            let clamped = b < 0.0 && c.delta < c.r_min;
            let delta = if clamped { c.r_min } else { c.delta };
            (c.base * diff * delta.powf(b), clamped)
        })
    }
}

/// Fitted growth exponents of the shell integrals at one `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellExponents {
    pub nu: f64,
    pub b: f64,
    pub lhs: ScalingFit,
    pub rhs: ScalingFit,
}

/// Sample banks for the shells `{ρ ε_k < x_n < ε_k}` and the tail
/// `{ε_0 < x_n < 1}`, reusable for every `ν` and `b`.
#[derive(Debug, Clone)]
pub struct CuspBanks {
    pub setup: CuspSetup,
    shells: Vec<Shell>,
    tail: Shell,
}

impl CuspBanks {
    pub fn build(setup: &CuspSetup, mc: &McConfig) -> Result<Self> {
        setup.validate()?;
        let ratio = geometric_ratio(&setup.eps_list, "eps_list")?;
        let domain = Domain::new(DomainSpec::cusp(setup.alpha))?;
        let shells = setup
            .eps_list
            .iter()
            .enumerate()
            .map(|(k, &eps)| Shell::build(&domain, setup, ratio * eps, eps, &mc.child(&format!("shell/{k}"))))
            .collect::<Result<Vec<_>>>()?;
        let tail = Shell::build(&domain, setup, setup.eps_list[0], 1.0, &mc.child("tail"))?;
        Ok(Self {
            setup: setup.clone(),
            shells,
            tail,
        })
    }

    pub fn shell_limits(&self) -> Vec<(f64, f64)> {
        self.shells.iter().map(|s| (s.lo, s.hi)).collect()
    }

    pub fn lhs_shells(&self, nu: f64) -> Vec<Estimate> {
        self.shells.iter().map(|s| s.lhs(nu, self.setup.q)).collect()
    }

    pub fn rhs_shells(&self, nu: f64, b: f64) -> Vec<Estimate> {
        self.shells.iter().map(|s| s.rhs(nu, self.setup.p, b)).collect()
    }

    /// Integrals over `{x_n > ρ ε_k}`, keyed by the lower height.
    fn truncated(&self, tail: Estimate, shells: &[Estimate]) -> Vec<(f64, f64)> {
        let mut acc = tail.value;
        self.shells
            .iter()
            .zip(shells)
            .map(|(sh, e)| {
                acc += e.value;
                (sh.lo, acc)
            })
            .collect()
    }

    pub fn truncated_lhs(&self, nu: f64) -> Vec<(f64, f64)> {
        self.truncated(self.tail.lhs(nu, self.setup.q), &self.lhs_shells(nu))
    }

    pub fn truncated_rhs(&self, nu: f64, b: f64) -> Vec<(f64, f64)> {
        self.truncated(self.tail.rhs(nu, self.setup.p, b), &self.rhs_shells(nu, b))
    }

    fn fit(&self, values: &[Estimate]) -> Result<ScalingFit> {
        let pts: Vec<(f64, f64)> = self.shells.iter().zip(values).map(|(s, e)| (s.hi, e.value)).collect();
        ScalingFit::fit(&pts)
    }

    pub fn lhs_fit(&self, nu: f64) -> Result<ScalingFit> {
        self.fit(&self.lhs_shells(nu))
    }

    pub fn rhs_fit(&self, nu: f64, b: f64) -> Result<ScalingFit> {
        self.fit(&self.rhs_shells(nu, b))
    }

    pub fn exponents(&self, nu: f64, b: f64) -> Result<ShellExponents> {
        Ok(ShellExponents {
            nu,
            b,
            lhs: self.lhs_fit(nu)?,
            rhs: self.rhs_fit(nu, b)?,
        })
    }

    /// The part of the scanned `ν` range where the fitted exponents say the
    /// left side diverges (`e_L <= 0`) while the right side converges
    /// (`e_R > 0`), with the exponents interpolated linearly between grid
    /// points. `lhs_slopes` can be shared across calls with different `b`.
    pub fn empirical_window(&self, nus: &[f64], lhs_slopes: &[f64], b: f64) -> Result<Option<(f64, f64)>> {
        if nus.len() != lhs_slopes.len() || nus.len() < 2 {
            return Err(Error::Precondition("need matching nu and slope grids of length >= 2".into()));
        }
        let rhs: Vec<f64> = nus.iter().map(|&nu| self.rhs_fit(nu, b).map(|f| f.slope)).collect::<Result<_>>()?;
        const SUBDIVISIONS: usize = 32;
        let mut window: Option<(f64, f64)> = None;
        for k in 0..nus.len() - 1 {
            for j in 0..=SUBDIVISIONS {
                let t = j as f64 / SUBDIVISIONS as f64;
                let lerp = |v: &[f64]| v[k] + t * (v[k + 1] - v[k]);
                let nu = lerp(nus);
                if lerp(lhs_slopes) <= 0.0 && lerp(&rhs) > 0.0 {
                    window = Some(match window {
                        None => (nu, nu),
                        Some((lo, _)) => (lo, nu),
                    });
                }
            }
        }
        Ok(window)
    }
}

/// Measures the divergence exponents of both sides for one `ν` on the
/// truncated cusp and checks them against the power-law predictions.
pub fn cusp_divergence_study(setup: &CuspSetup, mc: &McConfig, tol: &Tolerances) -> Result<ExperimentReport> {
    let start = Instant::now();
    let banks = CuspBanks::build(setup, mc)?;
    cusp_report(&banks, mc, tol, start)
}

fn cusp_report(banks: &CuspBanks, mc: &McConfig, tol: &Tolerances, start: Instant) -> Result<ExperimentReport> {
    let setup = &banks.setup;
    let (nu, b) = (setup.nu, setup.b);
    let mut report = ExperimentReport::new("cusp-divergence", json!({ "setup": setup, "mc": mc }));
    let pred_l = setup.lhs_exponent(nu);
    let pred_r = setup.rhs_exponent(nu, b);
    report.predict("lhs_exponent", pred_l);
    report.predict("rhs_exponent", pred_r);
    let window = cusp_nu_window(2, setup.alpha, setup.p, setup.q, setup.s, b)?;
    if let Some(w) = &window {
        report.predict("window_lower", w.lower);
        report.predict("window_upper", w.upper);
    }

    let exps = banks.exponents(nu, b)?;
    report.measure("shells", banks.shell_limits());
    report.measure("lhs_shells", banks.lhs_shells(nu));
    report.measure("rhs_shells", banks.rhs_shells(nu, b));
    let trunc_l = ScalingFit::fit(&banks.truncated_lhs(nu))?;
    let trunc_r = ScalingFit::fit(&banks.truncated_rhs(nu, b))?;

    report.verdict(Verdict::judge("lhs exponent", exps.lhs.slope, Comparison::Within, pred_l, tol.exponent));
    report.verdict(Verdict::judge("rhs exponent", exps.rhs.slope, Comparison::Within, pred_r, tol.exponent));
    let analytic_in = window.as_ref().is_some_and(|w| w.contains(&nu));
    let empirical_in = exps.lhs.slope <= 0.0 && exps.rhs.slope > 0.0;
    report.verdict(Verdict::judge(
        "window membership agrees",
        f64::from(u8::from(empirical_in)),
        Comparison::Within,
        f64::from(u8::from(analytic_in)),
        0.0,
    ));
    if analytic_in {
        report.verdict(Verdict::judge("rhs convergent", exps.rhs.slope, Comparison::AtLeast, 0.0, -tol.convergence));
    }
    report.fits.insert("lhs_shells".into(), exps.lhs);
    report.fits.insert("rhs_shells".into(), exps.rhs);
    report.fits.insert("lhs_truncated".into(), trunc_l);
    report.fits.insert("rhs_truncated".into(), trunc_r);
    report.runtime = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_exponents() {
        let s = CuspSetup::default();
        assert!((s.lhs_exponent(1.5)).abs() < 1e-12);
        assert!((s.rhs_exponent(1.5, 0.0)).abs() < 1e-12);
        assert!((s.rhs_exponent(1.75, 0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_lists() {
        let setup = CuspSetup {
            eps_list: vec![0.5, 0.25, 0.125],
            ..CuspSetup::default()
        };
        assert!(CuspBanks::build(&setup, &McConfig::new(100, 1)).is_err());
        let setup = CuspSetup {
            eps_list: vec![1.0, 0.5, 0.25, 0.125],
            ..CuspSetup::default()
        };
        assert!(CuspBanks::build(&setup, &McConfig::new(100, 1)).is_err());
    }

    #[test]
    fn lhs_shells_follow_the_exact_power() {
        // ∫_{ρε}^{ε} 2 y^2 y^(-2ν) dy is an exact power of ε
        let setup = CuspSetup::default();
        let banks = CuspBanks::build(&setup, &McConfig::new(20_000, 3)).unwrap();
        let fit = banks.lhs_fit(1.0).unwrap();
        assert!((fit.slope - setup.lhs_exponent(1.0)).abs() < 0.05, "{fit:?}");
    }
}
