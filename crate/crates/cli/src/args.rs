//! Command-line flags and how they override a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fraclab::fields::FieldSpec;
use fraclab::functionals::FracParams;
use fraclab::geometry::DomainSpec;

use crate::config::{Format, RunConfig, StudyKind};

#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Weighted fractional Poincaré quotients and threshold experiments")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Top-level seed; every estimate derives its own sub-seed from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo draws per estimate.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poincaré quotient of a field on a domain.
    Quotient(ProblemArgs),
    /// Restricted (or full) fractional seminorm.
    Seminorm {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Integrate over all of Ω × Ω instead of |x-z| <= τ d(x).
        #[arg(long)]
        full: bool,
    },
    /// inf over constants of the weighted L^q norm.
    Norm(ProblemArgs),
    /// Closed-form threshold of one theorem.
    Thresholds(ThresholdFlags),
    /// Check the explicit-constant Poincaré inequality on random smooth fields.
    VerifyProp21 {
        #[command(flatten)]
        domain: DomainFlags,
        #[command(flatten)]
        params: ParamFlags,
        /// Number of random fields.
        #[arg(long)]
        fields: Option<usize>,
    },
    /// Scaling exponents of the mushroom counterexample.
    MushroomScaling(MushroomFlags),
    /// Divergence exponents on the Hölder cusp.
    CuspDivergence(CuspFlags),
    /// Locate a threshold empirically by bisection.
    Bisect(BisectFlags),
    /// Quotients and thresholds over a parameter grid (CSV by default).
    Sweep(SweepFlags),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DomainKind {
    UnitCube,
    Ball,
    Cusp,
    Mushroom,
}

#[derive(Debug, Args, Default)]
pub struct DomainFlags {
    #[arg(long, value_enum)]
    pub domain: Option<DomainKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub cube_side: Option<f64>,
    /// Mushroom sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<f64>>,
    /// Boundary polyline resolution for cusp and mushroom.
    #[arg(long)]
    pub resolution: Option<usize>,
}

impl DomainFlags {
    pub fn apply(&self, spec: &mut DomainSpec) {
        let n = spec.dim();
        let (mut radius, mut alpha, mut beta, mut side, mut sizes, mut res) = (1.0, 0.5, 2.0, 1.0, vec![0.25], 4096);
        let kind = match spec {
            DomainSpec::UnitCube { .. } => DomainKind::UnitCube,
            DomainSpec::Ball { radius: r, .. } => {
                radius = *r;
                DomainKind::Ball
            }
            DomainSpec::Cusp {
                alpha: a,
                boundary_resolution,
                ..
            } => {
                (alpha, res) = (*a, *boundary_resolution);
                DomainKind::Cusp
            }
            DomainSpec::Mushroom {
                beta: b,
                cube_side,
                stem_half_widths,
                boundary_resolution,
                ..
            } => {
                (beta, side, sizes, res) = (*b, *cube_side, stem_half_widths.clone(), *boundary_resolution);
                DomainKind::Mushroom
            }
        };
        let n = self.n.unwrap_or(n);
        let res = self.resolution.unwrap_or(res);
        *spec = match self.domain.unwrap_or(kind) {
            DomainKind::UnitCube => DomainSpec::UnitCube { n },
            DomainKind::Ball => DomainSpec::Ball {
                n,
                radius: self.radius.unwrap_or(radius),
            },
            DomainKind::Cusp => DomainSpec::Cusp {
                n,
                alpha: self.alpha.unwrap_or(alpha),
                boundary_resolution: res,
            },
            DomainKind::Mushroom => DomainSpec::Mushroom {
                n,
                beta: self.beta.unwrap_or(beta),
                cube_side: self.cube_side.unwrap_or(side),
                stem_half_widths: self.sizes.clone().unwrap_or(sizes),
                boundary_resolution: res,
            },
        };
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldKind {
    Constant,
    Coordinate,
    Sine,
    GaussianBump,
    Step,
    CuspPower,
    MushroomBump,
}

#[derive(Debug, Args, Default)]
pub struct FieldFlags {
    #[arg(long, value_enum)]
    pub field: Option<FieldKind>,
    #[arg(long)]
    pub value: Option<f64>,
    #[arg(long)]
    pub axis: Option<usize>,
    #[arg(long)]
    pub wavenumber: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub low: Option<f64>,
    #[arg(long)]
    pub high: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub index: Option<usize>,
}

impl FieldFlags {
    pub fn apply(&self, spec: &mut FieldSpec) {
        let kind = self.field.unwrap_or(match spec {
            FieldSpec::Constant { .. } => FieldKind::Constant,
            FieldSpec::Coordinate { .. } => FieldKind::Coordinate,
            FieldSpec::Sine { .. } => FieldKind::Sine,
            FieldSpec::GaussianBump { .. } => FieldKind::GaussianBump,
            FieldSpec::Step { .. } => FieldKind::Step,
            FieldSpec::CuspPower { .. } => FieldKind::CuspPower,
            FieldSpec::MushroomBump { .. } => FieldKind::MushroomBump,
        });
        let cur = spec.clone();
        let axis = self.axis.unwrap_or(match cur {
            FieldSpec::Coordinate { axis } | FieldSpec::Sine { axis, .. } | FieldSpec::Step { axis, .. } => axis,
            _ => 0,
        });
        *spec = match kind {
            FieldKind::Constant => FieldSpec::Constant {
                value: self.value.unwrap_or(match cur {
                    FieldSpec::Constant { value } => value,
                    _ => 1.0,
                }),
            },
            FieldKind::Coordinate => FieldSpec::Coordinate { axis },
            FieldKind::Sine => FieldSpec::Sine {
                axis,
                wavenumber: self.wavenumber.unwrap_or(match cur {
                    FieldSpec::Sine { wavenumber, .. } => wavenumber,
                    _ => std::f64::consts::PI,
                }),
            },
            FieldKind::GaussianBump => {
                let (center, width) = match cur {
                    FieldSpec::GaussianBump { center, width } => (center, width),
                    _ => (vec![0.5, 0.5], 0.25),
                };
                FieldSpec::GaussianBump {
                    center: self.center.clone().unwrap_or(center),
                    width: self.width.unwrap_or(width),
                }
            }
            FieldKind::Step => {
                let (threshold, low, high) = match cur {
                    FieldSpec::Step { threshold, low, high, .. } => (threshold, low, high),
                    _ => (0.5, 0.0, 1.0),
                };
                FieldSpec::Step {
                    axis,
                    threshold: self.threshold.unwrap_or(threshold),
                    low: self.low.unwrap_or(low),
                    high: self.high.unwrap_or(high),
                }
            }
            FieldKind::CuspPower => FieldSpec::CuspPower {
                nu: self.nu.unwrap_or(match cur {
                    FieldSpec::CuspPower { nu } => nu,
                    _ => 1.0,
                }),
            },
            FieldKind::MushroomBump => FieldSpec::MushroomBump {
                index: self.index.unwrap_or(match cur {
                    FieldSpec::MushroomBump { index } => index,
                    _ => 0,
                }),
            },
        };
    }
}

#[derive(Debug, Args, Default)]
pub struct ParamFlags {
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
}

impl ParamFlags {
    pub fn apply(&self, params: &mut FracParams) {
        let set = |dst: &mut f64, src: Option<f64>| {
            if let Some(v) = src {
                *dst = v;
            }
        };
        set(&mut params.s, self.s);
        set(&mut params.p, self.p);
        set(&mut params.q, self.q);
        set(&mut params.a, self.a);
        set(&mut params.b, self.b);
        set(&mut params.tau, self.tau);
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub domain: DomainFlags,
    #[command(flatten)]
    pub field: FieldFlags,
    #[command(flatten)]
    pub params: ParamFlags,
}

impl ProblemArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        self.domain.apply(&mut cfg.domain);
        self.field.apply(&mut cfg.field);
        self.params.apply(&mut cfg.params);
    }
}

/// Threshold inputs are exact decimals or fractions (`0.5`, `4/3`).
#[derive(Debug, Args)]
pub struct ThresholdFlags {
    /// Theorem number (3.3, 3.5, 4.2, 4.3, 4.4, 5.1, 5.2), `window`,
    /// `exponents`, or the operation name.
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Also evaluate in exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
}

impl ThresholdFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let t = &mut cfg.thresholds;
        if let Some(v) = &self.theorem {
            t.theorem = v.clone();
        }
        if let Some(v) = self.n {
            t.n = v;
        }
        for (dst, src) in [
            (&mut t.p, &self.p),
            (&mut t.q, &self.q),
            (&mut t.a, &self.a),
            (&mut t.s, &self.s),
            (&mut t.b, &self.b),
            (&mut t.beta, &self.beta),
            (&mut t.alpha, &self.alpha),
        ] {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct MushroomFlags {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub cube_side: Option<f64>,
    /// Exponents q to study, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q_list: Option<Vec<f64>>,
    /// Mushroom sizes, decreasing geometrically, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r_list: Option<Vec<f64>>,
}

impl MushroomFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.mushroom;
        for (dst, src) in [
            (&mut m.setup.beta, self.beta),
            (&mut m.setup.p, self.p),
            (&mut m.setup.s, self.s),
            (&mut m.setup.a, self.a),
            (&mut m.setup.b, self.b),
            (&mut m.setup.tau, self.tau),
            (&mut m.setup.cube_side, self.cube_side),
        ] {
            if let Some(v) = src {
                *dst = v;
            }
        }
        if let Some(v) = &self.q_list {
            m.q_list = v.clone();
        }
        if let Some(v) = &self.r_list {
            m.setup.r_list = v.clone();
        }
    }
}

#[derive(Debug, Args)]
pub struct CuspFlags {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Truncation heights, decreasing geometrically, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
}

impl CuspFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let c = &mut cfg.cusp;
        for (dst, src) in [
            (&mut c.alpha, self.alpha),
            (&mut c.p, self.p),
            (&mut c.q, self.q),
            (&mut c.s, self.s),
            (&mut c.a, self.a),
            (&mut c.b, self.b),
            (&mut c.tau, self.tau),
            (&mut c.nu, self.nu),
        ] {
            if let Some(v) = src {
                *dst = v;
            }
        }
        if let Some(v) = &self.eps_list {
            c.eps_list = v.clone();
        }
    }
}

/// The fixed parameters of each study come from the `[mushroom]` and
/// `[cusp]` config sections.
#[derive(Debug, Args)]
pub struct BisectFlags {
    #[arg(long, value_enum)]
    pub study: Option<StudyKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    /// Stop when the bracket is narrower than this.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl BisectFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let bis = &mut cfg.bisect;
        if let Some(v) = self.study {
            bis.study = v;
        }
        if let Some(v) = self.tol {
            bis.tol = v;
        }
        if self.lo.is_some() || self.hi.is_some() {
            let (lo, hi) = bis.bracket.unwrap_or(match bis.study {
                StudyKind::MushroomQ => (1.1, 2.0),
                StudyKind::CuspB => (-0.5, 0.5),
            });
            bis.bracket = Some((self.lo.unwrap_or(lo), self.hi.unwrap_or(hi)));
        }
    }
}

/// Grid axes as comma-separated lists; other axes come from `[sweep]`.
#[derive(Debug, Args)]
pub struct SweepFlags {
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<f64>>,
}

impl SweepFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let g = &mut cfg.sweep;
        for (dst, src) in [
            (&mut g.s, &self.s),
            (&mut g.p, &self.p),
            (&mut g.q, &self.q),
            (&mut g.a, &self.a),
            (&mut g.b, &self.b),
        ] {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
    }
}
