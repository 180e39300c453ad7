//! The TOML run configuration. Every key is optional; command-line flags
//! override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fraclab::experiments::{CuspSetup, MushroomSetup, SweepGrid, Tolerances};
use fraclab::fields::FieldSpec;
use fraclab::functionals::FracParams;
use fraclab::geometry::DomainSpec;
use fraclab::mc::McConfig;
use fraclab::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    #[default]
    MushroomQ,
    CuspB,
}

/// Inputs of the `thresholds` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdArgs {
    /// Theorem number (`"3.3"`, `"4.4"`, ...) or operation name.
    pub theorem: String,
    pub n: usize,
    pub p: String,
    pub q: String,
    pub a: String,
    pub s: String,
    pub b: String,
    pub beta: String,
    pub alpha: String,
}

impl Default for ThresholdArgs {
    fn default() -> Self {
        Self {
            theorem: "3.3".into(),
            n: 2,
            p: "2".into(),
            q: "2".into(),
            a: "0".into(),
            s: "0.5".into(),
            b: "0".into(),
            beta: "1".into(),
            alpha: "1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MushroomArgs {
    #[serde(flatten)]
    pub setup: MushroomSetup,
    pub q_list: Vec<f64>,
}

impl Default for MushroomArgs {
    fn default() -> Self {
        Self {
            setup: MushroomSetup::default(),
            q_list: vec![1.2, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BisectArgs {
    pub study: StudyKind,
    /// Defaults to the study's standard bracket.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    pub tol: f64,
    pub nu_grid: Vec<f64>,
}

impl Default for BisectArgs {
    fn default() -> Self {
        Self {
            study: StudyKind::MushroomQ,
            bracket: None,
            tol: 0.02,
            nu_grid: (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prop21Args {
    /// Number of random smooth fields.
    pub fields: usize,
}

impl Default for Prop21Args {
    fn default() -> Self {
        Self { fields: 20 }
    }
}

/// A complete run description: the output is a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Monte Carlo draws per estimate.
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    pub r_min_rel: f64,
    pub chunk: usize,
    pub domain: DomainSpec,
    pub field: FieldSpec,
    pub params: FracParams,
    pub tolerances: Tolerances,
    pub thresholds: ThresholdArgs,
    pub prop21: Prop21Args,
    pub mushroom: MushroomArgs,
    pub cusp: CuspSetup,
    pub bisect: BisectArgs,
    pub sweep: SweepGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mc = McConfig::default();
        Self {
            seed: mc.seed,
            samples: mc.n_pairs,
            out: None,
            format: None,
            r_min_rel: mc.r_min_rel,
            chunk: mc.chunk,
            domain: DomainSpec::unit_cube(2),
            field: FieldSpec::Coordinate { axis: 0 },
            params: FracParams::default(),
            tolerances: Tolerances::default(),
            thresholds: ThresholdArgs::default(),
            prop21: Prop21Args::default(),
            mushroom: MushroomArgs::default(),
            cusp: CuspSetup::default(),
            bisect: BisectArgs::default(),
            sweep: SweepGrid::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            n_pairs: self.samples,
            seed: self.seed,
            r_min_rel: self.r_min_rel,
            chunk: self.chunk,
        }
    }
}
