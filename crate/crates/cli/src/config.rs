//! The JSON run configuration.

use std::path::{Path, PathBuf};

use cylspec::cross_section::CrossSectionSpec;
use cylspec::profile::{CoefficientProfile, ProfileFamily, DEFAULT_FLOOR};
use cylspec::Result as CoreResult;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub cross_section: CrossSectionConfig,
    pub profile: ProfileConfig,
    pub task: Task,
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    pub outputs: OutputConfig,
}

/// A built-in cross-section, or synthetic eigenvalue lists given inline or as
/// files with one eigenvalue per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CrossSectionConfig {
    Files(SyntheticFiles),
    Inline(CrossSectionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticFiles {
    pub dirichlet_file: PathBuf,
    pub neumann_file: PathBuf,
    pub boundary_components: usize,
}

impl CrossSectionConfig {
    pub fn build(&self, base: &Path) -> CoreResult<CrossSectionSpec> {
        match self {
            CrossSectionConfig::Inline(spec) => {
                spec.validate()?;
                Ok(spec.clone())
            }
            CrossSectionConfig::Files(f) => CrossSectionSpec::synthetic_from_csv(
                resolve(base, &f.dirichlet_file),
                resolve(base, &f.neumann_file),
                f.boundary_components,
            ),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    StabilizingAnalysis,
    PeriodicAnalysis,
    OracleCheck,
}

/// ε and μ as closed-form families. The profile is periodic when `period` is
/// given or a cosine term is present, stabilizing otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub epsilon: ProfileFamily,
    pub mu: ProfileFamily,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default)]
    pub floor: Option<f64>,
}

impl ProfileConfig {
    /// The explicit period, else the largest cosine period present.
    pub fn period(&self) -> Option<f64> {
        self.period.or_else(|| {
            [self.epsilon.natural_period(), self.mu.natural_period()]
                .into_iter()
                .flatten()
                .reduce(f64::max)
        })
    }

    pub fn is_periodic(&self) -> bool {
        self.period().is_some()
    }

    pub fn build(&self) -> CoreResult<CoefficientProfile> {
        let floor = self.floor.unwrap_or(DEFAULT_FLOOR);
        let (e, m) = (self.epsilon.clone(), self.mu.clone());
        match self.period() {
            Some(period) => CoefficientProfile::periodic_with_floor(e, m, period, floor),
            None => CoefficientProfile::stabilizing_with_floor(e, m, floor),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Energy cap for `ℳ²`.
    pub e_max: f64,
    #[serde(default)]
    pub window_halfwidth: Option<f64>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted relative deviation in the oracle comparison.
    #[serde(default = "default_oracle_relative")]
    pub oracle_relative: f64,
}

fn default_oracle_relative() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle_relative: default_oracle_relative(),
        }
    }
}

/// Settings of the weighted-versus-transformed comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Mode constants to compare; defaults to `λ₁, λ₂`.
    #[serde(default)]
    pub mode_constants: Option<Vec<f64>>,
    #[serde(default = "default_count")]
    pub eigenvalue_count: usize,
    /// Half-width of the `z` window; the `y` window is its image.
    #[serde(default = "default_oracle_window")]
    pub window_halfwidth: f64,
    #[serde(default = "default_oracle_grid")]
    pub grid: usize,
}

fn default_count() -> usize {
    5
}

fn default_oracle_window() -> f64 {
    15.0
}

fn default_oracle_grid() -> usize {
    8000
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            mode_constants: None,
            eigenvalue_count: default_count(),
            window_halfwidth: default_oracle_window(),
            grid: default_oracle_grid(),
        }
    }
}

/// Relative paths are taken relative to the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub report_path: PathBuf,
    #[serde(default)]
    pub csv_dir: Option<PathBuf>,
    #[serde(default)]
    pub dump_potentials: bool,
}

impl OutputConfig {
    pub fn resolved(&self, base: &Path) -> OutputConfig {
        let fix = |p: &Path| resolve(base, p);
        OutputConfig {
            report_path: fix(&self.report_path),
            csv_dir: self.csv_dir.as_deref().map(fix),
            dump_potentials: self.dump_potentials,
        }
    }
}
