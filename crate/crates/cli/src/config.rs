//! TOML experiment configuration. Every section is optional; missing keys
//! take the defaults below. Unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use lpkit::{DyadicRange, Geometry, LogTimeGrid};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub grid: GridConfig,
    pub conditions: ConditionsConfig,
    pub symbol: SymbolConfig,
    pub equivalence: EquivalenceConfig,
    pub sobolev: SobolevConfig,
    pub mar_scan: MarScanConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 7,
            grid: GridConfig::default(),
            conditions: ConditionsConfig::default(),
            symbol: SymbolConfig::default(),
            equivalence: EquivalenceConfig::default(),
            sobolev: SobolevConfig::default(),
            mar_scan: MarScanConfig::default(),
        }
    }
}

/// Spatial grid plus the default time and dyadic discretizations.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    /// Samples per axis; defaults to 4096 in 1-D and 512 in 2-D.
    pub n: Option<usize>,
    /// Half-length `L`; defaults to 32 in 1-D and 16 in 2-D.
    pub half_length: Option<f64>,
    /// Log-time nodes per octave.
    pub per_octave: usize,
    /// Defaults to `4h`.
    pub t_min: Option<f64>,
    /// Defaults to `L/4`.
    pub t_max: Option<f64>,
    /// Extra dyadic levels on each side of the resolved band.
    pub dyadic_margin: i32,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, n: None, half_length: None, per_octave: 16, t_min: None, t_max: None, dyadic_margin: 2 }
    }
}

impl GridConfig {
    pub fn geometry(&self) -> Result<Geometry> {
        let (n, l) = match self.dim {
            1 => (4096, 32.0),
            2 => (512, 16.0),
            d => bail!("grid.dim: must be 1 or 2, got {d}"),
        };
        Ok(Geometry::new(self.dim, self.n.unwrap_or(n), self.half_length.unwrap_or(l))?)
    }

    pub fn time_grid(&self, geom: &Geometry) -> Result<LogTimeGrid> {
        let lo = self.t_min.unwrap_or(4.0 * geom.spacing());
        let hi = self.t_max.unwrap_or(geom.half_length() / 4.0);
        Ok(LogTimeGrid::new(lo, hi, self.per_octave)?)
    }

    pub fn dyadic_range(&self, geom: &Geometry) -> DyadicRange {
        DyadicRange::for_geometry(geom, self.dyadic_margin)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionsConfig {
    pub eps: f64,
    pub u: Vec<f64>,
    pub delta: f64,
    pub xi_max: f64,
}

impl Default for ConditionsConfig {
    fn default() -> Self {
        Self { eps: 0.5, u: vec![1.5, 2.0, 4.0], delta: 1.0, xi_max: 64.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SymbolMode {
    Continuous,
    Dyadic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolConfig {
    pub mode: SymbolMode,
    /// Continuous-mode time range. Symbols are evaluated pointwise, so the
    /// range is not tied to the grid.
    pub t_min: f64,
    pub t_max: f64,
    pub per_octave: usize,
    /// Dyadic range; defaults to the grid's resolved band.
    pub k_min: Option<i32>,
    pub k_max: Option<i32>,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self { mode: SymbolMode::Continuous, t_min: 1e-6, t_max: 1e6, per_octave: 32, k_min: None, k_max: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    GPsi,
    DeltaPsi,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivalenceConfig {
    pub operator: OperatorKind,
    pub kernel: String,
    pub p: f64,
    pub weight: String,
    /// Use only the first `members` fields of the standard family.
    pub members: usize,
    /// Largest acceptable `max/min` ratio.
    pub bound: f64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            operator: OperatorKind::GPsi,
            kernel: "haar".into(),
            p: 2.0,
            weight: "const".into(),
            members: 20,
            bound: 50.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SobolevConfig {
    pub alpha: f64,
    pub profile: String,
    pub p: f64,
    pub weight: String,
    pub members: usize,
    /// Largest acceptable spread; defaults to the spectral bound for
    /// unweighted `p = 2` and to 50 otherwise.
    pub bound: Option<f64>,
}

impl Default for SobolevConfig {
    fn default() -> Self {
        Self { alpha: 0.5, profile: "ball".into(), p: 2.0, weight: "const".into(), members: 20, bound: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarScanConfig {
    pub alpha: f64,
    pub density: usize,
    pub per_octave: usize,
    pub margin: f64,
}

impl Default for MarScanConfig {
    fn default() -> Self {
        Self { alpha: 1.0, density: 1, per_octave: 16, margin: 2.0 }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}
