//! TOML configuration with `key=value` overrides.
//!
//! ```toml
//! ambient_dims = [512]
//! expected_rows = [64, 128, 256, 512]
//! sparsities = [4]
//! methods = ["ht"]
//! trials = 50
//! master_seed = 7
//! output = "ht.csv"
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::circulant::GeneratorLaw;
use crate::error::{Error, Result};
use crate::model::SparsityClass;
use crate::recover::Method;

/// Parses a TOML document, applies `key=value` overrides, and deserializes.
///
/// Override values use TOML syntax (`m=[64,128]`, `output="x.csv"`); a
/// value that does not parse is taken as a bare string.
pub fn load<T: DeserializeOwned>(text: &str, overrides: &[String]) -> Result<T> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        table.insert(key.to_string(), value);
    }
    T::deserialize(toml::Value::Table(table)).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_file<T: DeserializeOwned>(path: Option<&Path>, overrides: &[String]) -> Result<T> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    load(&text, overrides)
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub ambient_dims: Vec<usize>,
    pub expected_rows: Vec<usize>,
    pub sparsities: Vec<usize>,
    pub methods: Vec<Method>,
    /// Resolution grid for the scalar programs.
    pub deltas: Vec<f64>,
    /// Energy bound `R`; also sets the Gaussian threshold scale.
    pub energy_bound: f64,
    pub signal_norm: f64,
    pub signal_class: SparsityClass,
    /// ℓ1 mass of dense Gaussian noise in ℓ1-BPDN trials.
    pub noise_budget: f64,
    /// Fraction of rows hit by ±`outlier_magnitude` in ℓ1-BPDN trials.
    pub outlier_fraction: f64,
    pub outlier_magnitude: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub output: PathBuf,
    /// 0 uses every core.
    pub workers: usize,
    pub record_runtime: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ambient_dims: vec![128],
            expected_rows: vec![64],
            sparsities: vec![2],
            methods: vec![Method::HardThreshold],
            deltas: vec![0.5],
            energy_bound: 2.0,
            signal_norm: 1.0,
            signal_class: SparsityClass::ExactSparse,
            noise_budget: 0.0,
            outlier_fraction: 0.0,
            outlier_magnitude: 10.0,
            trials: 10,
            master_seed: 0,
            output: PathBuf::from("sweep.csv"),
            workers: 0,
            record_runtime: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let grids = [
            ("ambient_dims", self.ambient_dims.is_empty()),
            ("expected_rows", self.expected_rows.is_empty()),
            ("sparsities", self.sparsities.is_empty()),
            ("methods", self.methods.is_empty()),
        ];
        if let Some((name, _)) = grids.iter().find(|(_, empty)| *empty) {
            return config_err(format!("`{name}` must be nonempty"));
        }
        if self.trials == 0 {
            return config_err("`trials` must be at least 1");
        }
        let n_min = *self.ambient_dims.iter().min().expect("nonempty");
        if n_min == 0 {
            return config_err("ambient dimensions must be positive");
        }
        for &n in &self.ambient_dims {
            for &m in &self.expected_rows {
                if m == 0 || m > n {
                    return config_err(format!("need 1 <= m <= N, got m={m} with N={n}"));
                }
            }
            for &s in &self.sparsities {
                if s == 0 || s > n {
                    return config_err(format!("need 1 <= s <= N, got s={s} with N={n}"));
                }
            }
        }
        let needs_delta = self.methods.iter().any(|m| m.needs_resolution());
        if needs_delta
            && (self.deltas.is_empty() || self.deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)))
        {
            return config_err("scalar programs need a nonempty grid of positive `deltas`");
        }
        if !(self.energy_bound.is_finite() && self.energy_bound > 0.0) {
            return config_err("`energy_bound` must be positive");
        }
        if !(self.signal_norm.is_finite() && self.signal_norm > 0.0) {
            return config_err("`signal_norm` must be positive");
        }
        if !(self.noise_budget.is_finite() && self.noise_budget >= 0.0) {
            return config_err("`noise_budget` must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.outlier_fraction) || !self.outlier_magnitude.is_finite() {
            return config_err("`outlier_fraction` must lie in [0, 1]");
        }
        if (self.outlier_fraction > 0.0 || self.noise_budget > 0.0)
            && !self.methods.contains(&Method::L1Bpdn)
        {
            return config_err("outliers and noise budgets only apply to l1_bpdn");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleConfig {
    pub ambient_dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub laws: Vec<GeneratorLaw>,
    pub seeds: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            ambient_dims: vec![16, 128],
            lambdas: vec![0.1, 0.5, 0.9],
            laws: vec![GeneratorLaw::Rademacher, GeneratorLaw::Gaussian],
            seeds: 100,
            master_seed: 0,
            output: None,
        }
    }
}

impl CounterexampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ambient_dims.is_empty()
            || self.lambdas.is_empty()
            || self.laws.is_empty()
            || self.seeds == 0
        {
            return config_err("counterexample grids must be nonempty");
        }
        if self.ambient_dims.iter().any(|&n| n < 2) {
            return config_err("counterexample needs N >= 2");
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return config_err(format!("lambda must lie in (0, 1), got {l}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConcentrationConfig {
    pub ambient_dims: Vec<usize>,
    pub sparsities: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub draws: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        ConcentrationConfig {
            ambient_dims: vec![2048],
            sparsities: vec![1, 4],
            thresholds: vec![0.0, 0.05, 0.1, 0.2],
            draws: 2000,
            master_seed: 0,
            output: None,
        }
    }
}

impl ConcentrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ambient_dims.is_empty() || self.sparsities.is_empty() || self.thresholds.is_empty()
        {
            return config_err("concentration grids must be nonempty");
        }
        if self.draws < 2 {
            return config_err("`draws` must be at least 2");
        }
        for &n in &self.ambient_dims {
            if self.sparsities.iter().any(|&s| s == 0 || s > n) {
                return config_err("need 1 <= s <= N");
            }
        }
        if self
            .thresholds
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return config_err("thresholds must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethodKind {
    Random,
    Grid,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipTarget {
    Rip12,
    Rip12Extended,
    L2Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RipConfig {
    pub ambient_dim: usize,
    pub expected_rows: usize,
    pub sparsities: Vec<usize>,
    pub target: RipTarget,
    pub effective: bool,
    pub method: RipMethodKind,
    /// Sample count or angles per coordinate.
    pub resolution: usize,
    pub budget: u64,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for RipConfig {
    fn default() -> Self {
        RipConfig {
            ambient_dim: 64,
            expected_rows: 32,
            sparsities: vec![1, 2],
            target: RipTarget::Rip12,
            effective: false,
            method: RipMethodKind::Random,
            resolution: 10_000,
            budget: 10_000_000,
            master_seed: 0,
            output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DumpConfig {
    pub ambient_dim: usize,
    pub expected_rows: usize,
    pub law: GeneratorLaw,
    pub extra_column: bool,
    pub seed: u64,
    pub binary: bool,
    pub output: Option<PathBuf>,
}

impl Default for DumpConfig {
    fn default() -> Self {
        DumpConfig {
            ambient_dim: 64,
            expected_rows: 32,
            law: GeneratorLaw::Gaussian,
            extra_column: false,
            seed: 0,
            binary: false,
            output: None,
        }
    }
}

/// Single-shot recovery: either a dumped ensemble plus an observation CSV,
/// or a simulated trial when both paths are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverConfig {
    pub method: Method,
    pub ensemble: Option<PathBuf>,
    pub observation: Option<PathBuf>,
    pub ambient_dim: usize,
    pub expected_rows: usize,
    pub sparsity: usize,
    pub delta: f64,
    pub energy_bound: f64,
    pub signal_norm: f64,
    pub noise_budget: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig {
            method: Method::HardThreshold,
            ensemble: None,
            observation: None,
            ambient_dim: 128,
            expected_rows: 64,
            sparsity: 2,
            delta: 0.5,
            energy_bound: 2.0,
            signal_norm: 1.0,
            noise_budget: 0.0,
            seed: 0,
            output: None,
        }
    }
}

impl RecoverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ensemble.is_some() != self.observation.is_some() {
            return config_err("`ensemble` and `observation` must be given together");
        }
        Ok(())
    }
}
