//! Declarative experiment configuration (TOML).

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{Error, Result};
use crate::lagrange::RootOptions;
use crate::model::{AdjacencyKind, Grid, Potential};
use crate::swapchain::ProductChain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { lo: -1.5, hi: 1.5, n: 12 }
    }
}

/// Either the quartic double well with parameter `franz_alpha` or a table
/// of values, one per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub franz_alpha: Option<f64>,
    pub values: Option<Vec<f64>>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            franz_alpha: Some(1.0),
            values: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Ins,
    Pt,
    Uncoupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub mode: SimMode,
    #[serde(default)]
    pub swap_rate: f64,
    pub horizon: f64,
    #[serde(default = "one")]
    pub replicas: usize,
    /// Grid indices of the starting state, one per temperature.
    pub initial: Vec<usize>,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    #[serde(default)]
    pub record_path: bool,
}

fn one() -> usize {
    1
}

fn default_checkpoints() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesConfig {
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_tolerance() -> f64 {
    RootOptions::default().tolerance
}

fn default_max_iterations() -> usize {
    RootOptions::default().max_iterations
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueFunctionConfig {
    pub delta: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    /// Association weights of the identity assignment to scan.
    pub w1: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFunction {
    /// Rate of the symmetrized empirical measure under infinite swapping.
    Symmetric,
    /// Rate of the weighted empirical measure (infinite off the
    /// weighted-symmetric set).
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedMeasure {
    Uniform,
    Product,
    Symmetrized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub function: RateFunction,
    pub measure: Option<NamedMeasure>,
    /// Explicit weights over product states (normalized on load).
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_temperatures")]
    pub temperatures: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub simulate: Option<SimulateConfig>,
    pub tables: Option<TablesConfig>,
    pub value_function: Option<ValueFunctionConfig>,
    pub diagnose: Option<DiagnoseConfig>,
    pub rate: Option<RateConfig>,
}

fn default_temperatures() -> Vec<f64> {
    vec![0.1, 0.5]
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Set `a.b.c = value` in a TOML table, parsing `value` as a TOML literal
/// (falling back to a plain string).
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{assignment}` is not key=value")))?;
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(config_err(format!("override `{assignment}` has no value")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| config_err(format!("`{path}`: `{key}` is not a table")))?;
        node = table
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(toml::Table::new()));
    }
    node.as_table_mut()
        .ok_or_else(|| config_err(format!("`{path}` does not name a table entry")))?
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    /// Parse TOML text, apply `key=value` overrides, and validate.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut root: Value = text
            .parse::<toml::Table>()
            .map(Value::Table)
            .map_err(|e| config_err(e.to_string()))?;
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let cfg: Self = root.try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.is_empty() {
            return Err(config_err("temperatures: need at least one"));
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(config_err(format!("temperatures: {t} is not positive")));
        }
        let g = &self.grid;
        if g.n < 2 || !(g.lo < g.hi) || !g.lo.is_finite() || !g.hi.is_finite() {
            return Err(config_err(format!("grid: need n >= 2 and lo < hi, got {g:?}")));
        }
        match (&self.potential.franz_alpha, &self.potential.values) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(config_err("potential: set exactly one of franz_alpha, values"))
            }
            (None, Some(v)) if v.len() != g.n => {
                return Err(config_err(format!("potential.values: {} entries for {} grid points", v.len(), g.n)))
            }
            _ => {}
        }
        if let Some(s) = &self.simulate {
            if !(s.horizon.is_finite() && s.horizon > 0.0) {
                return Err(config_err(format!("simulate.horizon: {} is not positive", s.horizon)));
            }
            if !(s.swap_rate.is_finite() && s.swap_rate >= 0.0) {
                return Err(config_err(format!("simulate.swap_rate: {} is negative", s.swap_rate)));
            }
            if s.replicas == 0 {
                return Err(config_err("simulate.replicas: need at least one"));
            }
            if s.initial.len() != self.temperatures.len() {
                return Err(config_err(format!(
                    "simulate.initial: {} entries for {} temperatures",
                    s.initial.len(),
                    self.temperatures.len()
                )));
            }
            if let Some(i) = s.initial.iter().find(|&&i| i >= g.n) {
                return Err(config_err(format!("simulate.initial: index {i} outside 0..{}", g.n)));
            }
            match s.mode {
                SimMode::Pt if self.temperatures.len() != 2 => {
                    return Err(config_err("simulate.mode = pt needs exactly two temperatures"))
                }
                SimMode::Ins if self.temperatures.len() < 2 => {
                    return Err(config_err("simulate.mode = ins needs at least two temperatures"))
                }
                _ => {}
            }
        }
        if let Some(t) = &self.tables {
            if self.temperatures.len() != 2 {
                return Err(config_err("tables: needs exactly two temperatures"));
            }
            if t.alphas.is_empty() || t.deltas.is_empty() {
                return Err(config_err("tables: alphas and deltas must be nonempty"));
            }
            if let Some(a) = t.alphas.iter().find(|a| !(a.is_finite() && **a > -0.5)) {
                return Err(config_err(format!("tables.alphas: {a} (need alpha > -1/2)")));
            }
            check_deltas("tables.deltas", &t.deltas)?;
            check_tolerance("tables.tolerance", t.tolerance)?;
        }
        if let Some(v) = &self.value_function {
            check_deltas("value_function.delta", &[v.delta])?;
            check_tolerance("value_function.tolerance", v.tolerance)?;
        }
        if let Some(d) = &self.diagnose {
            if self.temperatures.len() != 2 {
                return Err(config_err("diagnose: needs exactly two temperatures"));
            }
            if let Some(w) = d.w1.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
                return Err(config_err(format!("diagnose.w1: {w} outside (0, 1)")));
            }
            check_tolerance("diagnose.tolerance", d.tolerance)?;
        }
        if let Some(r) = &self.rate {
            match (&r.measure, &r.values) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(config_err("rate: set exactly one of measure, values"))
                }
                (None, Some(v)) => {
                    let size = g.n.pow(self.temperatures.len() as u32);
                    if v.len() != size {
                        return Err(config_err(format!("rate.values: {} entries for {size} product states", v.len())));
                    }
                    if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || v.iter().sum::<f64>() <= 0.0 {
                        return Err(config_err("rate.values: need nonnegative weights with positive sum"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::uniform(self.grid.lo, self.grid.hi, self.grid.n, AdjacencyKind::NearestNeighbor)
    }

    pub fn build_potential(&self, grid: &Grid) -> Result<Potential> {
        match (&self.potential.franz_alpha, &self.potential.values) {
            (Some(a), None) => Potential::franz(grid, *a),
            (None, Some(v)) => Potential::tabulated(v.clone()),
            _ => Err(config_err("potential: set exactly one of franz_alpha, values")),
        }
    }

    pub fn build_chain(&self) -> Result<(Grid, ProductChain)> {
        let grid = self.build_grid()?;
        let potential = self.build_potential(&grid)?;
        let chain = ProductChain::new(&grid, &potential, &self.temperatures)?;
        Ok((grid, chain))
    }

    /// Canonical JSON text used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn check_deltas(field: &str, deltas: &[f64]) -> Result<()> {
    if let Some(d) = deltas.iter().find(|d| !(**d >= 0.0 && **d < 1.0)) {
        return Err(config_err(format!("{field}: {d} outside [0, 1)")));
    }
    Ok(())
}

fn check_tolerance(field: &str, tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(config_err(format!("{field}: {tol} (need 0 < tolerance <= 1e-6)")));
    }
    Ok(())
}
