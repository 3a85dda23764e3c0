use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::DEFAULT_EPSILONS;
use crate::model::ModelDescriptor;
use crate::montecarlo::SimConfig;

/// Full run configuration. Every section except `model` has defaults.
///
/// ```json
/// {
///   "model": {"model": "wright_fisher", "alpha": 0, "beta": 0, "k": 0.5, "phases": 4},
///   "simulation": {"step": 0.001, "horizon": 1.0, "n_paths": 1, "seed": 7},
///   "density": {"t": 1.0, "x": 0.5, "interval": [0.75, 1.0]}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelDescriptor,
    #[serde(default)]
    pub simulation: SimConfig,
    #[serde(default)]
    pub start: StartConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub bvp: BvpConfig,
    #[serde(default)]
    pub invariant: InvariantConfig,
    #[serde(default)]
    pub recurrence: RecurrenceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    pub x: f64,
    pub phase: usize,
}

impl Default for StartConfig {
    fn default() -> Self {
        Self { x: 0.5, phase: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub truncation: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            truncation: crate::spectral::DEFAULT_TRUNCATION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub t: f64,
    pub x: f64,
    /// With an interval the command writes the interval probability matrix
    /// instead of the density table.
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    pub points: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            t: 1.0,
            x: 0.5,
            interval: None,
            points: 199,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpConfig {
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
    pub grid: usize,
    #[serde(default)]
    pub refine: bool,
}

impl Default for BvpConfig {
    fn default() -> Self {
        Self {
            c: None,
            d: None,
            grid: 401,
            refine: false,
        }
    }
}

impl BvpConfig {
    pub fn interval(&self) -> Result<(f64, f64)> {
        let c = self.c.ok_or_else(|| invalid("bvp.c", "missing; pass --c or set it in the config"))?;
        let d = self.d.ok_or_else(|| invalid("bvp.d", "missing; pass --d or set it in the config"))?;
        Ok((c, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantConfig {
    /// Grid size including both endpoints; nodes are `sin^2` spaced.
    pub points: usize,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        Self { points: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceConfig {
    pub epsilons: Vec<f64>,
}

impl Default for RecurrenceConfig {
    fn default() -> Self {
        Self {
            epsilons: DEFAULT_EPSILONS.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        // a manifest carries the resolved config under "config"
        let value = match value {
            serde_json::Value::Object(mut o) if o.contains_key("command") && o.contains_key("config") => {
                o.remove("config").unwrap_or_default()
            }
            v => v,
        };
        Ok(serde_json::from_value(value)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
