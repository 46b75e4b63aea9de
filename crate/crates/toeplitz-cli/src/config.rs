use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use toeplitz_lowrank::recovery::LowrankConfig;
use toeplitz_lowrank::sfft::RecoveryConfig;
use toeplitz_lowrank::Result;

/// Everything that determines a run besides the input files. Serialized into
/// every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub d: usize,
    pub k: usize,
    pub delta: f64,
    pub epsilon: f64,
    /// Matrices: diagonal floor `λ`. Signals: noise energy relative to signal.
    pub noise: f64,
    pub samples: Option<usize>,
    /// `C` in the default sample count `⌈C·k⁴/ε²⌉`.
    pub sample_constant: f64,
    pub trials: usize,
    /// Place planted frequencies on the half-integer grid.
    pub grid: bool,
    pub lowrank: LowrankConfig,
    /// Overrides the derived recovery configuration of `sfft`.
    pub sfft: Option<RecoveryConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            d: 1024,
            k: 2,
            delta: 1e-2,
            epsilon: 0.1,
            noise: 0.0,
            samples: None,
            sample_constant: 1.0,
            trials: 1,
            grid: false,
            lowrank: LowrankConfig::default(),
            sfft: None,
        }
    }
}

impl RunConfig {
    /// Overlay a JSON config file on `self`, object fields replacing fields.
    pub fn with_file(self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let patch: Value = serde_json::from_str(&text)?;
        let mut base = serde_json::to_value(&self)?;
        merge(&mut base, patch);
        Ok(serde_json::from_value(base)?)
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (key, value) in p {
                match b.get_mut(&key) {
                    Some(slot) if slot.is_object() && value.is_object() => merge(slot, value),
                    _ => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}
