//! Per-field coarse space selection, written like `GDSW*(T+R)-RGDSW`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decomposition::StrategyRegistry;
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseConfig {
    /// Registry name of the displacement strategy.
    pub displacement: String,
    /// Registry name of the temperature strategy.
    pub temperature: String,
    pub rotations: bool,
    /// Defaults to the domain centroid.
    #[serde(default)]
    pub rotation_center: Option<[f64; 3]>,
    #[serde(default)]
    pub truncation: f64,
}

impl Default for CoarseConfig {
    fn default() -> Self {
        Self {
            displacement: "GDSW*".into(),
            temperature: "RGDSW".into(),
            rotations: true,
            rotation_center: None,
            truncation: 1e-4,
        }
    }
}

impl CoarseConfig {
    /// Parses `U(T)-V` or `U(T+R)-V`, resolving both names through the
    /// registry to their canonical spelling.
    pub fn parse(label: &str, registry: &StrategyRegistry) -> Result<Self> {
        let bad = || invalid(format!("malformed coarse space label `{label}`; expected e.g. `GDSW*(T+R)-RGDSW`"));
        let open = label.find('(').ok_or_else(bad)?;
        let close = label.find(')').ok_or_else(bad)?;
        if close < open {
            return Err(bad());
        }
        let modes = label[open + 1..close].replace(' ', "").to_ascii_uppercase();
        let rotations = match modes.as_str() {
            "T" => false,
            "T+R" => true,
            _ => return Err(bad()),
        };
        let rest = label[close + 1..].trim();
        let temperature = rest.strip_prefix('-').ok_or_else(bad)?.trim();
        Ok(Self {
            displacement: registry.get(label[..open].trim())?.name().to_string(),
            temperature: registry.get(temperature)?.name().to_string(),
            rotations,
            rotation_center: None,
            truncation: 0.0,
        })
    }

    pub fn with_truncation(mut self, tol: f64) -> Self {
        self.truncation = tol;
        self
    }

    pub fn validate(&self, registry: &StrategyRegistry) -> Result<()> {
        registry.get(&self.displacement)?;
        registry.get(&self.temperature)?;
        if !(self.truncation >= 0.0) {
            return Err(invalid(format!("truncation tolerance must be nonnegative, got {}", self.truncation)));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Coarse functions per displacement component.
    pub fn displacement_modes(&self) -> usize {
        if self.rotations {
            6
        } else {
            3
        }
    }
}

impl fmt::Display for CoarseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let modes = if self.rotations { "T+R" } else { "T" };
        write!(f, "{}({modes})-{}", self.displacement, self.temperature)
    }
}
