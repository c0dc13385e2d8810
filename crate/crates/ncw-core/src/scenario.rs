//! TOML scenario files: the on-disk format consumed by the CLI and demos.
//!
//! ```toml
//! [parameters]
//! alpha_c = 0.4   # red per-shooter rate at full network support
//! alpha_d = 0.15  # red per-shooter rate with the network destroyed
//! gamma_a = 0.2   # independent-force rate against blue
//! beta_r = 0.5    # blue rate against red shooters
//! beta_n = 0.3    # blue rate against the support force
//! beta_a = 0.2    # blue rate against the independent force
//!
//! [initial]
//! b0 = 170.0
//! r0 = 120.0
//! n0 = 20.0
//! a0 = 50.0
//!
//! [strategy]           # optional; defaults to greedy
//! mode = "scripted"    # or "greedy"
//! stages = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
//!
//! [integrator]         # optional; fields default individually
//! step = 1e-3
//! event_tolerance = 1e-10
//! max_time = 1e4
//! ```
//!
//! Unknown keys anywhere are rejected, with the offending key and location
//! named in the error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Allocation, Scenario};
use crate::sim::{IntegratorConfig, StrategyScript};
use crate::{Error, Result};

/// Attrition-rate section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersSection {
    /// Red per-shooter rate at full network support.
    pub alpha_c: f64,
    /// Red per-shooter rate with the network destroyed.
    pub alpha_d: f64,
    /// Independent-force rate against blue.
    pub gamma_a: f64,
    /// Blue rate against red shooters.
    pub beta_r: f64,
    /// Blue rate against the support force.
    pub beta_n: f64,
    /// Blue rate against the independent force.
    pub beta_a: f64,
}

/// Initial force levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// Initial blue level.
    pub b0: f64,
    /// Initial red-shooter level.
    pub r0: f64,
    /// Initial support-force level.
    pub n0: f64,
    /// Initial independent-force level.
    pub a0: f64,
}

/// Strategy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyMode {
    /// Recompute threatening rates at each stage boundary.
    Greedy,
    /// Fixed per-stage allocations from `stages`.
    Scripted,
}

/// Strategy section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    /// Allocation policy.
    pub mode: StrategyMode,
    /// Per-stage allocations, required for (and only valid with) scripted
    /// mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<[f64; 3]>>,
}

/// Integrator section; omitted fields take the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    /// RK4 step size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Event bisection width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_tolerance: Option<f64>,
    /// Simulated-time budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Attrition rates.
    pub parameters: ParametersSection,
    /// Initial force levels.
    pub initial: InitialSection,
    /// Optional strategy (greedy when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategySection>,
    /// Optional integrator overrides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorSection>,
}

impl ScenarioFile {
    /// Parses TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads and parses a file.
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Serializes back to TOML.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Validated scenario from the `parameters` and `initial` sections.
    ///
    /// File-level contract is stricter than the in-memory one: `n0` must be
    /// strictly positive (the degenerate disconnected form is an internal
    /// rebasing artifact, not an input format).
    pub fn scenario(&self) -> Result<Scenario> {
        if self.initial.n0 <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "n0 must be > 0, got {}",
                self.initial.n0
            )));
        }
        Scenario {
            alpha_c: self.parameters.alpha_c,
            alpha_d: self.parameters.alpha_d,
            gamma_a: self.parameters.gamma_a,
            beta_r: self.parameters.beta_r,
            beta_n: self.parameters.beta_n,
            beta_a: self.parameters.beta_a,
            b0: self.initial.b0,
            r0: self.initial.r0,
            n0: self.initial.n0,
            a0: self.initial.a0,
        }
        .validated()
    }

    /// Strategy script from the `strategy` section (greedy when absent).
    pub fn strategy(&self) -> Result<StrategyScript> {
        let Some(section) = &self.strategy else {
            return Ok(StrategyScript::greedy());
        };
        match section.mode {
            StrategyMode::Greedy => {
                if section.stages.is_some() {
                    return Err(Error::InvalidConfig(
                        "greedy strategy takes no stages; remove the stages key or use scripted mode"
                            .into(),
                    ));
                }
                Ok(StrategyScript::greedy())
            }
            StrategyMode::Scripted => {
                let stages = section.stages.as_deref().unwrap_or_default();
                if stages.is_empty() {
                    return Err(Error::InvalidConfig(
                        "scripted strategy needs a non-empty stages list".into(),
                    ));
                }
                let allocations = stages
                    .iter()
                    .enumerate()
                    .map(|(i, &[pi1, pi2, pi3])| {
                        Allocation::new(pi1, pi2, pi3).map_err(|e| {
                            Error::InvalidConfig(format!("stages[{i}]: {e}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                StrategyScript::scripted(allocations)
            }
        }
    }

    /// Integrator config from the `integrator` section, defaulting missing
    /// fields.
    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let section = self.integrator.unwrap_or_default();
        let defaults = IntegratorConfig::default();
        IntegratorConfig::new(
            section.step.unwrap_or(defaults.step),
            section.event_tolerance.unwrap_or(defaults.event_tolerance),
            section.max_time.unwrap_or(defaults.max_time),
        )
    }

    /// True when two files describe the same battle (same parameters and
    /// initial levels); strategy and integrator sections may differ.
    pub fn same_battle_as(&self, other: &ScenarioFile) -> bool {
        self.parameters == other.parameters && self.initial == other.initial
    }
}
