//! Configuration-driven crossing, measurement and Stern-Gerlach runs with
//! self-verifying reports.

mod fig;
mod measure;
mod protect;
mod report;
mod setup;
mod spin;

pub use fig::{density_cdf, run_fig1, run_fig2, Fig1Config, Fig2Config, NORM_DRIFT_LIMIT, ONSET_FRACTION};
pub use measure::{run_fig3_ensemble, run_fig4_delayed, Fig3Config, Fig4Config};
pub use protect::{run_protective, ProtectiveScenarioConfig};
pub use report::{classify, Check, RunRecord, ScenarioReport};
pub use setup::{run_2d, CrossingSetup, PointerSetup, PointerShape, Run2D, MAX_SPREADING, OVERLAP_THRESHOLD, PADDING_WIDTHS};
pub use spin::{run_stern_gerlach, SternGerlachConfig};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScenarioConfig {
    Fig1(Fig1Config),
    Fig2(Fig2Config),
    Fig3Ensemble(Fig3Config),
    Fig4Delayed(Fig4Config),
    Protective(ProtectiveScenarioConfig),
    SternGerlach(SternGerlachConfig),
}

impl ScenarioConfig {
    /// Parse a JSON document after applying `path=value` overrides.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text)?;
        for o in overrides {
            let (path, raw) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not of the form path=value")))?;
            set_path(&mut doc, path, raw)?;
        }
        serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Fig1(_) => "fig1",
            ScenarioConfig::Fig2(_) => "fig2",
            ScenarioConfig::Fig3Ensemble(_) => "fig3_ensemble",
            ScenarioConfig::Fig4Delayed(_) => "fig4_delayed",
            ScenarioConfig::Protective(_) => "protective",
            ScenarioConfig::SternGerlach(_) => "stern_gerlach",
        }
    }

    /// Master seed of sampled ensembles, if the scenario samples.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ScenarioConfig::Fig1(c) if c.ensemble > 0 => Some(c.seed),
            ScenarioConfig::Fig3Ensemble(c) => Some(c.seed),
            ScenarioConfig::SternGerlach(c) => Some(c.seed),
            _ => None,
        }
    }

    pub fn run(&self) -> Result<ScenarioReport> {
        match self {
            ScenarioConfig::Fig1(c) => run_fig1(c),
            ScenarioConfig::Fig2(c) => run_fig2(c),
            ScenarioConfig::Fig3Ensemble(c) => run_fig3_ensemble(c),
            ScenarioConfig::Fig4Delayed(c) => run_fig4_delayed(c),
            ScenarioConfig::Protective(c) => run_protective(c),
            ScenarioConfig::SternGerlach(c) => run_stern_gerlach(c),
        }
    }
}

/// Set `doc.a.b.c` to `raw`, read as JSON when it parses and as a string
/// otherwise. Missing objects along the path are created; numeric segments
/// index arrays.
pub fn set_path(doc: &mut Value, path: &str, raw: &str) -> Result<()> {
    if path.is_empty() {
        return Err(Error::Config("empty override path".into()));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let k: usize = part
                    .parse()
                    .map_err(|_| Error::Config(format!("{path}: {part:?} is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(k)
                    .ok_or_else(|| Error::Config(format!("{path}: index {k} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::Config(format!("{path}: {part:?} is inside a scalar"))),
        };
    }
    unreachable!()
}

#[cfg(test)]
mod tests;
