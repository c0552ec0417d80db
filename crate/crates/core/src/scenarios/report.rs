use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::io::{read_ensemble, write_ensemble};
use crate::guidance::Trajectory;
use crate::idealized::Side;

/// Flags derived from one stored path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub start: Vec<f64>,
    /// Index of the stored path, absent when the path stopped at a node.
    pub path: Option<usize>,
    pub halted: Option<String>,
    pub started_side: Side,
    pub final_side: Option<Side>,
    pub turned: Option<bool>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub pointer_final_shift: Option<f64>,
    pub pointer_max_shift: Option<f64>,
    /// First time the pointer has moved by more than the report's threshold.
    pub pointer_onset: Option<f64>,
}

fn side(x: f64) -> Side {
    Side::of(x)
}

impl RunRecord {
    pub fn halted(start: &[f64], reason: &Error) -> Self {
        RunRecord {
            start: start.to_vec(),
            path: None,
            halted: Some(reason.to_string()),
            started_side: side(start[0]),
            final_side: None,
            turned: None,
            x_min: None,
            x_max: None,
            pointer_final_shift: None,
            pointer_max_shift: None,
            pointer_onset: None,
        }
    }

    /// Classify `tr`. The particle turned when its velocity over the first and
    /// last recorded intervals have opposite signs.
    pub fn from_path(index: usize, tr: &Trajectory, onset_threshold: f64) -> Self {
        let n = tr.len();
        let v0 = (tr.x(1) - tr.x(0)) / (tr.times()[1] - tr.times()[0]);
        let v1 = tr.final_velocity(0);
        let xs = tr.xs();
        let mut rec = RunRecord {
            start: tr.first().to_vec(),
            path: Some(index),
            halted: None,
            started_side: side(tr.x(0)),
            final_side: Some(side(tr.x(n - 1))),
            turned: Some(v0 * v1 < 0.0),
            x_min: Some(xs.iter().copied().fold(f64::INFINITY, f64::min)),
            x_max: Some(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            pointer_final_shift: None,
            pointer_max_shift: None,
            pointer_onset: None,
        };
        if tr.dim() == 2 {
            let q0 = tr.q(0);
            let d: Vec<f64> = (0..n).map(|i| (tr.q(i) - q0).abs()).collect();
            rec.pointer_final_shift = Some(tr.q(n - 1) - q0);
            rec.pointer_max_shift = Some(d.iter().copied().fold(0.0, f64::max));
            rec.pointer_onset = d.iter().position(|&v| v > onset_threshold).map(|i| tr.times()[i]);
        }
        rec
    }
}

/// Records for integrated paths, in start order; successful paths are
/// numbered consecutively.
pub fn classify(starts: &[Vec<f64>], paths: Vec<Result<Trajectory>>, onset_threshold: f64) -> (Vec<RunRecord>, Vec<Trajectory>) {
    let mut records = Vec::with_capacity(paths.len());
    let mut kept = Vec::new();
    for (start, p) in starts.iter().zip(paths) {
        match p {
            Ok(tr) => {
                records.push(RunRecord::from_path(kept.len(), &tr, onset_threshold));
                kept.push(tr);
            }
            Err(e) => records.push(RunRecord::halted(start, &e)),
        }
    }
    (records, kept)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

impl Check {
    /// Passes when `value < bound`.
    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), passed: value < bound, value, bound }
    }

    /// Passes when `value > bound`.
    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), passed: value > bound, value, bound }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Check { name: name.into(), passed, value: passed as u8 as f64, bound: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub config: serde_json::Value,
    pub overlap_onset: Option<f64>,
    /// Pointer displacement that marks the onset of pointer motion.
    pub onset_threshold: f64,
    pub norm_drift: f64,
    pub runs: Vec<RunRecord>,
    pub stats: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub paths: Vec<Trajectory>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `report.json`, `stats.json` and `trajectories/`. Returns the written files,
    /// relative to `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        fs::write(dir.join("stats.json"), serde_json::to_string_pretty(&self.stats)?)?;
        let mut files = vec!["report.json".to_string(), "stats.json".to_string()];
        if !self.paths.is_empty() {
            let names = write_ensemble(&dir.join("trajectories"), &self.paths)?;
            files.push("trajectories/index.csv".into());
            files.extend(names.into_iter().map(|n| format!("trajectories/{n}")));
        }
        Ok(files)
    }

    /// Load a run directory and recompute every record from its stored path.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let mut report: ScenarioReport = serde_json::from_slice(&fs::read(dir.join("report.json"))?)?;
        let traj = dir.join("trajectories");
        if traj.join("index.csv").exists() {
            report.paths = read_ensemble(&traj)?;
        }
        report.verify()?;
        Ok(report)
    }

    /// Error unless each stored record equals the one recomputed from its path.
    pub fn verify(&self) -> Result<()> {
        for (i, rec) in self.runs.iter().enumerate() {
            let Some(k) = rec.path else { continue };
            let tr = self
                .paths
                .get(k)
                .ok_or_else(|| Error::Parse(format!("run {i} refers to missing path {k}")))?;
            let again = RunRecord::from_path(k, tr, self.onset_threshold);
            if &again != rec {
                return Err(Error::Parse(format!("run {i}: stored flags differ from its trajectory")));
            }
        }
        Ok(())
    }
}
