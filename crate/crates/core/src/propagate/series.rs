use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qfield::io::{read_field, write_field};
use crate::qfield::{Boundary, Grid1D, SpinorWaveFunction1D, WaveFunction1D};
use crate::scalar::Real;

/// Time-ordered snapshots of a one-particle wave.
#[derive(Clone, Debug)]
pub struct Series1D<T = f64> {
    pub grid: Grid1D<T>,
    pub boundary: Boundary<T>,
    pub times: Vec<T>,
    pub fields: Vec<WaveFunction1D<T>>,
}

impl<T: Real> Series1D<T> {
    pub fn new(grid: Grid1D<T>, boundary: Boundary<T>) -> Self {
        Series1D { grid, boundary, times: Vec::new(), fields: Vec::new() }
    }

    pub fn push(&mut self, t: T, psi: WaveFunction1D<T>) {
        self.times.push(t);
        self.fields.push(psi);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&WaveFunction1D<T>> {
        self.fields.last()
    }
}

/// Time-ordered snapshots of a spinor wave.
#[derive(Clone, Debug)]
pub struct SeriesSpinor<T = f64> {
    pub grid: Grid1D<T>,
    pub times: Vec<T>,
    pub fields: Vec<SpinorWaveFunction1D<T>>,
}

impl<T: Real> SeriesSpinor<T> {
    pub fn new(grid: Grid1D<T>) -> Self {
        SeriesSpinor { grid, times: Vec::new(), fields: Vec::new() }
    }

    pub fn push(&mut self, t: T, psi: SpinorWaveFunction1D<T>) {
        self.times.push(t);
        self.fields.push(psi);
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    x_min: f64,
    x_max: f64,
    n: usize,
    #[serde(default)]
    walls: Option<(f64, f64)>,
    times: Vec<f64>,
    files: Vec<String>,
    #[serde(default)]
    meta: serde_json::Value,
}

impl Series1D<f64> {
    /// Write one field file per snapshot plus `manifest.json` into `dir`.
    /// `meta` is stored verbatim (coupling parameters and the like).
    pub fn write_dir(&self, dir: &Path, meta: serde_json::Value) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.len());
        for (i, psi) in self.fields.iter().enumerate() {
            let name = format!("field_{i:05}.txt");
            write_field(psi, BufWriter::new(fs::File::create(dir.join(&name))?))?;
            files.push(name);
        }
        let walls = match self.boundary {
            Boundary::Periodic => None,
            Boundary::Box { lo, hi } => Some((lo, hi)),
        };
        let m = Manifest {
            x_min: self.grid.x_min(),
            x_max: self.grid.x_max(),
            n: self.grid.len(),
            walls,
            times: self.times.clone(),
            files,
            meta,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)?)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<(Self, serde_json::Value)> {
        let m: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
        if m.times.len() != m.files.len() {
            return Err(Error::Parse("manifest lists different numbers of times and files".into()));
        }
        let grid = Grid1D::new(m.x_min, m.x_max, m.n)?;
        let boundary = m.walls.map_or(Boundary::Periodic, |(lo, hi)| Boundary::Box { lo, hi });
        let mut s = Series1D::new(grid, boundary);
        for (t, f) in m.times.iter().zip(&m.files) {
            let psi = read_field(BufReader::new(fs::File::open(dir.join(f))?))?;
            if *psi.grid() != grid {
                return Err(Error::Parse(format!("{f}: grid differs from the manifest")));
            }
            s.push(*t, psi);
        }
        Ok((s, m.meta))
    }
}
