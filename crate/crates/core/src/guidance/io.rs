//! CSV trajectories: one `t,x[,q]` row per sample; ensembles as one file per
//! path plus `index.csv`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::Trajectory;
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn write_trajectory<W: Write>(tr: &Trajectory<f64>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: &[&str] = if tr.dim() == 1 { &["t", "x"] } else { &["t", "x", "q"] };
    out.write_record(header).map_err(csv_err)?;
    for (i, t) in tr.times().iter().enumerate() {
        let mut row = vec![format!("{t:?}")];
        row.extend(tr.point(i).iter().map(|c| format!("{c:?}")));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(r: R) -> Result<Trajectory<f64>> {
    let mut rdr = csv::Reader::from_reader(r);
    let dim = rdr.headers().map_err(csv_err)?.len().checked_sub(1).filter(|&d| d > 0);
    let dim = dim.ok_or_else(|| Error::Parse("trajectory header needs t and at least one coordinate".into()))?;
    let (mut times, mut coords) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != dim + 1 {
            return Err(Error::Parse("ragged trajectory row".into()));
        }
        times.push(vals[0]);
        coords.extend_from_slice(&vals[1..]);
    }
    Trajectory::from_parts(dim, times, coords)
}

/// Write `paths` as `traj_00000.csv`, ... plus an index with start and end
/// points. Returns the file names.
pub fn write_ensemble(dir: &Path, paths: &[Trajectory<f64>]) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut index = csv::Writer::from_path(dir.join("index.csv")).map_err(csv_err)?;
    index.write_record(["id", "file", "x0", "x1"]).map_err(csv_err)?;
    let mut names = Vec::with_capacity(paths.len());
    for (i, tr) in paths.iter().enumerate() {
        let name = format!("traj_{i:05}.csv");
        write_trajectory(tr, fs::File::create(dir.join(&name))?)?;
        index
            .write_record([i.to_string(), name.clone(), format!("{:?}", tr.x(0)), format!("{:?}", tr.x(tr.len() - 1))])
            .map_err(csv_err)?;
        names.push(name);
    }
    index.flush()?;
    Ok(names)
}

pub fn read_ensemble(dir: &Path) -> Result<Vec<Trajectory<f64>>> {
    let mut rdr = csv::Reader::from_path(dir.join("index.csv")).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let file = rec.get(1).ok_or_else(|| Error::Parse("index row without file".into()))?;
        out.push(read_trajectory(fs::File::open(dir.join(file))?)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip(pts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40), two in any::<bool>()) {
            let dim = if two { 2 } else { 1 };
            let mut tr = Trajectory::new(dim);
            for (i, (x, q)) in pts.iter().enumerate() {
                let p = [*x, *q];
                tr.push(i as f64 * 0.1 + 1e-3, &p[..dim]);
            }
            let mut buf = Vec::new();
            write_trajectory(&tr, &mut buf).unwrap();
            prop_assert_eq!(read_trajectory(&buf[..]).unwrap(), tr);
        }
    }

    #[test]
    fn rejects_decreasing_times() {
        let text = "t,x\n0.0,1.0\n0.0,2.0\n";
        assert!(read_trajectory(text.as_bytes()).is_err());
    }
}
