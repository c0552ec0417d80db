//! Columnar text format for fields.
//!
//! ```text
//! # grid x_min=-8 x_max=8 n=64
//! -8 1.2e-14 0
//! ...
//! ```
//! Two-dimensional fields carry a second `# grid_q` header line and rows of
//! `x q re im`. Numbers use Rust's shortest round-trip formatting.

use std::io::{BufRead, Write};

use num_complex::Complex;

use super::{Grid1D, WaveFunction1D, WaveFunction2D};
use crate::error::{Error, Result};
use crate::scalar::Real;

fn grid_header(tag: &str, g: &Grid1D<f64>) -> String {
    format!("# {tag} x_min={} x_max={} n={}", g.x_min(), g.x_max(), g.len())
}

fn parse_grid(line: &str, tag: &str) -> Result<Grid1D<f64>> {
    let rest = line
        .strip_prefix("# ")
        .and_then(|l| l.strip_prefix(tag))
        .ok_or_else(|| Error::Parse(format!("expected '# {tag}' header, got {line:?}")))?;
    let mut x_min = None;
    let mut x_max = None;
    let mut n = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field {kv:?}")))?;
        let bad = |_| Error::Parse(format!("bad value in {kv:?}"));
        match k {
            "x_min" => x_min = Some(v.parse::<f64>().map_err(bad)?),
            "x_max" => x_max = Some(v.parse::<f64>().map_err(bad)?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad n {v:?}")))?),
            _ => {}
        }
    }
    match (x_min, x_max, n) {
        (Some(a), Some(b), Some(n)) => Grid1D::new(a, b, n),
        _ => Err(Error::Parse("incomplete grid header".into())),
    }
}

fn parse_row(line: &str, cols: usize) -> Result<Vec<f64>> {
    let v: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
    let v = v.map_err(|e| Error::Parse(format!("{e} in row {line:?}")))?;
    if v.len() != cols {
        return Err(Error::Parse(format!("expected {cols} columns in {line:?}")));
    }
    Ok(v)
}

pub fn write_field<T: Real, W: Write>(psi: &WaveFunction1D<T>, mut w: W) -> Result<()> {
    let g = psi.grid().to_f64();
    writeln!(w, "{}", grid_header("grid", &g))?;
    for (i, z) in psi.amplitudes().iter().enumerate() {
        writeln!(w, "{} {} {}", g.x(i), z.re.to_f64(), z.im.to_f64())?;
    }
    Ok(())
}

pub fn read_field<R: BufRead>(r: R) -> Result<WaveFunction1D<f64>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))??;
    let grid = parse_grid(&header, "grid")?;
    let mut amp = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_row(&line, 3)?;
        amp.push(Complex::new(v[1], v[2]));
    }
    WaveFunction1D::new(grid, amp)
}

pub fn write_field_2d<T: Real, W: Write>(psi: &WaveFunction2D<T>, mut w: W) -> Result<()> {
    let gx = psi.grid_x().to_f64();
    let gq = psi.grid_q().to_f64();
    writeln!(w, "{}", grid_header("grid", &gx))?;
    writeln!(w, "{}", grid_header("grid_q", &gq))?;
    let nq = gq.len();
    for (idx, z) in psi.amplitudes().iter().enumerate() {
        writeln!(
            w,
            "{} {} {} {}",
            gx.x(idx / nq),
            gq.x(idx % nq),
            z.re.to_f64(),
            z.im.to_f64()
        )?;
    }
    Ok(())
}

pub fn read_field_2d<R: BufRead>(r: R) -> Result<WaveFunction2D<f64>> {
    let mut lines = r.lines();
    let h1 = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))??;
    let h2 = lines.next().ok_or_else(|| Error::Parse("missing grid_q header".into()))??;
    let gx = parse_grid(&h1, "grid")?;
    let gq = parse_grid(&h2, "grid_q")?;
    let mut amp = Vec::with_capacity(gx.len() * gq.len());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_row(&line, 4)?;
        amp.push(Complex::new(v[2], v[3]));
    }
    WaveFunction2D::new(gx, gq, amp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{build_packet, PacketSpec};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn field_text_round_trip_is_exact(c in -2.0f64..2.0, v in -5.0f64..5.0, w in 0.3f64..1.5) {
            let g = Grid1D::new(-8.0, 8.0, 64).unwrap();
            let psi = build_packet(&g, &PacketSpec::gaussian(c, w, v)).unwrap();
            let mut buf = Vec::new();
            write_field(&psi, &mut buf).unwrap();
            let back = read_field(&buf[..]).unwrap();
            prop_assert_eq!(back, psi);
        }
    }

    #[test]
    fn two_dimensional_round_trip() {
        let gx = Grid1D::new(-8.0, 8.0, 64).unwrap();
        let gq = Grid1D::new(-4.0, 4.0, 64).unwrap();
        let a = build_packet(&gx, &PacketSpec::gaussian(1.0, 1.0, 2.0)).unwrap();
        let b = build_packet(&gq, &PacketSpec::gaussian(0.0, 0.7, 0.0)).unwrap();
        let psi = WaveFunction2D::product(&a, &b);
        let mut buf = Vec::new();
        write_field_2d(&psi, &mut buf).unwrap();
        assert_eq!(read_field_2d(&buf[..]).unwrap(), psi);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_field(&b"x y z\n"[..]).is_err());
        assert!(read_field(&b"# grid x_min=0 x_max=1 n=64\n0 1\n"[..]).is_err());
    }
}
