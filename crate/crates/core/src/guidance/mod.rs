//! Bohmian guidance: velocity fields, trajectory integration and ensembles.

mod field;
pub mod io;
mod sample;

pub use field::{Field1D, Field2D, VelocityField, RHO_FLOOR};
pub use sample::{ks_statistic, sample_density_2d, sample_initial, EnsembleSpec, SampleSource, Sampling};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagate::{Series1D, SeriesSpinor};
use crate::qfield::AxisOps;
use crate::scalar::{Real, SpectralReal};

/// Configuration-space path sampled at increasing times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T = f64> {
    dim: usize,
    times: Vec<T>,
    coords: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(dim: usize) -> Self {
        Trajectory { dim, times: Vec::new(), coords: Vec::new() }
    }

    pub fn from_parts(dim: usize, times: Vec<T>, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || coords.len() != times.len() * dim {
            return Err(Error::Parse("trajectory coordinates do not match its times".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("trajectory times must increase strictly".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parse("trajectory has non-finite coordinates".into()));
        }
        Ok(Trajectory { dim, times, coords })
    }

    pub fn push(&mut self, t: T, p: &[T]) {
        debug_assert_eq!(p.len(), self.dim);
        self.times.push(t);
        self.coords.extend_from_slice(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Particle coordinate at sample `i`.
    pub fn x(&self, i: usize) -> T {
        self.coords[i * self.dim]
    }

    /// Pointer coordinate at sample `i` (2D paths only).
    pub fn q(&self, i: usize) -> T {
        self.coords[i * self.dim + 1]
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn qs(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.q(i)).collect()
    }

    pub fn first(&self) -> &[T] {
        self.point(0)
    }

    pub fn last(&self) -> &[T] {
        self.point(self.len() - 1)
    }

    /// Finite-difference velocity of coordinate `c` over the last interval.
    pub fn final_velocity(&self, c: usize) -> T {
        let n = self.len();
        let dt = self.times[n - 1] - self.times[n - 2];
        (self.point(n - 1)[c] - self.point(n - 2)[c]) / dt
    }
}

/// Integration settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integration {
    /// RK4 steps per snapshot interval.
    pub substeps: usize,
    /// Record every `record_every`-th snapshot time (the last is always kept).
    pub record_every: usize,
    /// Spectral refinement of periodic axes before interpolation.
    pub refine: usize,
    /// Local error bound (length units) for step subdivision.
    pub tol: f64,
}

impl Default for Integration {
    fn default() -> Self {
        Integration { substeps: 4, record_every: 1, refine: 4, tol: 1e-9 }
    }
}

fn node<T: Real, const D: usize>(t: T, p: [T; D]) -> Error {
    Error::NodeEncounter { time: t.to_f64(), point: p.iter().map(|c| c.to_f64()).collect() }
}

fn axpy<T: Real, const D: usize>(p: [T; D], h: T, v: [T; D]) -> [T; D] {
    let mut out = p;
    for k in 0..D {
        out[k] += h * v[k];
    }
    out
}

/// Velocity at time `t` in `[ta, tb]`, linear in time between the two frozen
/// fields plus the exact drift.
fn velocity_between<T: Real, const D: usize, F: VelocityField<T, D>>(
    a: &F,
    b: &F,
    ta: T,
    tb: T,
    t: T,
    p: [T; D],
) -> Result<[T; D]> {
    let s = (t - ta) / (tb - ta);
    let va = a.velocity(p).ok_or_else(|| node(t, p))?;
    let vb = b.velocity(p).ok_or_else(|| node(t, p))?;
    let drift = a.drift(t, p);
    let mut v = [T::zero(); D];
    for k in 0..D {
        v[k] = (T::one() - s) * va[k] + s * vb[k] + drift[k];
    }
    Ok(v)
}

fn rk4_step<T: Real, const D: usize, F: VelocityField<T, D>>(
    a: &F,
    b: &F,
    (ta, tb): (T, T),
    t: T,
    h: T,
    p: [T; D],
) -> Result<[T; D]> {
    let half = h / T::two();
    let k1 = velocity_between(a, b, ta, tb, t, p)?;
    let k2 = velocity_between(a, b, ta, tb, t + half, axpy(p, half, k1))?;
    let k3 = velocity_between(a, b, ta, tb, t + half, axpy(p, half, k2))?;
    let k4 = velocity_between(a, b, ta, tb, t + h, axpy(p, h, k3))?;
    let mut out = p;
    for k in 0..D {
        out[k] += h / T::lit(6.0) * (k1[k] + T::two() * (k2[k] + k3[k]) + k4[k]);
    }
    Ok(out)
}

/// RK4 over `[t, t + h]`, halving the step (by step doubling) until the
/// two estimates agree to `tol`.
#[allow(clippy::too_many_arguments)]
fn rk4_controlled<T: Real, const D: usize, F: VelocityField<T, D>>(
    a: &F,
    b: &F,
    span: (T, T),
    t: T,
    h: T,
    p: [T; D],
    tol: T,
    depth: u32,
) -> Result<[T; D]> {
    let whole = rk4_step(a, b, span, t, h, p)?;
    let half = h / T::two();
    let mid = rk4_step(a, b, span, t, half, p)?;
    let two = rk4_step(a, b, span, t + half, half, mid)?;
    let err = (0..D).fold(T::zero(), |m, k| m.max((two[k] - whole[k]).fabs()));
    if err <= tol || depth >= MAX_HALVINGS {
        return Ok(two);
    }
    let mid = rk4_controlled(a, b, span, t, half, p, tol, depth + 1)?;
    rk4_controlled(a, b, span, t + half, half, mid, tol, depth + 1)
}

const MAX_HALVINGS: u32 = 24;

/// Classical RK4 across one snapshot interval: `substeps` steps, each
/// subdivided where the local error estimate exceeds `tol`.
pub fn rk4_interval<T: Real, const D: usize, F: VelocityField<T, D>>(
    a: &F,
    b: &F,
    ta: T,
    tb: T,
    p0: [T; D],
    substeps: usize,
    tol: T,
) -> Result<[T; D]> {
    let n = substeps.max(1);
    let h = (tb - ta) / T::count(n);
    let mut p = p0;
    for i in 0..n {
        let t = ta + T::count(i) * h;
        p = rk4_controlled(a, b, (ta, tb), t, h, p, tol, 0)?;
    }
    Ok(p)
}

/// Ensemble of paths advanced one snapshot interval at a time, so that only
/// two fields need to be alive at once.
#[derive(Clone, Debug)]
pub struct Tracker<T, const D: usize> {
    paths: Vec<Trajectory<T>>,
    current: Vec<[T; D]>,
    halted: Vec<Option<(f64, Vec<f64>)>>,
    opts: Integration,
    intervals: usize,
    time: T,
}

impl<T: Real, const D: usize> Tracker<T, D> {
    pub fn new(t0: T, starts: &[[T; D]], opts: Integration) -> Self {
        let paths = starts
            .iter()
            .map(|p| {
                let mut tr = Trajectory::new(D);
                tr.push(t0, p);
                tr
            })
            .collect();
        Tracker {
            paths,
            current: starts.to_vec(),
            halted: vec![None; starts.len()],
            opts,
            intervals: 0,
            time: t0,
        }
    }

    /// Move every live path from `ta` to `tb`. Paths that reach a node stop
    /// there and keep their report.
    pub fn advance<F: VelocityField<T, D>>(&mut self, a: &F, b: &F, ta: T, tb: T, last: bool) {
        let substeps = self.opts.substeps;
        let tol = T::lit(self.opts.tol);
        self.current
            .par_iter_mut()
            .zip(self.halted.par_iter_mut())
            .for_each(|(p, halt)| {
                if halt.is_some() {
                    return;
                }
                match rk4_interval(a, b, ta, tb, *p, substeps, tol) {
                    Ok(q) => *p = q,
                    Err(Error::NodeEncounter { time, point }) => *halt = Some((time, point)),
                    Err(_) => unreachable!("rk4 only reports nodes"),
                }
            });
        self.intervals += 1;
        self.time = tb;
        if last || self.intervals.is_multiple_of(self.opts.record_every.max(1)) {
            for ((tr, p), h) in self.paths.iter_mut().zip(&self.current).zip(&self.halted) {
                if h.is_none() {
                    tr.push(tb, p);
                }
            }
        }
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn positions(&self) -> &[[T; D]] {
        &self.current
    }

    /// One result per start: the path, or the node report that stopped it.
    pub fn finish(self) -> Vec<Result<Trajectory<T>>> {
        self.paths
            .into_iter()
            .zip(self.halted)
            .map(|(tr, h)| match h {
                None => Ok(tr),
                Some((time, point)) => Err(Error::NodeEncounter { time, point }),
            })
            .collect()
    }
}

fn track_series<T: Real, F: VelocityField<T, 1>>(
    times: &[T],
    fields: impl Iterator<Item = F>,
    starts: &[T],
    opts: Integration,
) -> Result<Vec<Result<Trajectory<T>>>> {
    if times.len() < 2 {
        return Err(Error::Config("need at least two snapshots".into()));
    }
    let starts: Vec<[T; 1]> = starts.iter().map(|&x| [x]).collect();
    let mut tracker = Tracker::new(times[0], &starts, opts);
    let mut fields = fields;
    let mut prev = fields.next().unwrap();
    for (k, next) in fields.enumerate() {
        let last = k + 2 == times.len();
        tracker.advance(&prev, &next, times[k], times[k + 1], last);
        prev = next;
    }
    Ok(tracker.finish())
}

/// Integrate trajectories from each start through a scalar snapshot series.
pub fn integrate_ensemble<T: SpectralReal>(
    series: &Series1D<T>,
    starts: &[T],
    opts: Integration,
) -> Result<Vec<Result<Trajectory<T>>>> {
    let ops = AxisOps::new(series.grid, series.boundary)?;
    track_series(&series.times, series.fields.iter().map(|f| Field1D::new(f, &ops, opts.refine)), starts, opts)
}

/// Single-path version of [`integrate_ensemble`]; a node encounter is an error.
pub fn integrate_trajectory<T: SpectralReal>(series: &Series1D<T>, start: T, opts: Integration) -> Result<Trajectory<T>> {
    check_start(series, start)?;
    integrate_ensemble(series, &[start], opts)?.pop().unwrap()
}

fn check_start<T: SpectralReal>(series: &Series1D<T>, start: T) -> Result<()> {
    let ops = AxisOps::new(series.grid, series.boundary)?;
    let f = Field1D::new(&series.fields[0], &ops, 1);
    if f.velocity([start]).is_none() {
        return Err(Error::Domain(format!("start {start} lies where the density is below the floor")));
    }
    Ok(())
}

pub fn integrate_spinor_ensemble<T: SpectralReal>(
    series: &SeriesSpinor<T>,
    starts: &[T],
    opts: Integration,
) -> Result<Vec<Result<Trajectory<T>>>> {
    let ops = AxisOps::periodic(series.grid);
    track_series(&series.times, series.fields.iter().map(|f| Field1D::spinor(f, &ops, opts.refine)), starts, opts)
}

/// True when the order of the particle coordinates is the same at every
/// recorded time (paths must share their time grid).
pub fn ordering_preserved<T: Real>(paths: &[Trajectory<T>]) -> bool {
    if paths.len() < 2 {
        return true;
    }
    let n = paths[0].len();
    if paths.iter().any(|p| p.len() != n) {
        return false;
    }
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| paths[a].x(0).partial_cmp(&paths[b].x(0)).unwrap());
    (0..n).all(|i| order.windows(2).all(|w| paths[w[0]].x(i) < paths[w[1]].x(i)))
}

#[cfg(test)]
mod tests;
