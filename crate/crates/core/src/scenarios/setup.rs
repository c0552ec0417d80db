use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::{Field2D, Integration, Trajectory, Tracker};
use crate::propagate::{kinetic_dt, step_plan, Evolver1D, Evolver2D, Hamiltonian2DConfig};
use crate::qfield::{build_packet, superpose, Grid1D, PacketSpec, WaveFunction1D, WaveFunction2D};

/// Largest relative growth of a packet's width allowed over a run.
pub const MAX_SPREADING: f64 = 0.02;
/// Packets must stay this many widths inside the domain.
pub const PADDING_WIDTHS: f64 = 6.0;
/// Threshold on the integrated overlap of the two branch densities.
pub const OVERLAP_THRESHOLD: f64 = 0.01;

/// Two Gaussian packets heading for each other from `-center` and `+center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossingSetup {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub center: f64,
    pub width: f64,
    pub speed: f64,
    pub left_weight: f64,
    pub right_weight: f64,
    pub t_end: f64,
    /// Time step; derived from the momentum content when absent.
    pub dt: Option<f64>,
    /// Steps between stored snapshots.
    pub stride: usize,
}

impl Default for CrossingSetup {
    fn default() -> Self {
        CrossingSetup {
            x_min: -40.0,
            x_max: 40.0,
            nx: 1024,
            center: 19.2,
            width: 3.2,
            speed: 20.0,
            left_weight: 1.0,
            right_weight: 1.0,
            t_end: 1.92,
            dt: None,
            stride: 10,
        }
    }
}

impl CrossingSetup {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.x_min, self.x_max, self.nx)
    }

    /// Relative width growth of a free packet at `t_end`.
    pub fn spreading(&self) -> f64 {
        let s = self.t_end / (self.width * self.width);
        (1.0 + s * s).sqrt() - 1.0
    }

    fn packet_center(&self, left: bool, t: f64) -> f64 {
        if left {
            -self.center + self.speed * t
        } else {
            self.center - self.speed * t
        }
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if !(self.width > 0.0 && self.center > 0.0 && self.speed > 0.0 && self.t_end > 0.0) {
            return Err(Error::Config("center, width, speed and t_end must be positive".into()));
        }
        if !(self.left_weight >= 0.0 && self.right_weight >= 0.0) || self.left_weight + self.right_weight == 0.0 {
            return Err(Error::Config("packet weights must be non-negative and not both zero".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
        }
        let spread = self.spreading();
        if spread >= MAX_SPREADING {
            return Err(Error::Config(format!(
                "packets spread by {:.2}% over the run (limit {:.0}%)",
                100.0 * spread,
                100.0 * MAX_SPREADING
            )));
        }
        let reach = PADDING_WIDTHS * self.width * (1.0 + spread);
        for (left, w) in [(true, self.left_weight), (false, self.right_weight)] {
            if w == 0.0 {
                continue;
            }
            for t in [0.0, self.t_end] {
                let c = self.packet_center(left, t);
                if c - reach < grid.x_min() || c + reach > grid.x_max() {
                    return Err(Error::PacketOutsideDomain(format!(
                        "packet at {c} with reach {reach} leaves [{}, {}] at t = {t}",
                        grid.x_min(),
                        grid.x_max()
                    )));
                }
            }
        }
        let k = self.speed + PADDING_WIDTHS / self.width;
        if k > 0.8 * grid.k_max() {
            return Err(Error::Config(format!(
                "grid resolves wavenumbers up to {}, packets need {k}",
                grid.k_max()
            )));
        }
        Ok(())
    }

    fn specs(&self) -> [PacketSpec; 2] {
        [
            PacketSpec::gaussian(-self.center, self.width, self.speed).with_weight(self.left_weight),
            PacketSpec::gaussian(self.center, self.width, -self.speed).with_weight(self.right_weight),
        ]
    }

    /// Normalized initial particle wave.
    pub fn initial(&self) -> Result<WaveFunction1D> {
        let specs: Vec<PacketSpec> = self.specs().into_iter().filter(|s| s.weight > 0.0).collect();
        superpose(&self.grid()?, &specs)
    }

    pub fn time_step(&self) -> Result<f64> {
        match self.dt {
            Some(dt) => Ok(dt),
            None => Ok(kinetic_dt(&self.initial()?, 1.0, 0.5)),
        }
    }

    /// First snapshot time at which the separately evolved branches overlap
    /// by more than [`OVERLAP_THRESHOLD`]; `None` if one branch is absent or
    /// they never do.
    pub fn overlap_onset(&self) -> Result<Option<f64>> {
        if self.left_weight == 0.0 || self.right_weight == 0.0 {
            return Ok(None);
        }
        let grid = self.grid()?;
        let [l, r] = self.specs();
        let norm = self.left_weight.powi(2) + self.right_weight.powi(2);
        let branch = |s: &PacketSpec| -> Result<WaveFunction1D> {
            let mut p = build_packet(&grid, &s.with_weight(1.0))?.normalized()?;
            let scale = Complex::new(s.weight / norm.sqrt(), 0.0);
            p = WaveFunction1D::new(grid, p.amplitudes().iter().map(|z| z * scale).collect())?;
            Ok(p)
        };
        let (steps, dt) = step_plan(self.t_end, self.time_step()?)?;
        let mut el = Evolver1D::new(branch(&l)?, None, 0.0, dt)?;
        let mut er = Evolver1D::new(branch(&r)?, None, 0.0, dt)?;
        let overlap = |a: &WaveFunction1D, b: &WaveFunction1D| {
            a.density().iter().zip(b.density()).map(|(x, y)| x.min(y)).sum::<f64>() * grid.dx()
        };
        if overlap(el.state(), er.state()) > OVERLAP_THRESHOLD {
            return Ok(Some(0.0));
        }
        for s in 1..=steps {
            el.step()?;
            er.step()?;
            if (s % self.stride == 0 || s == steps) && overlap(el.state(), er.state()) > OVERLAP_THRESHOLD {
                return Ok(Some(el.time()));
            }
        }
        Ok(None)
    }
}

/// Pointer coordinate: grid, initial wave and dynamics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointerSetup {
    pub q_min: f64,
    pub q_max: f64,
    pub nq: usize,
    pub shape: PointerShape,
    /// Pointer mass; without one the pointer has no kinetic term.
    pub mass: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointerShape {
    /// Gaussian amplitude of width `delta` centered at 0.
    Gaussian { delta: f64 },
    /// Flat on `[0, width]` with raised-cosine edges.
    Rectangular { width: f64, smoothing: f64 },
}

impl Default for PointerSetup {
    fn default() -> Self {
        PointerSetup {
            q_min: -8.0,
            q_max: 18.0,
            nq: 128,
            shape: PointerShape::Gaussian { delta: 1.0 },
            mass: Some(20.0),
        }
    }
}

impl PointerSetup {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.q_min, self.q_max, self.nq)
    }

    pub fn spec(&self) -> PacketSpec {
        match self.shape {
            PointerShape::Gaussian { delta } => PacketSpec::gaussian(0.0, delta, 0.0),
            PointerShape::Rectangular { width, smoothing } => {
                PacketSpec::rectangular(width / 2.0, width, 0.0).with_smoothing(smoothing)
            }
        }
    }

    pub fn initial(&self) -> Result<WaveFunction1D> {
        build_packet(&self.grid()?, &self.spec())?.normalized()
    }

    /// Standard deviation of the initial pointer density.
    pub fn spread(&self) -> f64 {
        match self.shape {
            PointerShape::Gaussian { delta } => delta / 2f64.sqrt(),
            PointerShape::Rectangular { width, .. } => width / 12f64.sqrt(),
        }
    }

    pub fn hamiltonian(&self) -> Hamiltonian2DConfig {
        let mut h = Hamiltonian2DConfig::free();
        if let Some(m) = self.mass {
            h.kinetic_q = true;
            h.pointer_mass = m;
        }
        h
    }

    /// Largest time step keeping the pointer kinetic phase below 0.5.
    pub fn time_step(&self) -> Result<f64> {
        match self.mass {
            Some(m) => Ok(kinetic_dt(&self.initial()?, m, 0.5)),
            None => Ok(f64::INFINITY),
        }
    }
}

/// Outcome of a 2D evolution with tracked paths.
#[derive(Debug)]
pub struct Run2D {
    pub paths: Vec<Result<Trajectory>>,
    pub norm_drift: f64,
    pub initial: WaveFunction2D,
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

/// Evolve `psi` over `[0, t_end]`, integrating paths from `starts` through
/// every stored snapshot. `keep_marginals` stores the pointer marginal at
/// each snapshot.
#[allow(clippy::too_many_arguments)]
pub fn run_2d(
    psi: WaveFunction2D,
    cfg: Hamiltonian2DConfig,
    t_end: f64,
    dt: f64,
    stride: usize,
    starts: &[[f64; 2]],
    opts: Integration,
    keep_marginals: bool,
) -> Result<Run2D> {
    let (steps, dt) = step_plan(t_end, dt)?;
    let initial = psi.clone();
    let mut ev = Evolver2D::new(psi, cfg, 0.0, dt)?;
    let norm0 = ev.state().norm_sqr();
    let field = |ev: &Evolver2D<f64>| Field2D::new(ev.state(), ev.ops_x(), ev.ops_q(), ev.config(), opts.refine);
    let mut tracker = Tracker::new(0.0, starts, opts);
    let mut prev = field(&ev);
    let mut t_prev = 0.0;
    let mut drift = 0.0f64;
    let mut snapshots = Vec::new();
    if keep_marginals {
        snapshots.push((0.0, ev.state().marginal_q()));
    }
    for s in 1..=steps {
        ev.step()?;
        if s % stride.max(1) == 0 || s == steps {
            let next = field(&ev);
            tracker.advance(&prev, &next, t_prev, ev.time(), s == steps);
            prev = next;
            t_prev = ev.time();
            drift = drift.max((ev.state().norm_sqr() / norm0 - 1.0).abs());
            if keep_marginals {
                snapshots.push((ev.time(), ev.state().marginal_q()));
            }
        }
    }
    Ok(Run2D { paths: tracker.finish(), norm_drift: drift, initial, snapshots })
}
