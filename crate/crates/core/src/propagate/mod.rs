//! Split-step (Strang) time evolution for one particle, a spinor, and a
//! particle coupled to a pointer.

mod coupling;
pub mod series;

pub use coupling::{CouplingKind, CouplingSpec, GProfile};
pub use series::{Series1D, SeriesSpinor};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qfield::{AxisOps, Boundary, Potential, SpinorWaveFunction1D, WaveFunction1D, WaveFunction2D};
use crate::scalar::SpectralReal;

/// Amplitudes above this density within the edge band of a periodic axis
/// mean the domain is too small for the run.
pub const EDGE_DENSITY_LIMIT: f64 = 1e-8;

fn edge_band(n: usize) -> usize {
    (n / 32).max(2)
}

fn phase<T: SpectralReal>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), -angle.sin())
}

fn check_edges<T: SpectralReal>(edge: T, time: T) -> Result<()> {
    if edge > T::lit(EDGE_DENSITY_LIMIT) {
        return Err(Error::DomainTooSmall { time: time.to_f64(), density: edge.to_f64() });
    }
    Ok(())
}

/// Number of steps of at most `dt` covering `[0, span]`, and the step used.
pub fn step_plan<T: SpectralReal>(span: T, dt: T) -> Result<(usize, T)> {
    if !(dt > T::zero()) || !(span >= T::zero()) || !span.is_finite() {
        return Err(Error::Config(format!("need dt > 0 and a finite span, got dt={dt}, span={span}")));
    }
    let steps = (span / dt).to_f64().ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok((0, dt));
    }
    Ok((steps, span / T::count(steps)))
}

/// Step keeping the kinetic phase below `max_phase` for every momentum that
/// carries appreciable weight (spectral density above 1e-10 of its peak).
pub fn kinetic_dt<T: SpectralReal>(psi: &WaveFunction1D<T>, mass: T, max_phase: T) -> T {
    let ops = AxisOps::periodic(*psi.grid());
    let phi = psi.to_momentum(&ops);
    let peak = phi.iter().fold(T::zero(), |m, z| m.max(z.norm_sqr()));
    let cut = peak * T::lit(1e-10);
    let k = phi
        .iter()
        .zip(ops.wavenumbers())
        .filter(|(z, _)| z.norm_sqr() > cut)
        .fold(T::zero(), |m, (_, &k)| m.max(k.fabs()));
    // headroom for the spread of the distribution during the run
    let k = k * T::lit(1.25) + T::one();
    max_phase * T::two() * mass / (k * k)
}

/// Strang stepper for `p^2/2 + V(x)`.
#[derive(Debug)]
pub struct Evolver1D<T: SpectralReal> {
    psi: WaveFunction1D<T>,
    ops: AxisOps<T>,
    half_potential: Option<Vec<Complex<T>>>,
    dt: T,
    time: T,
}

impl<T: SpectralReal> Evolver1D<T> {
    pub fn new(psi: WaveFunction1D<T>, potential: Option<&Potential<T>>, t0: T, dt: T) -> Result<Self> {
        let grid = *psi.grid();
        let boundary = potential.map_or(Boundary::Periodic, |p| p.boundary());
        let ops = AxisOps::new(grid, boundary)?;
        let half_potential = match potential.and_then(|p| p.field()) {
            Some(v) if v.len() != grid.len() => {
                return Err(Error::InvalidGrid("potential does not match the grid".into()))
            }
            Some(v) => Some(v.iter().map(|&v| phase(v * dt / T::two())).collect()),
            None => None,
        };
        if !(dt > T::zero()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        Ok(Evolver1D { psi, ops, half_potential, dt, time: t0 })
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn state(&self) -> &WaveFunction1D<T> {
        &self.psi
    }

    pub fn into_state(self) -> WaveFunction1D<T> {
        self.psi
    }

    pub fn ops(&self) -> &AxisOps<T> {
        &self.ops
    }

    pub fn step(&mut self) -> Result<()> {
        let mut amp = std::mem::replace(&mut self.psi, WaveFunction1D::zeros(*self.ops.grid())).into_amplitudes();
        if let Some(h) = &self.half_potential {
            amp.iter_mut().zip(h).for_each(|(z, p)| *z = *z * p);
        }
        self.ops.propagate_kinetic(&mut amp, self.dt, T::one());
        if let Some(h) = &self.half_potential {
            amp.iter_mut().zip(h).for_each(|(z, p)| *z = *z * p);
        }
        self.psi = WaveFunction1D::new(*self.ops.grid(), amp)?;
        self.time += self.dt;
        if self.ops.is_periodic() {
            check_edges(self.psi.edge_density(edge_band(self.ops.grid().len())), self.time)?;
        }
        Ok(())
    }

    /// Total energy `<p^2/2> + <V>`.
    pub fn energy(&self, potential: Option<&Potential<T>>) -> T {
        let kin = self.ops.kinetic_energy(self.psi.amplitudes(), T::one());
        let pot = match potential.and_then(|p| p.field()) {
            Some(v) => {
                self.psi.density().iter().zip(v).fold(T::zero(), |a, (&r, &v)| a + r * v) * self.psi.grid().dx()
            }
            None => T::zero(),
        };
        (kin + pot) / self.psi.norm_sqr()
    }
}

/// Evolve `psi` for a duration `t` with steps no longer than `dt`.
pub fn evolve_1d<T: SpectralReal>(
    psi: &WaveFunction1D<T>,
    potential: Option<&Potential<T>>,
    t: T,
    dt: T,
) -> Result<WaveFunction1D<T>> {
    let (steps, dt) = step_plan(t, dt)?;
    let mut ev = Evolver1D::new(psi.clone(), potential, T::zero(), dt)?;
    for _ in 0..steps {
        ev.step()?;
    }
    Ok(ev.into_state())
}

/// Evolve over `[t0, t1]` keeping a snapshot every `stride` steps (the
/// first and last states are always kept).
pub fn evolve_1d_series<T: SpectralReal>(
    psi: &WaveFunction1D<T>,
    potential: Option<&Potential<T>>,
    t0: T,
    t1: T,
    dt: T,
    stride: usize,
) -> Result<Series1D<T>> {
    let (steps, dt) = step_plan(t1 - t0, dt)?;
    let stride = stride.max(1);
    let mut ev = Evolver1D::new(psi.clone(), potential, t0, dt)?;
    let mut series = Series1D::new(ev.ops.grid().to_owned(), potential.map_or(Boundary::Periodic, |p| p.boundary()));
    series.push(t0, psi.clone());
    for s in 1..=steps {
        ev.step()?;
        if s % stride == 0 || s == steps {
            series.push(ev.time(), ev.state().clone());
        }
    }
    Ok(series)
}

/// Opposite momentum kicks on the two spin components: `H = p^2/2 - g(t) F x sigma_z`,
/// so the upper component gains momentum `F` (the total impulse, whose sign
/// is that of the field gradient).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinKick<T = f64> {
    pub profile: GProfile<T>,
    pub strength: T,
}

/// Strang stepper for a spinor under [`SpinKick`].
#[derive(Debug)]
pub struct EvolverSpinor<T: SpectralReal> {
    psi: SpinorWaveFunction1D<T>,
    ops: AxisOps<T>,
    kick: SpinKick<T>,
    dt: T,
    time: T,
}

impl<T: SpectralReal> EvolverSpinor<T> {
    pub fn new(psi: SpinorWaveFunction1D<T>, kick: SpinKick<T>, t0: T, dt: T) -> Result<Self> {
        kick.profile.validate()?;
        if !(dt > T::zero()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        let ops = AxisOps::periodic(*psi.grid());
        Ok(EvolverSpinor { psi, ops, kick, dt, time: t0 })
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn state(&self) -> &SpinorWaveFunction1D<T> {
        &self.psi
    }

    pub fn ops(&self) -> &AxisOps<T> {
        &self.ops
    }

    // Both components run through this with their own sign, so a component
    // and its mirror under a reversed field see identical arithmetic.
    fn advance_component(&self, amp: &mut [Complex<T>], sign: T, first: T, second: T) {
        let grid = self.ops.grid();
        let kick = |amp: &mut [Complex<T>], impulse: T| {
            if impulse != T::zero() {
                let f = sign * impulse;
                amp.iter_mut().enumerate().for_each(|(i, z)| *z = *z * phase(-(f * grid.x(i))));
            }
        };
        kick(amp, first);
        self.ops.propagate_kinetic(amp, self.dt, T::one());
        kick(amp, second);
    }

    pub fn step(&mut self) -> Result<()> {
        let t0 = self.time;
        let tm = t0 + self.dt / T::two();
        let t1 = t0 + self.dt;
        let first = self.kick.strength * self.kick.profile.integral(t0, tm);
        let second = self.kick.strength * self.kick.profile.integral(tm, t1);
        let (mut up, mut down) = {
            let (u, d) = self.psi.components_mut();
            (std::mem::take(u), std::mem::take(d))
        };
        self.advance_component(&mut up, T::one(), first, second);
        self.advance_component(&mut down, -T::one(), first, second);
        let (u, d) = self.psi.components_mut();
        *u = up;
        *d = down;
        self.time = t1;
        check_edges(self.psi.edge_density(edge_band(self.ops.grid().len())), self.time)
    }
}

pub fn evolve_spinor_series<T: SpectralReal>(
    psi: &SpinorWaveFunction1D<T>,
    kick: SpinKick<T>,
    t0: T,
    t1: T,
    dt: T,
    stride: usize,
) -> Result<SeriesSpinor<T>> {
    let (steps, dt) = step_plan(t1 - t0, dt)?;
    let stride = stride.max(1);
    let mut ev = EvolverSpinor::new(psi.clone(), kick, t0, dt)?;
    let mut series = SeriesSpinor::new(*psi.grid());
    series.push(t0, psi.clone());
    for s in 1..=steps {
        ev.step()?;
        if s % stride == 0 || s == steps {
            series.push(ev.time(), ev.state().clone());
        }
    }
    Ok(series)
}

/// Terms of the particle-pointer Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian2DConfig<T = f64> {
    pub kinetic_x: bool,
    pub kinetic_q: bool,
    /// Mass of the pointer coordinate; the particle mass is 1.
    pub pointer_mass: T,
    pub potential: Option<Potential<T>>,
    pub coupling: Option<CouplingSpec<T>>,
}

impl<T: SpectralReal> Hamiltonian2DConfig<T> {
    pub fn free() -> Self {
        Hamiltonian2DConfig {
            kinetic_x: true,
            kinetic_q: false,
            pointer_mass: T::one(),
            potential: None,
            coupling: None,
        }
    }

    pub fn with_coupling(mut self, c: CouplingSpec<T>) -> Self {
        self.coupling = Some(c);
        self
    }

    pub fn validate(&self, psi: &WaveFunction2D<T>) -> Result<()> {
        if !self.kinetic_x && !self.kinetic_q && self.potential.is_none() && self.coupling.is_none() {
            return Err(Error::Config("Hamiltonian has no active term".into()));
        }
        if self.kinetic_q && !(self.pointer_mass > T::zero()) {
            return Err(Error::Config("pointer mass must be positive".into()));
        }
        if let Some(c) = &self.coupling {
            c.validate(psi.grid_x())?;
        }
        Ok(())
    }
}

/// Strang stepper on the (x, q) plane.
///
/// One step is `D1(dt/2) D2(dt/2) K_x(dt) D2(dt/2) D1(dt/2)` where D1 is
/// diagonal in (x, q) (potential and momentum kick) and D2 is diagonal in
/// (x, p_q) (pointer kinetic term and position shift). Coupling factors use
/// the exact integral of g over each half step, so a pulse delivers exactly
/// its nominal impulse.
#[derive(Debug)]
pub struct Evolver2D<T: SpectralReal> {
    psi: WaveFunction2D<T>,
    cfg: Hamiltonian2DConfig<T>,
    ops_x: AxisOps<T>,
    ops_q: AxisOps<T>,
    indicator: Vec<T>,
    dt: T,
    time: T,
    column: Vec<Complex<T>>,
}

impl<T: SpectralReal> Evolver2D<T> {
    pub fn new(psi: WaveFunction2D<T>, cfg: Hamiltonian2DConfig<T>, t0: T, dt: T) -> Result<Self> {
        cfg.validate(&psi)?;
        if !(dt > T::zero()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        let gx = *psi.grid_x();
        let boundary = cfg.potential.as_ref().map_or(Boundary::Periodic, |p| p.boundary());
        let ops_x = AxisOps::new(gx, boundary)?;
        let ops_q = AxisOps::periodic(*psi.grid_q());
        if let Some(v) = cfg.potential.as_ref().and_then(|p| p.field()) {
            if v.len() != gx.len() {
                return Err(Error::InvalidGrid("potential does not match the x grid".into()));
            }
        }
        let indicator = cfg.coupling.as_ref().map_or_else(|| vec![T::zero(); gx.len()], |c| c.indicator(&gx));
        Ok(Evolver2D {
            column: vec![Complex::new(T::zero(), T::zero()); gx.len()],
            psi,
            cfg,
            ops_x,
            ops_q,
            indicator,
            dt,
            time: t0,
        })
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn state(&self) -> &WaveFunction2D<T> {
        &self.psi
    }

    pub fn into_state(self) -> WaveFunction2D<T> {
        self.psi
    }

    pub fn ops_x(&self) -> &AxisOps<T> {
        &self.ops_x
    }

    pub fn ops_q(&self) -> &AxisOps<T> {
        &self.ops_q
    }

    pub fn config(&self) -> &Hamiltonian2DConfig<T> {
        &self.cfg
    }

    fn impulse(&self, kind: CouplingKind, t0: T, t1: T) -> T {
        match &self.cfg.coupling {
            Some(c) if c.kind == kind => c.impulse(t0, t1),
            _ => T::zero(),
        }
    }

    fn diagonal_xq(&mut self, t0: T, t1: T) {
        let kick = self.impulse(CouplingKind::MomentumKick, t0, t1);
        let field = self.cfg.potential.as_ref().and_then(|p| p.field());
        if field.is_none() && kick == T::zero() {
            return;
        }
        let tau = t1 - t0;
        let nq = self.psi.nq();
        let gq = *self.psi.grid_q();
        let amp = self.psi.amplitudes_mut();
        for (ix, row) in amp.chunks_mut(nq).enumerate() {
            let v = field.map_or(T::zero(), |f| f[ix] * tau);
            let k = kick * self.indicator[ix];
            if v == T::zero() && k == T::zero() {
                continue;
            }
            for (iq, z) in row.iter_mut().enumerate() {
                *z = *z * phase(v + k * gq.x(iq));
            }
        }
    }

    fn diagonal_xp(&mut self, t0: T, t1: T) {
        let shift = self.impulse(CouplingKind::PositionShift, t0, t1);
        let kinetic = self.cfg.kinetic_q;
        if !kinetic && shift == T::zero() {
            return;
        }
        let tau = t1 - t0;
        let mass = self.cfg.pointer_mass;
        let nq = self.psi.nq();
        let ops_q = &self.ops_q;
        let p = ops_q.wavenumbers();
        let indicator = &self.indicator;
        let amp = self.psi.amplitudes_mut();
        for (ix, row) in amp.chunks_mut(nq).enumerate() {
            let s = shift * indicator[ix];
            if !kinetic && s == T::zero() {
                continue;
            }
            ops_q.forward(row);
            for (z, &pj) in row.iter_mut().zip(p) {
                let kin = if kinetic { pj * pj * tau / (T::two() * mass) } else { T::zero() };
                *z = *z * phase(kin + s * pj);
            }
            ops_q.inverse(row);
        }
    }

    fn kinetic_x(&mut self) {
        if !self.cfg.kinetic_x {
            return;
        }
        let nq = self.psi.nq();
        let nx = self.psi.grid_x().len();
        let dt = self.dt;
        let mut col = std::mem::take(&mut self.column);
        let amp = self.psi.amplitudes_mut();
        for iq in 0..nq {
            for ix in 0..nx {
                col[ix] = amp[ix * nq + iq];
            }
            self.ops_x.propagate_kinetic(&mut col, dt, T::one());
            for ix in 0..nx {
                amp[ix * nq + iq] = col[ix];
            }
        }
        self.column = col;
    }

    pub fn step(&mut self) -> Result<()> {
        let t0 = self.time;
        let tm = t0 + self.dt / T::two();
        let t1 = t0 + self.dt;
        self.diagonal_xq(t0, tm);
        self.diagonal_xp(t0, tm);
        self.kinetic_x();
        self.diagonal_xp(tm, t1);
        self.diagonal_xq(tm, t1);
        self.time = t1;
        let band_x = if self.ops_x.is_periodic() { edge_band(self.psi.grid_x().len()) } else { 0 };
        let band_q = edge_band(self.psi.nq());
        check_edges(self.psi.edge_density(band_x, band_q), self.time)
    }
}

/// Evolve over `[t0, t1]`, calling `observe` with the initial state, every
/// `stride`-th step and the final state.
pub fn evolve_2d<T: SpectralReal>(
    psi: &WaveFunction2D<T>,
    cfg: &Hamiltonian2DConfig<T>,
    t0: T,
    t1: T,
    dt: T,
    stride: usize,
    mut observe: impl FnMut(T, &WaveFunction2D<T>) -> Result<()>,
) -> Result<WaveFunction2D<T>> {
    let (steps, dt) = step_plan(t1 - t0, dt)?;
    let stride = stride.max(1);
    let mut ev = Evolver2D::new(psi.clone(), cfg.clone(), t0, dt)?;
    observe(t0, ev.state())?;
    for s in 1..=steps {
        ev.step()?;
        if s % stride == 0 || s == steps {
            observe(ev.time(), ev.state())?;
        }
    }
    Ok(ev.into_state())
}
