//! Protective measurement of `<Π_V>` on energy eigenstates.
//!
//! The pointer couples through `H = g(t) Π_V P` with a slowly switched
//! `g`, so an eigenstate that stays put under the coupling shifts the
//! pointer wave by `<Π_V>` while its Bohmian particle barely moves.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::{Field2D, Integration, Tracker, Trajectory};
use crate::propagate::{CouplingKind, CouplingSpec, Evolver2D, GProfile, Hamiltonian2DConfig};
use crate::qfield::{
    build_packet, EigenPotential, EnergyEigenstate, Grid1D, PacketSpec, Potential, WaveFunction2D,
};
use crate::scalar::{Real, SpectralReal};

/// Composite Simpson rule with `n` (even) intervals.
fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let h = (b - a) / T::count(n);
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::two() };
        s += w * f(a + h * T::count(i));
    }
    s * h / T::lit(3.0)
}

/// `∫_V |ψ|^2`, closed form in the box and quadrature otherwise.
pub fn expected_projection<T: Real>(state: &EnergyEigenstate<T>, region: (T, T)) -> Result<T> {
    let (a, b) = region;
    if !(a < b) {
        return Err(Error::Domain(format!("empty region [{a}, {b}]")));
    }
    match state.potential {
        EigenPotential::Box { length } => {
            if a < T::zero() || b > length {
                return Err(Error::Domain(format!("region [{a}, {b}] leaves the box [0, {length}]")));
            }
            let k2 = T::two() * T::count(state.n as usize) * T::pi() / length;
            Ok((b - a) / length - ((k2 * b).sin() - (k2 * a).sin()) / (k2 * length))
        }
        EigenPotential::Harmonic { .. } => {
            let (lo, hi) = state.support();
            let (a, b) = (a.max(lo), b.min(hi));
            if !(a < b) {
                return Ok(T::zero());
            }
            Ok(simpson(|x| state.value(x) * state.value(x), a, b, 8192))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtectiveConfig<T = f64> {
    pub state: EnergyEigenstate<T>,
    pub region: (T, T),
    pub duration: T,
    pub ramp: T,
    pub pointer_delta: T,
}

impl<T: Real> ProtectiveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > T::zero()) {
            return Err(Error::Config(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.ramp >= T::lit(0.05) * self.duration) || !(T::two() * self.ramp <= self.duration) {
            return Err(Error::Config(format!(
                "ramp {} must lie in [0.05 T, T/2] for T = {}",
                self.ramp, self.duration
            )));
        }
        if !(self.pointer_delta > T::zero()) {
            return Err(Error::Config("pointer spread must be positive".into()));
        }
        Ok(())
    }
}

/// Grid and stepping of the adiabatic simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtectiveNumerics<T = f64> {
    pub nx: usize,
    pub nq: usize,
    pub dt: T,
    /// Bohmian start `(x0, q0)` to follow through the run.
    pub track: Option<(T, T)>,
}

impl<T: Real> Default for ProtectiveNumerics<T> {
    fn default() -> Self {
        ProtectiveNumerics { nx: 128, nq: 128, dt: T::lit(0.01), track: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticShift<T = f64> {
    pub duration: T,
    pub expected: T,
    /// Displacement of the pointer marginal's mean.
    pub measured: T,
    pub relative_error: T,
    /// Probability of still finding the particle in the initial eigenstate.
    pub overlap: T,
    pub norm_drift: T,
    #[serde(skip)]
    pub trajectory: Option<Trajectory<T>>,
}

fn particle_grid<T: Real>(state: &EnergyEigenstate<T>, nx: usize) -> Result<(Grid1D<T>, Potential<T>)> {
    match state.potential {
        EigenPotential::Box { length } => {
            // walls at indices 0 and nx - 8
            let dx = length / T::count(nx - 8);
            let grid = Grid1D::new(T::zero(), dx * T::count(nx), nx)?;
            Ok((grid, Potential::Box { lo: T::zero(), hi: length }))
        }
        EigenPotential::Harmonic { omega } => {
            let (lo, hi) = state.support();
            let grid = Grid1D::new(lo, hi, nx)?;
            Ok((grid, Potential::harmonic(&grid, omega)))
        }
    }
}

/// Simulated pointer shift of a protective measurement of `Π_V`.
pub fn adiabatic_pointer_shift<T: SpectralReal>(
    cfg: &ProtectiveConfig<T>,
    num: &ProtectiveNumerics<T>,
) -> Result<AdiabaticShift<T>> {
    cfg.validate()?;
    let expected = expected_projection(&cfg.state, cfg.region)?;
    let (gx, potential) = particle_grid(&cfg.state, num.nx)?;
    let half_q = T::lit(6.0) * cfg.pointer_delta + T::two();
    let gq = Grid1D::new(-half_q, half_q, num.nq)?;
    let psi0 = cfg.state.field(&gx)?;
    let pointer = build_packet(&gq, &PacketSpec::gaussian(T::zero(), cfg.pointer_delta, T::zero()))?.normalized()?;
    let mut psi = WaveFunction2D::product(&psi0, &pointer);
    psi.normalize()?;
    let coupling = CouplingSpec::new(
        CouplingKind::PositionShift,
        cfg.region,
        GProfile::smooth_adiabatic(cfg.duration, cfg.ramp)?,
        T::one(),
    );
    let ham = Hamiltonian2DConfig {
        kinetic_x: true,
        kinetic_q: false,
        pointer_mass: T::one(),
        potential: Some(potential),
        coupling: Some(coupling),
    };
    let q0 = psi.mean_q();
    let n0 = psi.norm_sqr();
    let mut ev = Evolver2D::new(psi, ham, T::zero(), num.dt)?;
    let steps = (cfg.duration / num.dt).to_f64().round().max(1.0) as usize;
    let mut tracker = num.track.map(|(x, q)| Tracker::new(T::zero(), &[[x, q]], Integration::default()));
    let field = |ev: &Evolver2D<T>| Field2D::new(ev.state(), ev.ops_x(), ev.ops_q(), ev.config(), 1);
    let stride = 10;
    let mut prev = tracker.as_ref().map(|_| (field(&ev), ev.time()));
    for s in 1..=steps {
        ev.step()?;
        if let (Some(tr), Some((fa, ta))) = (tracker.as_mut(), prev.as_ref()) {
            if s % stride == 0 || s == steps {
                let fb = field(&ev);
                tr.advance(fa, &fb, *ta, ev.time(), s == steps);
                prev = Some((fb, ev.time()));
            }
        }
    }
    let fin = ev.state();
    let measured = fin.mean_q() - q0;
    // project out the particle: φ(q) = ∫ ψ0(x) Ψ(x, q) dx
    let nq = fin.nq();
    let dx = gx.dx();
    let mut phi = vec![Complex::new(T::zero(), T::zero()); nq];
    for (ix, a0) in psi0.amplitudes().iter().enumerate() {
        for (iq, p) in phi.iter_mut().enumerate() {
            *p = *p + a0.conj() * fin.at(ix, iq) * dx;
        }
    }
    let overlap = phi.iter().fold(T::zero(), |s, z| s + z.norm_sqr()) * gq.dx();
    if overlap < T::lit(0.99) {
        return Err(Error::NotAdiabatic { overlap: overlap.to_f64() });
    }
    let trajectory = match tracker {
        Some(tr) => Some(tr.finish().pop().expect("one tracked particle")?),
        None => None,
    };
    Ok(AdiabaticShift {
        duration: cfg.duration,
        expected,
        measured,
        relative_error: ((measured - expected) / expected).fabs(),
        overlap,
        norm_drift: (fin.norm_sqr() - n0).fabs(),
        trajectory,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub edges: Vec<f64>,
    pub averages: Vec<f64>,
    pub reference: Vec<f64>,
    /// `∫ |histogram density - |ψ|^2| dx`.
    pub l1_error: f64,
}

impl ReconstructionReport {
    pub fn histogram_density(&self) -> Vec<f64> {
        self.averages.iter().zip(self.edges.windows(2)).map(|(a, e)| a / (e[1] - e[0])).collect()
    }
}

/// Density histogram from `M` projection averages over the state's support.
pub fn reconstruct_density<T: Real>(state: &EnergyEigenstate<T>, bins: usize) -> Result<ReconstructionReport> {
    if bins < 2 {
        return Err(Error::Config("need at least two bins".into()));
    }
    let (lo, hi) = state.support();
    let h = (hi - lo) / T::count(bins);
    let edges: Vec<T> = (0..=bins).map(|k| lo + h * T::count(k)).collect();
    let mut averages = Vec::with_capacity(bins);
    let mut l1 = T::zero();
    for e in edges.windows(2) {
        let (a, b) = (e[0], if e[1] > hi { hi } else { e[1] });
        let avg = expected_projection(state, (a, b))?;
        averages.push(avg.to_f64());
        let dens = avg / (b - a);
        l1 += simpson(|x| (dens - state.value(x) * state.value(x)).fabs(), a, b, 512);
    }
    Ok(ReconstructionReport {
        edges: edges.iter().map(|e| e.to_f64()).collect(),
        reference: averages.clone(),
        averages,
        l1_error: l1.to_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    /// Largest Bohmian speed where the density exceeds the floor.
    pub max_speed: f64,
    pub x0: f64,
    pub bins: usize,
    /// Bins the particle occupies during the run.
    pub occupied: Vec<usize>,
    /// Averages of the bins the particle never enters.
    pub unvisited_averages: Vec<f64>,
    /// Some never-visited bin still has a nonzero average.
    pub empty_volume_signal: bool,
}

/// Bohmian speeds of an evolving eigenstate and the bins its particle visits.
pub fn eigenstate_stationarity<T: SpectralReal>(
    state: &EnergyEigenstate<T>,
    duration: T,
    x0: T,
    bins: usize,
) -> Result<StationarityReport> {
    let (gx, potential) = particle_grid(state, 256)?;
    let psi = state.field(&gx)?;
    if !psi.is_real(T::zero()) {
        return Err(Error::Config("eigenstate must be real".into()));
    }
    let mut ev = crate::propagate::Evolver1D::new(psi, Some(&potential), T::zero(), T::lit(0.01))?;
    let steps = (duration / T::lit(0.01)).to_f64().round() as usize;
    let mut max_speed = T::zero();
    let mut check = |ev: &crate::propagate::Evolver1D<T>| {
        let (rho, j) = ev.state().density_and_current(ev.ops());
        let peak = rho.iter().fold(T::zero(), |m, &r| m.max(r));
        for (r, j) in rho.iter().zip(&j) {
            if *r > peak * T::lit(crate::guidance::RHO_FLOOR) {
                max_speed = max_speed.max((*j / *r).fabs());
            }
        }
    };
    check(&ev);
    for s in 1..=steps {
        ev.step()?;
        if s % 20 == 0 || s == steps {
            check(&ev);
        }
    }
    let rec = reconstruct_density(state, bins)?;
    let x = x0.to_f64();
    // with zero velocity the particle stays at x0
    let occupied: Vec<usize> = rec
        .edges
        .windows(2)
        .enumerate()
        .filter(|(_, e)| x >= e[0] && x <= e[1])
        .map(|(k, _)| k)
        .collect();
    let unvisited_averages: Vec<f64> =
        (0..bins).filter(|k| !occupied.contains(k)).map(|k| rec.averages[k]).collect();
    Ok(StationarityReport {
        max_speed: max_speed.to_f64(),
        x0: x,
        bins,
        empty_volume_signal: unvisited_averages.iter().any(|&a| a > 0.0),
        occupied,
        unvisited_averages,
    })
}

#[cfg(test)]
mod tests;
