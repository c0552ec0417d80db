use num_complex::Complex;

use super::{AxisOps, Grid1D};
use crate::error::{Error, Result};
use crate::scalar::{Real, SpectralReal};

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn check_finite<T: Real>(amp: &[Complex<T>]) -> Result<()> {
    if amp.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("non-finite amplitude".into()))
    }
}

/// Complex amplitude field on a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction1D<T = f64> {
    grid: Grid1D<T>,
    amp: Vec<Complex<T>>,
}

impl<T: Real> WaveFunction1D<T> {
    pub fn new(grid: Grid1D<T>, amp: Vec<Complex<T>>) -> Result<Self> {
        if amp.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} amplitudes for {} grid points",
                amp.len(),
                grid.len()
            )));
        }
        check_finite(&amp)?;
        Ok(WaveFunction1D { grid, amp })
    }

    pub fn zeros(grid: Grid1D<T>) -> Self {
        WaveFunction1D { amp: vec![czero(); grid.len()], grid }
    }

    pub fn from_fn(grid: Grid1D<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let amp = grid.points().into_iter().map(f).collect();
        Self::new(grid, amp)
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amp
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amp
    }

    pub fn norm_sqr(&self) -> T {
        self.amp.iter().fold(T::zero(), |a, z| a + z.norm_sqr()) * self.grid.dx()
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a zero field".into()));
        }
        let s = T::one() / n.sqrt();
        self.amp.iter_mut().for_each(|z| *z = *z * s);
        Ok(())
    }

    pub fn density(&self) -> Vec<T> {
        self.amp.iter().map(|z| z.norm_sqr()).collect()
    }

    /// <self|other>
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let s = self
            .amp
            .iter()
            .zip(&other.amp)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b);
        s * self.grid.dx()
    }

    pub fn add_scaled(&mut self, other: &Self, c: Complex<T>) {
        for (a, b) in self.amp.iter_mut().zip(&other.amp) {
            *a = *a + *b * c;
        }
    }

    /// Probability mass on grid points inside `[a, b]`.
    pub fn mass_in(&self, a: T, b: T) -> T {
        let dx = self.grid.dx();
        self.grid
            .points()
            .iter()
            .zip(&self.amp)
            .filter(|(&x, _)| x >= a && x <= b)
            .fold(T::zero(), |acc, (_, z)| acc + z.norm_sqr())
            * dx
    }

    pub fn mean_position(&self) -> T {
        let dx = self.grid.dx();
        let (m0, m1) = self
            .grid
            .points()
            .iter()
            .zip(&self.amp)
            .fold((T::zero(), T::zero()), |(m0, m1), (&x, z)| {
                (m0 + z.norm_sqr(), m1 + x * z.norm_sqr())
            });
        (m1 * dx) / (m0 * dx)
    }

    /// Standard deviation of the position density.
    pub fn position_spread(&self) -> T {
        let mean = self.mean_position();
        let (m0, m2) = self
            .grid
            .points()
            .iter()
            .zip(&self.amp)
            .fold((T::zero(), T::zero()), |(m0, m2), (&x, z)| {
                let d = x - mean;
                (m0 + z.norm_sqr(), m2 + d * d * z.norm_sqr())
            });
        (m2 / m0).sqrt()
    }

    /// Largest density within `band` points of either grid edge.
    pub fn edge_density(&self, band: usize) -> T {
        let n = self.amp.len();
        let band = band.min(n / 2);
        self.amp[..band]
            .iter()
            .chain(&self.amp[n - band..])
            .fold(T::zero(), |m, z| m.max(z.norm_sqr()))
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.amp.iter().all(|z| z.im.fabs() <= tol)
    }
}

impl<T: SpectralReal> WaveFunction1D<T> {
    /// Momentum amplitudes in FFT order, normalized so that
    /// `sum |phi_j|^2 dk = sum |psi_i|^2 dx`.
    pub fn to_momentum(&self, ops: &AxisOps<T>) -> Vec<Complex<T>> {
        let mut buf = self.amp.clone();
        ops.forward(&mut buf);
        let s = self.grid.dx() / (T::two() * T::pi()).sqrt();
        buf.iter_mut().for_each(|z| *z = *z * s);
        buf
    }

    pub fn from_momentum(grid: Grid1D<T>, ops: &AxisOps<T>, phi: &[Complex<T>]) -> Result<Self> {
        let mut buf = phi.to_vec();
        ops.inverse(&mut buf);
        let s = (T::two() * T::pi()).sqrt() / grid.dx();
        buf.iter_mut().for_each(|z| *z = *z * s);
        Self::new(grid, buf)
    }

    pub fn derivative(&self, ops: &AxisOps<T>) -> Vec<Complex<T>> {
        ops.derivative(&self.amp)
    }

    /// Density and probability current `Im(psi* d psi / dx)` (hbar = m = 1).
    pub fn density_and_current(&self, ops: &AxisOps<T>) -> (Vec<T>, Vec<T>) {
        let d = self.derivative(ops);
        let rho = self.density();
        let j = self
            .amp
            .iter()
            .zip(&d)
            .map(|(a, da)| (a.conj() * da).im)
            .collect();
        (rho, j)
    }

    pub fn kinetic_energy(&self, ops: &AxisOps<T>) -> T {
        ops.kinetic_energy(&self.amp, T::one())
    }
}

/// Wave on the configuration space of a particle (x) and a pointer (q).
/// Amplitudes are stored row-major with q fastest: `amp[ix * nq + iq]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction2D<T = f64> {
    grid_x: Grid1D<T>,
    grid_q: Grid1D<T>,
    amp: Vec<Complex<T>>,
}

impl<T: Real> WaveFunction2D<T> {
    pub fn new(grid_x: Grid1D<T>, grid_q: Grid1D<T>, amp: Vec<Complex<T>>) -> Result<Self> {
        if amp.len() != grid_x.len() * grid_q.len() {
            return Err(Error::InvalidGrid("amplitude count does not match grids".into()));
        }
        check_finite(&amp)?;
        Ok(WaveFunction2D { grid_x, grid_q, amp })
    }

    pub fn product(particle: &WaveFunction1D<T>, pointer: &WaveFunction1D<T>) -> Self {
        let mut amp = Vec::with_capacity(particle.amp.len() * pointer.amp.len());
        for a in &particle.amp {
            for b in &pointer.amp {
                amp.push(*a * *b);
            }
        }
        WaveFunction2D {
            grid_x: particle.grid,
            grid_q: pointer.grid,
            amp,
        }
    }

    pub fn grid_x(&self) -> &Grid1D<T> {
        &self.grid_x
    }

    pub fn grid_q(&self) -> &Grid1D<T> {
        &self.grid_q
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amp
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amp
    }

    pub fn nq(&self) -> usize {
        self.grid_q.len()
    }

    pub fn at(&self, ix: usize, iq: usize) -> Complex<T> {
        self.amp[ix * self.grid_q.len() + iq]
    }

    pub fn cell(&self) -> T {
        self.grid_x.dx() * self.grid_q.dx()
    }

    pub fn norm_sqr(&self) -> T {
        self.amp.iter().fold(T::zero(), |a, z| a + z.norm_sqr()) * self.cell()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > T::zero()) {
            return Err(Error::Domain("cannot normalize a zero field".into()));
        }
        let s = T::one() / n.sqrt();
        self.amp.iter_mut().for_each(|z| *z = *z * s);
        Ok(())
    }

    pub fn density(&self) -> Vec<T> {
        self.amp.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amp
            .iter()
            .zip(&other.amp)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b)
            * self.cell()
    }

    /// Particle marginal density (integrated over q).
    pub fn marginal_x(&self) -> Vec<T> {
        let nq = self.nq();
        let dq = self.grid_q.dx();
        self.amp
            .chunks(nq)
            .map(|row| row.iter().fold(T::zero(), |a, z| a + z.norm_sqr()) * dq)
            .collect()
    }

    /// Pointer marginal density (integrated over x).
    pub fn marginal_q(&self) -> Vec<T> {
        let nq = self.nq();
        let dx = self.grid_x.dx();
        let mut out = vec![T::zero(); nq];
        for row in self.amp.chunks(nq) {
            for (o, z) in out.iter_mut().zip(row) {
                *o += z.norm_sqr();
            }
        }
        out.iter_mut().for_each(|o| *o *= dx);
        out
    }

    pub fn mean_q(&self) -> T {
        let m = self.marginal_q();
        let (m0, m1) = m
            .iter()
            .enumerate()
            .fold((T::zero(), T::zero()), |(a, b), (i, &p)| {
                (a + p, b + p * self.grid_q.x(i))
            });
        m1 / m0
    }

    /// Largest density within `band` points of any edge of the rectangle.
    pub fn edge_density(&self, band_x: usize, band_q: usize) -> T {
        let nx = self.grid_x.len();
        let nq = self.nq();
        let mut m = T::zero();
        for ix in 0..nx {
            let edge_x = ix < band_x || ix >= nx - band_x;
            for iq in 0..nq {
                if edge_x || iq < band_q || iq >= nq - band_q {
                    m = m.max(self.amp[ix * nq + iq].norm_sqr());
                }
            }
        }
        m
    }

    /// Pointer wave conditional on the particle sitting at grid index `ix`.
    pub fn conditional_pointer(&self, ix: usize) -> WaveFunction1D<T> {
        let nq = self.nq();
        WaveFunction1D {
            grid: self.grid_q,
            amp: self.amp[ix * nq..(ix + 1) * nq].to_vec(),
        }
    }
}

/// Two-component (spin-1/2) wave on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorWaveFunction1D<T = f64> {
    grid: Grid1D<T>,
    up: Vec<Complex<T>>,
    down: Vec<Complex<T>>,
}

impl<T: Real> SpinorWaveFunction1D<T> {
    pub fn new(grid: Grid1D<T>, up: Vec<Complex<T>>, down: Vec<Complex<T>>) -> Result<Self> {
        if up.len() != grid.len() || down.len() != grid.len() {
            return Err(Error::InvalidGrid("spinor components must match the grid".into()));
        }
        check_finite(&up)?;
        check_finite(&down)?;
        Ok(SpinorWaveFunction1D { grid, up, down })
    }

    /// `spatial` times the spin state `(a, b)`.
    pub fn product(spatial: &WaveFunction1D<T>, a: Complex<T>, b: Complex<T>) -> Self {
        SpinorWaveFunction1D {
            grid: spatial.grid,
            up: spatial.amp.iter().map(|z| *z * a).collect(),
            down: spatial.amp.iter().map(|z| *z * b).collect(),
        }
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn up(&self) -> &[Complex<T>] {
        &self.up
    }

    pub fn down(&self) -> &[Complex<T>] {
        &self.down
    }

    pub(crate) fn components_mut(&mut self) -> (&mut Vec<Complex<T>>, &mut Vec<Complex<T>>) {
        (&mut self.up, &mut self.down)
    }

    pub fn density(&self) -> Vec<T> {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect()
    }

    pub fn norm_sqr(&self) -> T {
        self.density().into_iter().fold(T::zero(), |a, b| a + b) * self.grid.dx()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > T::zero()) {
            return Err(Error::Domain("cannot normalize a zero spinor".into()));
        }
        let s = T::one() / n.sqrt();
        self.up.iter_mut().chain(self.down.iter_mut()).for_each(|z| *z = *z * s);
        Ok(())
    }

    pub fn edge_density(&self, band: usize) -> T {
        let rho = self.density();
        let n = rho.len();
        rho[..band].iter().chain(&rho[n - band..]).fold(T::zero(), |m, &r| m.max(r))
    }
}

impl<T: SpectralReal> SpinorWaveFunction1D<T> {
    /// Total density and summed current over both components.
    pub fn density_and_current(&self, ops: &AxisOps<T>) -> (Vec<T>, Vec<T>) {
        let du = ops.derivative(&self.up);
        let dd = ops.derivative(&self.down);
        let rho = self.density();
        let j = (0..self.up.len())
            .map(|i| (self.up[i].conj() * du[i]).im + (self.down[i].conj() * dd[i]).im)
            .collect();
        (rho, j)
    }
}
