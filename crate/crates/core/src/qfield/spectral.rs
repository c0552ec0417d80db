use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::Grid1D;
use crate::error::{Error, Result};
use crate::scalar::SpectralReal;

/// Boundary condition along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary<T> {
    Periodic,
    /// Infinite walls at `lo` and `hi`; both must coincide with grid points.
    Box { lo: T, hi: T },
}

enum Kind<T: SpectralReal> {
    Periodic {
        fwd: Arc<dyn Fft<T>>,
        inv: Arc<dyn Fft<T>>,
        k: Vec<T>,
    },
    Dirichlet {
        lo: usize,
        m: usize,
        fwd: Arc<dyn Fft<T>>,
        inv: Arc<dyn Fft<T>>,
        modes: Vec<T>,
    },
}

/// Kinetic propagation, differentiation and transforms along one axis.
///
/// Periodic axes use the FFT. Box axes expand the interior samples in the
/// sine basis (DST-I, computed through an FFT of the odd extension), in which
/// both the kinetic operator and box eigenstates are exactly diagonal.
pub struct AxisOps<T: SpectralReal> {
    grid: Grid1D<T>,
    kind: Kind<T>,
}

impl<T: SpectralReal> fmt::Debug for AxisOps<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Periodic { .. } => "periodic".to_string(),
            Kind::Dirichlet { lo, m, .. } => format!("box(lo={lo}, interior={m})"),
        };
        f.debug_struct("AxisOps")
            .field("grid", &self.grid)
            .field("kind", &kind)
            .finish()
    }
}

impl<T: SpectralReal> AxisOps<T> {
    pub fn periodic(grid: Grid1D<T>) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.len();
        AxisOps {
            grid,
            kind: Kind::Periodic {
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
                k: grid.wavenumbers(),
            },
        }
    }

    pub fn new(grid: Grid1D<T>, boundary: Boundary<T>) -> Result<Self> {
        match boundary {
            Boundary::Periodic => Ok(Self::periodic(grid)),
            Boundary::Box { lo, hi } => {
                let (Some(ilo), Some(ihi)) = (grid.exact_index(lo), grid.exact_index(hi)) else {
                    return Err(Error::InvalidGrid(format!(
                        "box walls [{lo}, {hi}] must coincide with grid points"
                    )));
                };
                if ihi < ilo + 3 {
                    return Err(Error::InvalidGrid("box must contain at least two interior points".into()));
                }
                let m = ihi - ilo - 1;
                let mut planner = FftPlanner::new();
                let len = T::count(m + 1) * grid.dx();
                let modes = (1..=m)
                    .map(|k| T::count(k) * T::pi() / len)
                    .collect();
                Ok(AxisOps {
                    grid,
                    kind: Kind::Dirichlet {
                        lo: ilo,
                        m,
                        fwd: planner.plan_fft_forward(2 * (m + 1)),
                        inv: planner.plan_fft_inverse(2 * (m + 1)),
                        modes,
                    },
                })
            }
        }
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, Kind::Periodic { .. })
    }

    /// Largest wavenumber of the basis.
    pub fn k_max(&self) -> T {
        match &self.kind {
            Kind::Periodic { .. } => self.grid.k_max(),
            Kind::Dirichlet { modes, .. } => *modes.last().unwrap(),
        }
    }

    /// Grid indices where the wave may be nonzero.
    pub fn support(&self) -> std::ops::Range<usize> {
        match &self.kind {
            Kind::Periodic { .. } => 0..self.grid.len(),
            Kind::Dirichlet { lo, m, .. } => lo + 1..lo + 1 + m,
        }
    }

    /// Unnormalized forward FFT in place (periodic axes only).
    pub fn forward(&self, line: &mut [Complex<T>]) {
        match &self.kind {
            Kind::Periodic { fwd, .. } => fwd.process(line),
            Kind::Dirichlet { .. } => panic!("forward transform requested on a box axis"),
        }
    }

    /// Normalized inverse FFT in place (periodic axes only).
    pub fn inverse(&self, line: &mut [Complex<T>]) {
        match &self.kind {
            Kind::Periodic { inv, .. } => {
                inv.process(line);
                let s = T::one() / T::count(line.len());
                line.iter_mut().for_each(|z| *z = *z * s);
            }
            Kind::Dirichlet { .. } => panic!("inverse transform requested on a box axis"),
        }
    }

    /// Wavenumbers in FFT order (periodic axes only).
    pub fn wavenumbers(&self) -> &[T] {
        match &self.kind {
            Kind::Periodic { k, .. } => k,
            Kind::Dirichlet { modes, .. } => modes,
        }
    }

    fn dst(fwd: &Arc<dyn Fft<T>>, interior: &[Complex<T>]) -> Vec<Complex<T>> {
        let m = interior.len();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); 2 * (m + 1)];
        for (j, &f) in interior.iter().enumerate() {
            buf[j + 1] = f;
            buf[2 * (m + 1) - (j + 1)] = -f;
        }
        fwd.process(&mut buf);
        // G_k = -2i b_k
        let half_i = Complex::new(T::zero(), T::half());
        (1..=m).map(|k| buf[k] * half_i).collect()
    }

    fn idst(fwd: &Arc<dyn Fft<T>>, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        // DST-I is its own inverse up to 2 / (m + 1).
        let m = coeffs.len();
        let s = T::two() / T::count(m + 1);
        Self::dst(fwd, coeffs).into_iter().map(|z| z * s).collect()
    }

    /// Apply exp(-i k^2 dt / 2 mass) to one line along this axis.
    pub fn propagate_kinetic(&self, line: &mut [Complex<T>], dt: T, mass: T) {
        let rate = |k: T| k * k * dt / (T::two() * mass);
        match &self.kind {
            Kind::Periodic { fwd, inv, k } => {
                fwd.process(line);
                let s = T::one() / T::count(line.len());
                for (z, &kj) in line.iter_mut().zip(k) {
                    let ph = rate(kj);
                    *z = *z * Complex::new(ph.cos(), -ph.sin()) * s;
                }
                inv.process(line);
            }
            Kind::Dirichlet { lo, m, fwd, modes, .. } => {
                let interior = &line[lo + 1..lo + 1 + m];
                let mut b = Self::dst(fwd, interior);
                for (z, &kj) in b.iter_mut().zip(modes) {
                    let ph = rate(kj);
                    *z = *z * Complex::new(ph.cos(), -ph.sin());
                }
                let f = Self::idst(fwd, &b);
                line.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
                line[lo + 1..lo + 1 + m].copy_from_slice(&f);
            }
        }
    }

    /// Spectral first derivative. The Nyquist mode is dropped on periodic
    /// axes; on box axes the derivative comes from the cosine series of the
    /// sine expansion and vanishes outside the walls.
    pub fn derivative(&self, line: &[Complex<T>]) -> Vec<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        match &self.kind {
            Kind::Periodic { fwd, inv, k } => {
                let mut buf = line.to_vec();
                fwd.process(&mut buf);
                let n = buf.len();
                let s = T::one() / T::count(n);
                for (j, (z, &kj)) in buf.iter_mut().zip(k).enumerate() {
                    *z = if j == n / 2 {
                        zero
                    } else {
                        *z * Complex::new(T::zero(), kj * s)
                    };
                }
                inv.process(&mut buf);
                buf
            }
            Kind::Dirichlet { lo, m, fwd, inv, modes } => {
                let b = Self::dst(fwd, &line[lo + 1..lo + 1 + m]);
                let len2 = 2 * (m + 1);
                let scale = T::one() / T::count(m + 1);
                let mut buf = vec![zero; len2];
                for (k, (&bk, &kappa)) in b.iter().zip(modes).enumerate() {
                    // c_k / 2 at +k and -k gives sum_k c_k cos(pi j k / (m+1))
                    let c = bk * (kappa * scale);
                    buf[k + 1] = c;
                    buf[len2 - (k + 1)] = c;
                }
                inv.process(&mut buf);
                let mut out = vec![zero; line.len()];
                for (o, &b) in out.iter_mut().skip(*lo).zip(&buf[..=m + 1]) {
                    *o = b;
                }
                out
            }
        }
    }

    /// Band-limited resampling of a periodic line onto `factor` times as
    /// many points (zero padding in k). The Nyquist coefficient is split
    /// evenly between the two new modes.
    pub fn refine(&self, line: &[Complex<T>], factor: usize) -> Vec<Complex<T>> {
        let Kind::Periodic { fwd, .. } = &self.kind else {
            panic!("refine requested on a box axis");
        };
        let n = line.len();
        if factor <= 1 {
            return line.to_vec();
        }
        let mut spec = line.to_vec();
        fwd.process(&mut spec);
        let m = n * factor;
        let zero = Complex::new(T::zero(), T::zero());
        let mut big = vec![zero; m];
        let h = n / 2;
        big[..h].copy_from_slice(&spec[..h]);
        big[m - h + 1..].copy_from_slice(&spec[h + 1..]);
        let ny = spec[h] * T::half();
        big[h] = ny;
        big[m - h] = ny;
        let inv = FftPlanner::new().plan_fft_inverse(m);
        inv.process(&mut big);
        let s = T::one() / T::count(n);
        big.iter_mut().for_each(|z| *z = *z * s);
        big
    }

    /// Kinetic energy <p^2 / 2 mass> of one line with spacing dx.
    pub fn kinetic_energy(&self, line: &[Complex<T>], mass: T) -> T {
        let dx = self.grid.dx();
        match &self.kind {
            Kind::Periodic { fwd, k, .. } => {
                let mut buf = line.to_vec();
                fwd.process(&mut buf);
                let n = T::count(buf.len());
                let sum = buf
                    .iter()
                    .zip(k)
                    .fold(T::zero(), |acc, (z, &kj)| acc + kj * kj * z.norm_sqr());
                sum * dx / n / (T::two() * mass)
            }
            Kind::Dirichlet { lo, m, fwd, modes, .. } => {
                let b = Self::dst(fwd, &line[lo + 1..lo + 1 + m]);
                let sum = b
                    .iter()
                    .zip(modes)
                    .fold(T::zero(), |acc, (z, &kj)| acc + kj * kj * z.norm_sqr());
                sum * dx * T::two() / T::count(m + 1) / (T::two() * mass)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn refine_reproduces_band_limited_lines() {
        let g = Grid1D::<f64>::new(0.0, 2.0 * PI, 64).unwrap();
        let f = |x: f64| Complex::new((3.0 * x).cos() + 0.2 * (7.0 * x).sin(), (5.0 * x).sin());
        let line: Vec<_> = g.points().into_iter().map(f).collect();
        let fine = AxisOps::periodic(g).refine(&line, 4);
        let gf = Grid1D::<f64>::new(0.0, 2.0 * PI, 256).unwrap();
        for (i, z) in fine.iter().enumerate() {
            assert!((z - f(gf.x(i))).norm() < 1e-12);
        }
    }

    #[test]
    fn periodic_derivative_of_sine_is_exact() {
        let g = Grid1D::new(0.0, 2.0 * PI, 64).unwrap();
        let ops = AxisOps::periodic(g);
        let line: Vec<_> = g.points().iter().map(|&x| c((3.0 * x).sin())).collect();
        let d = ops.derivative(&line);
        for (i, z) in d.iter().enumerate() {
            assert!((z.re - 3.0 * (3.0 * g.x(i)).cos()).abs() < 1e-12);
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn box_sine_modes_are_exact() {
        let g = Grid1D::new(0.0, 1.0, 128).unwrap();
        let ops = AxisOps::new(g, Boundary::Box { lo: 0.0, hi: 1.0 }).unwrap();
        let line: Vec<_> = g.points().iter().map(|&x| c((2.0 * PI * x).sin())).collect();
        let d = ops.derivative(&line);
        for (i, di) in d.iter().enumerate().skip(1) {
            let x = g.x(i);
            assert!((di.re - 2.0 * PI * (2.0 * PI * x).cos()).abs() < 1e-10, "i={i}");
        }
        let norm: f64 = line.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dx();
        let t = ops.kinetic_energy(&line, 1.0) / norm;
        assert!((t - 2.0 * PI * PI).abs() < 1e-9);

        let mut evolved = line.clone();
        ops.propagate_kinetic(&mut evolved, 0.3, 1.0);
        let phase = Complex::new(0.0, -2.0 * PI * PI * 0.3).exp();
        for (a, b) in evolved.iter().zip(&line) {
            assert!((a - b * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn box_walls_must_sit_on_grid_points() {
        let g = Grid1D::new(0.0, 1.0, 128).unwrap();
        assert!(AxisOps::new(g, Boundary::Box { lo: 0.001, hi: 1.0 }).is_err());
    }
}
