//! Grids, wavefunctions and the spectral machinery underneath them.

mod eigen;
pub mod io;
mod packet;
mod spectral;
mod wave;

pub use eigen::{EigenPotential, EnergyEigenstate, Potential};
pub use packet::{build_packet, superpose, PacketShape, PacketSpec};
pub use spectral::{AxisOps, Boundary};
pub use wave::{SpinorWaveFunction1D, WaveFunction1D, WaveFunction2D};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform periodic grid of `n` points starting at `x_min`; `x_max` is the
/// periodic image of `x_min` and is not itself a sample point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D<T = f64> {
    x_min: T,
    x_max: T,
    n: usize,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_min: T, x_max: T, n: usize) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 64, got {n}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> T {
        self.length() / T::count(self.n)
    }

    pub fn x(&self, i: usize) -> T {
        self.x_min + T::count(i) * self.dx()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<T> {
        let dk = T::two() * T::pi() / self.length();
        let half = self.n / 2;
        (0..self.n)
            .map(|j| {
                if j < half {
                    T::count(j) * dk
                } else {
                    -T::count(self.n - j) * dk
                }
            })
            .collect()
    }

    /// Largest representable wavenumber, pi / dx.
    pub fn k_max(&self) -> T {
        T::pi() / self.dx()
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Fractional grid coordinate of `x` (not wrapped).
    pub fn coordinate(&self, x: T) -> T {
        (x - self.x_min) / self.dx()
    }

    /// Index of the grid point that coincides with `x`, if any.
    pub fn exact_index(&self, x: T) -> Option<usize> {
        let c = self.coordinate(x);
        let r = c.to_f64().round();
        if (c.to_f64() - r).abs() < 1e-9 && r >= 0.0 && r <= self.n as f64 {
            Some(r as usize)
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> Grid1D<f64> {
        Grid1D {
            x_min: self.x_min.to_f64(),
            x_max: self.x_max.to_f64(),
            n: self.n,
        }
    }

    pub fn cast<U: Real>(&self) -> Grid1D<U> {
        Grid1D {
            x_min: U::lit(self.x_min.to_f64()),
            x_max: U::lit(self.x_max.to_f64()),
            n: self.n,
        }
    }
}

/// Sharp indicator of `[a, b]` sampled on the grid. Points that coincide
/// with an endpoint get weight 1/2 so that sums against it are trapezoidal.
pub fn region_indicator<T: Real>(grid: &Grid1D<T>, a: T, b: T) -> Vec<T> {
    let tol = grid.dx() * T::lit(1e-9);
    grid.points()
        .into_iter()
        .map(|x| {
            if (x - a).fabs() <= tol || (x - b).fabs() <= tol {
                T::half()
            } else if x > a && x < b {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect()
}
