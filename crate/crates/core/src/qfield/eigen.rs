use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{AxisOps, Boundary, Grid1D, WaveFunction1D};
use crate::error::{Error, Result};
use crate::scalar::{Real, SpectralReal};

/// Static potential acting on the particle coordinate.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential<T = f64> {
    /// Values sampled on the grid.
    Field(Vec<T>),
    /// Infinite walls; the wave lives on the open interval `(lo, hi)`.
    Box { lo: T, hi: T },
}

impl<T: Real> Potential<T> {
    pub fn harmonic(grid: &Grid1D<T>, omega: T) -> Self {
        Potential::Field(
            grid.points()
                .into_iter()
                .map(|x| T::half() * omega * omega * x * x)
                .collect(),
        )
    }

    pub fn boundary(&self) -> Boundary<T> {
        match self {
            Potential::Field(_) => Boundary::Periodic,
            Potential::Box { lo, hi } => Boundary::Box { lo: *lo, hi: *hi },
        }
    }

    pub fn field(&self) -> Option<&[T]> {
        match self {
            Potential::Field(v) => Some(v),
            Potential::Box { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EigenPotential<T = f64> {
    /// Infinite well on `[0, length]`; quantum numbers start at 1.
    Box { length: T },
    /// `omega^2 x^2 / 2`; quantum numbers start at 0.
    Harmonic { omega: T },
}

/// Closed-form energy eigenstate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEigenstate<T = f64> {
    pub potential: EigenPotential<T>,
    pub n: u32,
}

impl<T: Real> EnergyEigenstate<T> {
    pub fn in_box(length: T, n: u32) -> Result<Self> {
        if !(length > T::zero()) || n == 0 {
            return Err(Error::Config(format!(
                "box state needs length > 0 and n >= 1, got L={length}, n={n}"
            )));
        }
        Ok(EnergyEigenstate {
            potential: EigenPotential::Box { length },
            n,
        })
    }

    pub fn harmonic(omega: T, n: u32) -> Result<Self> {
        if !(omega > T::zero()) {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        Ok(EnergyEigenstate {
            potential: EigenPotential::Harmonic { omega },
            n,
        })
    }

    pub fn energy(&self) -> T {
        match self.potential {
            EigenPotential::Box { length } => {
                let k = T::count(self.n as usize) * T::pi() / length;
                k * k * T::half()
            }
            EigenPotential::Harmonic { omega } => omega * (T::count(self.n as usize) + T::half()),
        }
    }

    /// Interval outside which the state is negligible (zero for the box).
    pub fn support(&self) -> (T, T) {
        match self.potential {
            EigenPotential::Box { length } => (T::zero(), length),
            EigenPotential::Harmonic { omega } => {
                let turning = (T::count(2 * self.n as usize + 1) / omega).sqrt();
                let r = turning + T::lit(6.0) / omega.sqrt();
                (-r, r)
            }
        }
    }

    pub fn value(&self, x: T) -> T {
        match self.potential {
            EigenPotential::Box { length } => {
                if x <= T::zero() || x >= length {
                    T::zero()
                } else {
                    let k = T::count(self.n as usize) * T::pi() / length;
                    (T::two() / length).sqrt() * (k * x).sin()
                }
            }
            EigenPotential::Harmonic { omega } => hermite_function(self.n, omega.sqrt() * x) * omega.sqrt().sqrt(),
        }
    }

    /// Hamiltonian potential for this state on `grid`.
    pub fn potential_on(&self, grid: &Grid1D<T>) -> Potential<T> {
        match self.potential {
            EigenPotential::Box { length } => Potential::Box {
                lo: T::zero(),
                hi: length,
            },
            EigenPotential::Harmonic { omega } => Potential::harmonic(grid, omega),
        }
    }

    /// The state sampled on `grid`, normalized on the grid.
    pub fn field(&self, grid: &Grid1D<T>) -> Result<WaveFunction1D<T>> {
        let (lo, hi) = self.support();
        if grid.x_min() > lo || grid.x_max() < hi {
            return Err(Error::Domain(format!(
                "grid [{}, {}] does not cover the state's support [{lo}, {hi}]",
                grid.x_min(),
                grid.x_max()
            )));
        }
        WaveFunction1D::from_fn(*grid, |x| Complex::new(self.value(x), T::zero()))?.normalized()
    }
}

impl<T: SpectralReal> EnergyEigenstate<T> {
    /// <H> of `psi` under this state's Hamiltonian.
    pub fn energy_expectation(&self, psi: &WaveFunction1D<T>) -> Result<T> {
        let grid = psi.grid();
        let pot = self.potential_on(grid);
        let ops = AxisOps::new(*grid, pot.boundary())?;
        let kinetic = ops.kinetic_energy(psi.amplitudes(), T::one());
        let potential = match pot.field() {
            Some(v) => {
                psi.density()
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |a, (r, v)| a + *r * *v)
                    * grid.dx()
            }
            None => T::zero(),
        };
        Ok((kinetic + potential) / psi.norm_sqr())
    }
}

/// Normalized Hermite function of order `n` at `xi`.
fn hermite_function<T: Real>(n: u32, xi: T) -> T {
    let g = (-(xi * xi) * T::half()).exp() / T::pi().sqrt().sqrt();
    if n == 0 {
        return g;
    }
    let mut prev = g;
    let mut cur = T::two().sqrt() * xi * g;
    for k in 1..n {
        let kf = T::count(k as usize);
        let next = (T::two() / (kf + T::one())).sqrt() * xi * cur - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sign_changes(psi: &WaveFunction1D) -> usize {
        let v: Vec<f64> = psi
            .amplitudes()
            .iter()
            .map(|z| z.re)
            .filter(|r| r.abs() > 1e-12)
            .collect();
        v.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }

    #[test]
    fn box_ground_state() {
        let g = Grid1D::new(0.0, 1.0, 256).unwrap();
        let e = EnergyEigenstate::<f64>::in_box(1.0, 1).unwrap();
        let psi = e.field(&g).unwrap();
        assert!(psi.is_real(0.0));
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        for (i, z) in psi.amplitudes().iter().enumerate() {
            assert!((z.re - 2f64.sqrt() * (PI * g.x(i)).sin()).abs() < 1e-12);
        }
        let energy = e.energy_expectation(&psi).unwrap();
        assert!(((energy - PI * PI / 2.0) / energy).abs() < 1e-6);
    }

    #[test]
    fn box_third_state_has_two_interior_nodes() {
        let g = Grid1D::new(-0.5, 1.5, 512).unwrap();
        let e = EnergyEigenstate::<f64>::in_box(1.0, 3).unwrap();
        let psi = e.field(&g).unwrap();
        assert_eq!(sign_changes(&psi), 2);
        assert!((e.energy() - 9.0 * PI * PI / 2.0).abs() < 1e-12);
        let energy = e.energy_expectation(&psi).unwrap();
        assert!(((energy - e.energy()) / e.energy()).abs() < 1e-6);
    }

    #[test]
    fn harmonic_ground_state() {
        let g = Grid1D::new(-10.0, 10.0, 256).unwrap();
        let e = EnergyEigenstate::<f64>::harmonic(1.0, 0).unwrap();
        let psi = e.field(&g).unwrap();
        assert!((psi.position_spread() - 1.0 / 2f64.sqrt()).abs() < 1e-10);
        let energy = e.energy_expectation(&psi).unwrap();
        assert!((energy - 0.5).abs() < 1e-6 * 0.5);
    }

    #[test]
    fn harmonic_excited_states() {
        let g = Grid1D::new(-12.0, 12.0, 512).unwrap();
        for n in 1..6 {
            let e = EnergyEigenstate::<f64>::harmonic(1.3, n).unwrap();
            let psi = e.field(&g).unwrap();
            assert_eq!(sign_changes(&psi), n as usize);
            let energy = e.energy_expectation(&psi).unwrap();
            assert!(((energy - e.energy()) / e.energy()).abs() < 1e-6, "n={n}: {energy}");
        }
    }

    #[test]
    fn grid_too_small() {
        let g = Grid1D::new(-2.0, 2.0, 64).unwrap();
        assert!(EnergyEigenstate::harmonic(1.0, 0).unwrap().field(&g).is_err());
        let g = Grid1D::new(0.1, 1.0, 64).unwrap();
        assert!(EnergyEigenstate::in_box(1.0, 1).unwrap().field(&g).is_err());
        assert!(EnergyEigenstate::in_box(1.0, 0).is_err());
    }
}
