//! Pre/post-selected superpositions of narrow packets at `x_i = (N - 2i)/N`
//! whose position weak value is `1 / cos(theta)`.

use num_complex::Complex;

use super::linalg::cre;
use super::{HermitianOperator, TwoStateVector};
use crate::error::{Error, Result};
use crate::qfield::{Grid1D, WaveFunction1D};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct PositionPrePost<T = f64> {
    pub n: usize,
    pub theta: T,
    pub sigma: T,
    pub positions: Vec<T>,
    /// Amplitudes on the packets, i.e. the (N+1)-dimensional two-state vector.
    pub tsv: TwoStateVector<T>,
    pub grid: Grid1D<T>,
}

fn ln_factorial<T: Real>(k: usize) -> T {
    (2..=k).fold(T::zero(), |acc, i| acc + T::count(i).ln())
}

/// Uniform pre-selection and post-selection weights
/// `c_i = (-tan^2(theta/2))^i / (i! (N-i)!)`, evaluated in log space.
pub fn prepost_position_states<T: Real>(n: usize, theta: T, sigma: T, grid: Grid1D<T>) -> Result<PositionPrePost<T>> {
    if n == 0 {
        return Err(Error::Config("N must be at least 1".into()));
    }
    let spacing = T::two() / T::count(n);
    if !(sigma > T::zero()) || !(sigma <= spacing / T::lit(4.0)) {
        return Err(Error::Config(format!("packet width {sigma} does not resolve the spacing {spacing}")));
    }
    if !(grid.dx() <= sigma / T::lit(4.0)) {
        return Err(Error::InvalidGrid(format!("grid step {} too coarse for packets of width {sigma}", grid.dx())));
    }
    let positions: Vec<T> = (0..=n).map(|i| T::one() - spacing * T::count(i)).collect();
    for &x in [positions[0], positions[n]].iter() {
        if x - T::lit(8.0) * sigma < grid.x_min() || x + T::lit(8.0) * sigma > grid.x_max() {
            return Err(Error::PacketOutsideDomain(format!("packet at {x} does not fit the grid")));
        }
    }
    let t2 = {
        let t = (theta / T::two()).sin() / (theta / T::two()).cos();
        t * t
    };
    let post: Vec<Complex<T>> = if t2 == T::zero() {
        (0..=n).map(|i| cre(if i == 0 { T::one() } else { T::zero() })).collect()
    } else {
        let lt = t2.ln();
        let logs: Vec<T> = (0..=n)
            .map(|i| T::count(i) * lt - ln_factorial::<T>(i) - ln_factorial::<T>(n - i))
            .collect();
        let top = logs.iter().fold(logs[0], |m, &l| m.max(l));
        logs.iter()
            .enumerate()
            .map(|(i, &l)| {
                let mag = (l - top).exp();
                cre(if i % 2 == 1 { -mag } else { mag })
            })
            .collect()
    };
    let pre = vec![cre(T::one()); n + 1];
    Ok(PositionPrePost { n, theta, sigma, positions, tsv: TwoStateVector::new(pre, post)?, grid })
}

impl<T: Real> PositionPrePost<T> {
    /// Position operator on the packet basis.
    pub fn position_operator(&self) -> HermitianOperator<T> {
        HermitianOperator::diagonal(&self.positions)
    }

    fn wave(&self, amps: &[Complex<T>]) -> Result<WaveFunction1D<T>> {
        let s = self.sigma;
        let psi = WaveFunction1D::from_fn(self.grid, |x| {
            self.positions.iter().zip(amps).fold(cre(T::zero()), |acc, (&c, a)| {
                let u = (x - c) / s;
                acc + *a * (-(u * u) / T::two()).exp()
            })
        })?;
        psi.normalized()
    }

    pub fn pre_wave(&self) -> Result<WaveFunction1D<T>> {
        self.wave(self.tsv.pre())
    }

    pub fn post_wave(&self) -> Result<WaveFunction1D<T>> {
        self.wave(self.tsv.post())
    }
}
