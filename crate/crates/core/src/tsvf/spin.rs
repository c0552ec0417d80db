//! Spin-j operators and spin coherent states. `two_j` is 2j, so spin-1/2
//! is `two_j = 1`. Basis order is m = j, j-1, ..., -j.

use num_complex::Complex;

use super::linalg::{cre, hermitian_eigen, Matrix};
use super::{HermitianOperator, TwoStateVector};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct SpinOperators<T = f64> {
    pub two_j: usize,
    pub x: HermitianOperator<T>,
    pub y: HermitianOperator<T>,
    pub z: HermitianOperator<T>,
}

pub fn spin_operators<T: Real>(two_j: usize) -> Result<SpinOperators<T>> {
    if two_j == 0 {
        return Err(Error::Config("spin must be at least 1/2".into()));
    }
    let dim = two_j + 1;
    let j = T::count(two_j) / T::two();
    let m = |k: usize| j - T::count(k);
    let mut sx = Matrix::zeros(dim);
    let mut sy = Matrix::zeros(dim);
    let mut sz = Matrix::zeros(dim);
    for k in 0..dim {
        sz.set(k, k, cre(m(k)));
    }
    // <m+1|S+|m>, with |m+1> at index k-1
    for k in 1..dim {
        let mk = m(k);
        let amp = (j * (j + T::one()) - mk * (mk + T::one())).sqrt() / T::two();
        sx.set(k - 1, k, cre(amp));
        sx.set(k, k - 1, cre(amp));
        sy.set(k - 1, k, Complex::new(T::zero(), -amp));
        sy.set(k, k - 1, Complex::new(T::zero(), amp));
    }
    Ok(SpinOperators {
        two_j,
        x: HermitianOperator::new(sx)?,
        y: HermitianOperator::new(sy)?,
        z: HermitianOperator::new(sz)?,
    })
}

/// `cos(phi) S_x + sin(phi) S_y`.
pub fn planar_component<T: Real>(ops: &SpinOperators<T>, phi: T) -> HermitianOperator<T> {
    HermitianOperator::combine(phi.cos(), &ops.x, phi.sin(), &ops.y)
}

/// `|S_n = j>` for the direction with the given polar and azimuthal angle,
/// `exp(-i azimuth S_z) exp(-i polar S_y) |m = j>`.
pub fn coherent_state<T: Real>(ops: &SpinOperators<T>, polar: T, azimuth: T) -> Result<Vec<Complex<T>>> {
    let dim = ops.two_j + 1;
    let ey = hermitian_eigen(ops.y.matrix())?;
    let rot_y = ey.map(|l| Complex::new((polar * l).cos(), -(polar * l).sin()));
    let top = rot_y.column(0);
    Ok((0..dim)
        .map(|k| {
            let a = azimuth * ops.z.matrix().get(k, k).re;
            top[k] * Complex::new(a.cos(), -a.sin())
        })
        .collect())
}

/// Coherent pre- and post-selected states in the xy plane at azimuths
/// `pi/4 - theta` and `pi/4 + theta`, with the spin component along the
/// bisector `pi/4`. The weak value is `j / cos(theta)`.
pub fn tilted_pair<T: Real>(two_j: usize, theta: T) -> Result<(TwoStateVector<T>, HermitianOperator<T>)> {
    let s = spin_operators::<T>(two_j)?;
    let quarter = T::pi() / T::lit(4.0);
    let half_pi = T::pi() / T::two();
    let pre = coherent_state(&s, half_pi, quarter - theta)?;
    let post = coherent_state(&s, half_pi, quarter + theta)?;
    Ok((TwoStateVector::new(pre, post)?, planar_component(&s, quarter)))
}
