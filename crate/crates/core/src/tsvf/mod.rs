//! Two-state vector formalism: pre/post-selected states, weak values and
//! the pointer states of a von Neumann measurement between the selections.
//!
//! Everything here is plain linear algebra over [`Real`], so nearly
//! orthogonal pre/post pairs can be handled in [`f256`](crate::f256).

mod io;
mod linalg;
mod pointer;
mod position;
mod spin;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use io::{operator_from_json, operator_to_json, state_from_json, state_to_json, tsv_from_json, tsv_to_json};
pub use linalg::{dot, hermitian_eigen, norm, Eigen, Matrix};
pub use pointer::{
    limit_deviation, moment_reconstruction, pointer_final_state, weak_limit_gaussian, PointerModel, PointerState,
};
pub use position::{prepost_position_states, PositionPrePost};
pub use spin::{coherent_state, planar_component, spin_operators, tilted_pair, SpinOperators};

use linalg::cre;

/// Pre-selected `|Ψ1>` and post-selected `<Ψ2|` (kept as a ket).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStateVector<T = f64> {
    pre: Vec<Complex<T>>,
    post: Vec<Complex<T>>,
}

impl<T: Real> TwoStateVector<T> {
    /// Normalizes both states.
    pub fn new(pre: Vec<Complex<T>>, post: Vec<Complex<T>>) -> Result<Self> {
        if pre.len() != post.len() || pre.is_empty() {
            return Err(Error::Config(format!("state dimensions differ: {} vs {}", pre.len(), post.len())));
        }
        let normed = |v: Vec<Complex<T>>| -> Result<Vec<Complex<T>>> {
            let n = norm(&v);
            if !(n > T::zero()) || !n.is_finite() {
                return Err(Error::Domain("state has zero or non-finite norm".into()));
            }
            Ok(v.into_iter().map(|z| z / n).collect())
        };
        Ok(TwoStateVector { pre: normed(pre)?, post: normed(post)? })
    }

    pub fn dim(&self) -> usize {
        self.pre.len()
    }

    pub fn pre(&self) -> &[Complex<T>] {
        &self.pre
    }

    pub fn post(&self) -> &[Complex<T>] {
        &self.post
    }

    /// `<Ψ2|Ψ1>`.
    pub fn overlap(&self) -> Complex<T> {
        dot(&self.post, &self.pre)
    }

    fn check(&self, floor: T) -> Result<Complex<T>> {
        let ov = self.overlap();
        let m = ov.norm_sqr().sqrt();
        if !(m > floor) {
            return Err(Error::UndefinedWeakValue { overlap: m.to_f64(), floor: floor.to_f64() });
        }
        Ok(ov)
    }
}

/// Observable, Hermitian to 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T = f64> {
    matrix: Matrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        let err = matrix.hermiticity_error();
        if !(err <= T::lit(1e-12)) {
            return Err(Error::Config(format!("operator is not Hermitian (deviation {err})")));
        }
        Ok(HermitianOperator { matrix })
    }

    pub fn diagonal(values: &[T]) -> Self {
        HermitianOperator { matrix: Matrix::diagonal(values) }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigen(&self) -> Result<Eigen<T>> {
        hermitian_eigen(&self.matrix)
    }

    /// `a A + b B`.
    pub fn combine(a: T, x: &Self, b: T, y: &Self) -> Self {
        HermitianOperator { matrix: x.matrix.scale(cre(a)).add(&y.matrix.scale(cre(b))) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakValueResult<T = f64> {
    pub value: Complex<T>,
    /// `|<Ψ2|Ψ1>|`.
    pub overlap: T,
}

fn check_dims<T: Real>(tsv: &TwoStateVector<T>, a: &HermitianOperator<T>) -> Result<()> {
    if tsv.dim() != a.dim() {
        return Err(Error::Config(format!("operator dimension {} does not match states of dimension {}", a.dim(), tsv.dim())));
    }
    Ok(())
}

/// `<Ψ2|A|Ψ1> / <Ψ2|Ψ1>`, with the default overlap floor of the scalar type.
pub fn weak_value<T: Real>(tsv: &TwoStateVector<T>, a: &HermitianOperator<T>) -> Result<WeakValueResult<T>> {
    weak_value_with_floor(tsv, a, T::overlap_floor())
}

pub fn weak_value_with_floor<T: Real>(
    tsv: &TwoStateVector<T>,
    a: &HermitianOperator<T>,
    floor: T,
) -> Result<WeakValueResult<T>> {
    check_dims(tsv, a)?;
    let ov = tsv.check(floor)?;
    let num = dot(&tsv.post, &a.matrix.apply(&tsv.pre));
    Ok(WeakValueResult { value: num / ov, overlap: ov.norm_sqr().sqrt() })
}

/// `(A^k)_w - (A_w)^k` for `k = 2..=n_max`.
pub fn moment_expansion<T: Real>(
    tsv: &TwoStateVector<T>,
    a: &HermitianOperator<T>,
    n_max: usize,
) -> Result<Vec<Complex<T>>> {
    check_dims(tsv, a)?;
    let ov = tsv.check(T::overlap_floor())?;
    let aw = weak_value(tsv, a)?.value;
    let mut v = a.matrix.apply(&tsv.pre);
    let mut aw_k = aw;
    let mut out = Vec::new();
    for _k in 2..=n_max {
        v = a.matrix.apply(&v);
        aw_k = aw_k * aw;
        out.push(dot(&tsv.post, &v) / ov - aw_k);
    }
    Ok(out)
}

/// `(A^k)_w` for `k = 0..=n_max`.
pub(crate) fn weak_moments<T: Real>(tsv: &TwoStateVector<T>, a: &HermitianOperator<T>, n_max: usize) -> Result<Vec<Complex<T>>> {
    check_dims(tsv, a)?;
    let ov = tsv.check(T::overlap_floor())?;
    let mut v = tsv.pre.clone();
    let mut out = vec![cre(T::one())];
    for _ in 1..=n_max {
        v = a.matrix.apply(&v);
        out.push(dot(&tsv.post, &v) / ov);
    }
    Ok(out)
}

/// Ratio of two Gaussians of spread `spread` shifted by `shift`, evaluated at `x`.
pub fn tail_ratio<T: Real>(shift: T, spread: T, x: T) -> Result<T> {
    positive(shift, "shift")?;
    positive(spread, "spread")?;
    Ok(((T::two() * x * shift - shift * shift) / (spread * spread)).exp())
}

/// Position beyond which [`tail_ratio`] exceeds `ratio`.
pub fn threshold_x<T: Real>(shift: T, spread: T, ratio: T) -> Result<T> {
    positive(shift, "shift")?;
    positive(spread, "spread")?;
    if !(ratio > T::one()) {
        return Err(Error::Domain(format!("ratio must exceed 1, got {ratio}")));
    }
    Ok(spread * spread * ratio.ln() / (T::two() * shift) + shift / T::two())
}

fn positive<T: Real>(x: T, what: &str) -> Result<()> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}
