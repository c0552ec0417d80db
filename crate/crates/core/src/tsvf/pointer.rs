//! Final pointer states of a von Neumann measurement `exp(-i P A)` between
//! pre- and post-selection, with a Gaussian pointer `exp(-Q^2 / 2 Delta^2)`.

use num_complex::Complex;

use super::linalg::{cre, czero, dot};
use super::{check_dims, weak_moments, weak_value, HermitianOperator, TwoStateVector};
use crate::error::{Error, Result};
use crate::qfield::{AxisOps, Grid1D, WaveFunction1D};
use crate::scalar::{Real, SpectralReal};

const MAX_POINTS: usize = 1 << 18;

#[derive(Clone, Debug, PartialEq)]
pub struct PointerModel<T = f64> {
    pub delta: T,
    pub grid: Grid1D<T>,
}

impl<T: Real> PointerModel<T> {
    pub fn new(delta: T, grid: Grid1D<T>) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::Config(format!("pointer spread must be positive, got {delta}")));
        }
        Ok(PointerModel { delta, grid })
    }

    /// Grid covering `[lo - 10 Delta, hi + 10 Delta]` with at least 8
    /// points per `Delta`.
    pub fn fit(delta: T, lo: T, hi: T) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::Config(format!("pointer spread must be positive, got {delta}")));
        }
        let pad = T::lit(10.0) * delta;
        let (a, b) = (lo - pad, hi + pad);
        let need = ((b - a) / delta * T::lit(8.0)).to_f64().ceil() as usize;
        let n = need.max(64).next_power_of_two();
        if n > MAX_POINTS {
            return Err(Error::Config(format!("pointer grid would need {n} points")));
        }
        Self::new(delta, Grid1D::new(a, b, n)?)
    }

    /// Grid sized for the spectrum of `a` and the point `extra`.
    pub fn fit_operator(delta: T, a: &HermitianOperator<T>, extra: T) -> Result<Self> {
        let e = a.eigen()?;
        let lo = e.values[0].min(extra);
        let hi = e.values[e.values.len() - 1].max(extra);
        Self::fit(delta, lo, hi)
    }

    fn gaussian(&self, center: T) -> impl Fn(T) -> T + '_ {
        let norm = T::one() / (T::pi() * self.delta * self.delta).sqrt().sqrt();
        move |q: T| {
            let u = (q - center) / self.delta;
            norm * (-(u * u) / T::two()).exp()
        }
    }

    fn covers(&self, lo: T, hi: T) -> Result<()> {
        let six = T::lit(6.0) * self.delta;
        if self.grid.x_min() > lo - six || self.grid.x_max() < hi + six {
            return Err(Error::Domain(format!(
                "pointer grid [{}, {}] must cover the spectrum [{lo}, {hi}] by 6 Delta",
                self.grid.x_min(),
                self.grid.x_max()
            )));
        }
        Ok(())
    }

    fn check_clipping(&self, psi: &WaveFunction1D<T>) -> Result<()> {
        let band = T::lit(3.0) * self.delta;
        let (a, b) = (self.grid.x_min(), self.grid.x_max());
        let total = psi.norm_sqr();
        let edge = (psi.mass_in(a, a + band) + psi.mass_in(b - band, b)) / total;
        if edge > T::lit(1e-8) {
            return Err(Error::GridClipping { mass: edge.to_f64() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PointerState<T = f64> {
    /// Projected on the post-selected state; its norm is the post-selection
    /// probability.
    pub unnormalized: WaveFunction1D<T>,
    pub normalized: WaveFunction1D<T>,
    pub probability: T,
}

/// Exact pointer state `sum_a <Ψ2|a><a|Ψ1> G(Q - a)`.
pub fn pointer_final_state<T: Real>(
    tsv: &TwoStateVector<T>,
    a: &HermitianOperator<T>,
    pm: &PointerModel<T>,
) -> Result<PointerState<T>> {
    check_dims(tsv, a)?;
    weak_value(tsv, a)?;
    let e = a.eigen()?;
    pm.covers(e.values[0], e.values[e.values.len() - 1])?;
    let weights: Vec<Complex<T>> = (0..e.values.len())
        .map(|k| {
            let v = e.vector(k);
            dot(tsv.post(), &v) * dot(&v, tsv.pre())
        })
        .collect();
    let gs: Vec<_> = e.values.iter().map(|&l| pm.gaussian(l)).collect();
    let amp = pm
        .grid
        .points()
        .into_iter()
        .map(|q| weights.iter().zip(&gs).fold(czero(), |acc, (w, g)| acc + *w * g(q)))
        .collect();
    let unnormalized = WaveFunction1D::new(pm.grid, amp)?;
    pm.check_clipping(&unnormalized)?;
    let probability = unnormalized.norm_sqr();
    let normalized = unnormalized.clone().normalized()?;
    Ok(PointerState { unnormalized, normalized, probability })
}

/// Normalized Gaussian pointer centered on `center`.
pub fn weak_limit_gaussian<T: Real>(center: T, pm: &PointerModel<T>) -> Result<WaveFunction1D<T>> {
    let g = pm.gaussian(center);
    WaveFunction1D::from_fn(pm.grid, |q| cre(g(q)))?.normalized()
}

/// Phase-insensitive L2 distance `sqrt(2 - 2 |<exact|limit>|)` between the
/// exact pointer state and the Gaussian at `Re A_w`.
pub fn limit_deviation<T: Real>(tsv: &TwoStateVector<T>, a: &HermitianOperator<T>, pm: &PointerModel<T>) -> Result<T> {
    let exact = pointer_final_state(tsv, a, pm)?.normalized;
    let aw = weak_value(tsv, a)?.value.re;
    let limit = weak_limit_gaussian(aw, pm)?;
    let ov = exact.inner(&limit).norm_sqr().sqrt();
    Ok((T::two() - T::two() * ov).max(T::zero()).sqrt())
}

/// Pointer state rebuilt from the moment series truncated at `n_max`,
/// `<Ψ2|Ψ1> sum_n (-iP)^n / n! (A^n)_w G~(P)`, transformed back to Q.
pub fn moment_reconstruction<T: SpectralReal>(
    tsv: &TwoStateVector<T>,
    a: &HermitianOperator<T>,
    pm: &PointerModel<T>,
    n_max: usize,
) -> Result<WaveFunction1D<T>> {
    let moments = weak_moments(tsv, a, n_max)?;
    let ov = tsv.overlap();
    let ops = AxisOps::periodic(pm.grid);
    let g = pm.gaussian(T::zero());
    let mut line: Vec<Complex<T>> = pm.grid.points().into_iter().map(|q| cre(g(q))).collect();
    ops.forward(&mut line);
    for (z, &k) in line.iter_mut().zip(ops.wavenumbers()) {
        // Horner in (-ik)
        let mik = Complex::new(T::zero(), -k);
        let mut acc = czero();
        for n in (0..=n_max).rev() {
            acc = acc * mik / T::count(n + 1) + moments[n];
        }
        *z = *z * acc * ov;
    }
    ops.inverse(&mut line);
    WaveFunction1D::new(pm.grid, line)
}
