use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qfield::{region_indicator, Grid1D};
use crate::scalar::Real;

/// Time dependence of a coupling, normalized to unit area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum GProfile<T = f64> {
    /// Constant `1 / (t_off - t_on)` on `[t_on, t_off]`.
    Square { t_on: T, t_off: T },
    /// Switched on over `ramp` with a sin^2 edge, held flat, and switched
    /// off symmetrically; lives on `[start, start + duration]`.
    SmoothAdiabatic { start: T, duration: T, ramp: T },
}

impl<T: Real> GProfile<T> {
    pub fn square(t_on: T, t_off: T) -> Result<Self> {
        let p = GProfile::Square { t_on, t_off };
        p.validate()?;
        Ok(p)
    }

    pub fn smooth_adiabatic(duration: T, ramp: T) -> Result<Self> {
        let p = GProfile::SmoothAdiabatic { start: T::zero(), duration, ramp };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GProfile::Square { t_on, t_off } => {
                if !(t_on.is_finite() && t_off.is_finite() && t_off > t_on) {
                    return Err(Error::Config(format!("square pulse needs t_off > t_on, got [{t_on}, {t_off}]")));
                }
            }
            GProfile::SmoothAdiabatic { start, duration, ramp } => {
                if !(start.is_finite() && duration > T::zero() && ramp > T::zero())
                    || !(T::two() * ramp <= duration)
                {
                    return Err(Error::Config(format!(
                        "adiabatic profile needs 0 < 2 ramp <= T, got T={duration}, ramp={ramp}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Interval outside which g vanishes.
    pub fn window(&self) -> (T, T) {
        match *self {
            GProfile::Square { t_on, t_off } => (t_on, t_off),
            GProfile::SmoothAdiabatic { start, duration, .. } => (start, start + duration),
        }
    }

    fn plateau(&self) -> T {
        match *self {
            GProfile::Square { t_on, t_off } => T::one() / (t_off - t_on),
            GProfile::SmoothAdiabatic { duration, ramp, .. } => T::one() / (duration - ramp),
        }
    }

    pub fn value(&self, t: T) -> T {
        let (a, b) = self.window();
        if t < a || t > b {
            return T::zero();
        }
        let h = self.plateau();
        match *self {
            GProfile::Square { .. } => h,
            GProfile::SmoothAdiabatic { ramp, .. } => {
                let u = (t - a).min(b - t);
                if u >= ramp {
                    h
                } else {
                    let s = (T::pi() * u / (T::two() * ramp)).sin();
                    h * s * s
                }
            }
        }
    }

    /// Area of g from the window start up to `t`.
    fn cumulative(&self, t: T) -> T {
        let (a, b) = self.window();
        if t <= a {
            return T::zero();
        }
        if t >= b {
            return T::one();
        }
        let h = self.plateau();
        match *self {
            GProfile::Square { .. } => h * (t - a),
            GProfile::SmoothAdiabatic { ramp, .. } => {
                // integral of sin^2(pi s / 2r) from 0 to u
                let edge = |u: T| u / T::two() - ramp / (T::two() * T::pi()) * (T::pi() * u / ramp).sin();
                let half_ramp = ramp / T::two();
                let u = t - a;
                if u <= ramp {
                    h * edge(u)
                } else if t <= b - ramp {
                    h * (half_ramp + (u - ramp))
                } else {
                    T::one() - h * edge(b - t)
                }
            }
        }
    }

    /// Exact integral of g over `[t0, t1]`.
    pub fn integral(&self, t0: T, t1: T) -> T {
        self.cumulative(t1) - self.cumulative(t0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// `g(t) P Pi_V`: moves the pointer position.
    PositionShift,
    /// `g(t) Q Pi_V`: kicks the pointer momentum.
    MomentumKick,
}

/// Particle-pointer interaction localized in the region `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec<T = f64> {
    pub kind: CouplingKind,
    pub region: (T, T),
    pub profile: GProfile<T>,
    /// Total impulse, the integral of the coupling over time.
    pub strength: T,
}

impl<T: Real> CouplingSpec<T> {
    pub fn new(kind: CouplingKind, region: (T, T), profile: GProfile<T>, strength: T) -> Self {
        CouplingSpec { kind, region, profile, strength }
    }

    pub fn validate(&self, grid_x: &Grid1D<T>) -> Result<()> {
        self.profile.validate()?;
        let (a, b) = self.region;
        if !(a < b) || a < grid_x.x_min() || b > grid_x.x_max() {
            return Err(Error::Config(format!(
                "coupling region [{a}, {b}] must be a proper interval inside the x grid"
            )));
        }
        if !self.strength.is_finite() {
            return Err(Error::Config("coupling strength must be finite".into()));
        }
        Ok(())
    }

    /// Impulse delivered over `[t0, t1]`.
    pub fn impulse(&self, t0: T, t1: T) -> T {
        self.strength * self.profile.integral(t0, t1)
    }

    pub fn rate(&self, t: T) -> T {
        self.strength * self.profile.value(t)
    }

    pub fn indicator(&self, grid_x: &Grid1D<T>) -> Vec<T> {
        region_indicator(grid_x, self.region.0, self.region.1)
    }

    pub fn negated(mut self) -> Self {
        self.strength = -self.strength;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(p: &GProfile<f64>, a: f64, b: f64) -> f64 {
        // composite Simpson
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = p.value(a) + p.value(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * p.value(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn profiles_have_unit_area() {
        let sq = GProfile::<f64>::square(0.3, 1.1).unwrap();
        assert!((quad(&sq, 0.3, 1.1) - 1.0).abs() < 1e-12);
        let ad = GProfile::<f64>::smooth_adiabatic(10.0, 1.5).unwrap();
        assert!((quad(&ad, 0.0, 10.0) - 1.0).abs() < 1e-9);
        assert_eq!(ad.integral(-1.0, 11.0), 1.0);
    }

    #[test]
    fn adiabatic_edges_are_flat() {
        let ad = GProfile::<f64>::smooth_adiabatic(4.0, 1.0).unwrap();
        let h = 1e-6;
        assert!(ad.value(h) < 1e-10);
        assert!((ad.value(2.0) - 1.0 / 3.0).abs() < 1e-15);
        let slope = (ad.value(1.0) - ad.value(1.0 - h)) / h;
        assert!(slope.abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(GProfile::square(1.0, 1.0).is_err());
        assert!(GProfile::smooth_adiabatic(1.0, 0.6).is_err());
    }

    proptest! {
        #[test]
        fn integral_matches_quadrature(t0 in -1.0f64..9.0, len in 0.0f64..4.0) {
            let ad = GProfile::<f64>::smooth_adiabatic(8.0, 2.0).unwrap();
            let t1 = t0 + len;
            prop_assert!((ad.integral(t0, t1) - quad(&ad, t0, t1)).abs() < 1e-9);
        }

        #[test]
        fn integral_is_additive(a in 0.0f64..3.0, b in 3.0f64..5.0, c in 5.0f64..8.0) {
            let ad = GProfile::<f64>::smooth_adiabatic(8.0, 2.5).unwrap();
            prop_assert!((ad.integral(a, b) + ad.integral(b, c) - ad.integral(a, c)).abs() < 1e-14);
        }
    }
}
