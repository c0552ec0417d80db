use num_complex::Complex;

use super::{Grid1D, WaveFunction1D};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PacketShape<T> {
    /// `exp(-(x - c)^2 / (2 w^2))`.
    Gaussian,
    /// Flat top of full width `w` with raised-cosine amplitude edges of
    /// length `smoothing` (default four grid spacings).
    Rectangular { smoothing: Option<T> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PacketSpec<T = f64> {
    pub shape: PacketShape<T>,
    pub center: T,
    pub width: T,
    pub velocity: T,
    pub weight: T,
}

impl<T: Real> PacketSpec<T> {
    pub fn gaussian(center: T, width: T, velocity: T) -> Self {
        PacketSpec {
            shape: PacketShape::Gaussian,
            center,
            width,
            velocity,
            weight: T::one(),
        }
    }

    pub fn rectangular(center: T, width: T, velocity: T) -> Self {
        PacketSpec {
            shape: PacketShape::Rectangular { smoothing: None },
            center,
            width,
            velocity,
            weight: T::one(),
        }
    }

    pub fn with_weight(mut self, weight: T) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_smoothing(mut self, smoothing: T) -> Self {
        self.shape = PacketShape::Rectangular {
            smoothing: Some(smoothing),
        };
        self
    }

    /// Edge length used on `grid` (rectangular packets only).
    pub fn smoothing_on(&self, grid: &Grid1D<T>) -> Option<T> {
        match self.shape {
            PacketShape::Gaussian => None,
            PacketShape::Rectangular { smoothing } => {
                Some(smoothing.unwrap_or(T::lit(4.0) * grid.dx()))
            }
        }
    }

    /// Half-extent of the region holding the packet.
    pub fn reach(&self, grid: &Grid1D<T>) -> T {
        match self.shape {
            PacketShape::Gaussian => T::lit(4.0) * self.width,
            PacketShape::Rectangular { .. } => {
                (self.width + self.smoothing_on(grid).unwrap()) * T::half()
            }
        }
    }

    /// Real envelope at `x`, peak value 1.
    pub fn envelope(&self, x: T, grid: &Grid1D<T>) -> T {
        let u = x - self.center;
        match self.shape {
            PacketShape::Gaussian => (-(u * u) / (T::two() * self.width * self.width)).exp(),
            PacketShape::Rectangular { .. } => {
                smoothed_box(u.fabs(), self.width, self.smoothing_on(grid).unwrap())
            }
        }
    }
}

/// Raised-cosine box profile at distance `u` from the center.
pub(crate) fn smoothed_box<T: Real>(u: T, width: T, smoothing: T) -> T {
    let inner = (width - smoothing) * T::half();
    let outer = (width + smoothing) * T::half();
    if u <= inner {
        T::one()
    } else if u >= outer {
        T::zero()
    } else {
        T::half() * (T::one() + (T::pi() * (u - inner) / smoothing).cos())
    }
}

/// Sample one packet (weighted, not normalized) on `grid`.
pub fn build_packet<T: Real>(grid: &Grid1D<T>, spec: &PacketSpec<T>) -> Result<WaveFunction1D<T>> {
    if !(spec.width > T::zero()) {
        return Err(Error::Config(format!("packet width must be positive, got {}", spec.width)));
    }
    if let Some(s) = spec.smoothing_on(grid) {
        if s < T::two() * grid.dx() * T::lit(1.0 - 1e-9) {
            return Err(Error::Config(format!(
                "edge smoothing {s} is shorter than two grid spacings"
            )));
        }
        if s >= spec.width {
            return Err(Error::Config("edge smoothing must be shorter than the packet".into()));
        }
    }
    let reach = spec.reach(grid);
    if spec.center - reach < grid.x_min() || spec.center + reach > grid.x_max() {
        return Err(Error::PacketOutsideDomain(format!(
            "[{}, {}] does not fit in [{}, {}]",
            spec.center - reach,
            spec.center + reach,
            grid.x_min(),
            grid.x_max()
        )));
    }
    WaveFunction1D::from_fn(*grid, |x| {
        let env = spec.envelope(x, grid) * spec.weight;
        let ph = spec.velocity * x;
        Complex::new(ph.cos(), ph.sin()) * env
    })
}

/// Normalized sum of packets.
pub fn superpose<T: Real>(grid: &Grid1D<T>, specs: &[PacketSpec<T>]) -> Result<WaveFunction1D<T>> {
    let mut psi = WaveFunction1D::zeros(*grid);
    for spec in specs {
        let p = build_packet(grid, spec)?;
        psi.add_scaled(&p, Complex::new(T::one(), T::zero()));
    }
    psi.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::AxisOps;

    fn grid() -> Grid1D {
        Grid1D::new(-10.0, 10.0, 1024).unwrap()
    }

    #[test]
    fn resting_gaussian_is_real_and_peaked_at_center() {
        let g = grid();
        let psi = build_packet(&g, &PacketSpec::gaussian(0.0, 1.0, 0.0))
            .unwrap()
            .normalized()
            .unwrap();
        assert!(psi.is_real(0.0));
        let rho = psi.density();
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        assert_eq!(rho[512], peak);
        assert!(psi.amplitudes().iter().all(|z| z.re >= 0.0));
    }

    #[test]
    fn velocity_only_enters_the_phase() {
        let g = grid();
        let ops = AxisOps::periodic(g);
        let still = build_packet(&g, &PacketSpec::gaussian(0.0, 1.0, 0.0)).unwrap();
        let moving = build_packet(&g, &PacketSpec::gaussian(0.0, 1.0, 2.0)).unwrap();
        for (a, b) in still.density().iter().zip(moving.density()) {
            assert!((a - b).abs() < 1e-14);
        }
        let (rho, j) = moving.density_and_current(&ops);
        assert!((j[512] / rho[512] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rectangular_packet_matches_smoothed_box() {
        let g = grid();
        let spec = PacketSpec::rectangular(3.0, 1.0, -1.0);
        let psi = build_packet(&g, &spec).unwrap().normalized().unwrap();
        // independent evaluation of the raised-cosine box
        let s = 4.0 * g.dx();
        let profile = |x: f64| {
            let u = (x - 3.0f64).abs();
            if u <= 0.5 - s / 2.0 {
                1.0
            } else if u >= 0.5 + s / 2.0 {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * (u - 0.5 + s / 2.0) / s).cos())
            }
        };
        let norm: f64 = g.points().iter().map(|&x| profile(x).powi(2)).sum::<f64>() * g.dx();
        for (i, r) in psi.density().iter().enumerate() {
            let x = g.x(i);
            assert!((r - profile(x).powi(2) / norm).abs() < 1e-12);
            if (x - 3.0).abs() < 0.5 - s {
                assert!((r - 1.0 / norm).abs() < 1e-12, "flat top density {r} at {x}");
            }
            if (x - 3.0).abs() > 0.5 + s {
                assert_eq!(*r, 0.0);
            }
        }
    }

    #[test]
    fn rejects_packets_outside_the_grid() {
        let g = grid();
        let err = build_packet(&g, &PacketSpec::gaussian(8.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::PacketOutsideDomain(_)));
        assert!(build_packet(&g, &PacketSpec::rectangular(0.0, 1.0, 0.0).with_smoothing(0.001)).is_err());
    }

    #[test]
    fn counter_moving_rectangles_cancel_current_in_overlap() {
        let g = grid();
        let ops = AxisOps::periodic(g);
        let specs = [
            PacketSpec::rectangular(0.0, 4.0, 3.0).with_smoothing(1.0),
            PacketSpec::rectangular(0.0, 4.0, -3.0).with_smoothing(1.0),
        ];
        let psi = superpose(&g, &specs).unwrap();
        let (_, j) = psi.density_and_current(&ops);
        assert!(j.iter().all(|j| j.abs() < 1e-8));
    }
}
