use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qfield::{WaveFunction1D, WaveFunction2D};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Inverse CDF of |psi|^2 on the grid.
    Density,
    /// Uniform over an interval.
    UniformInSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_samples: usize,
    pub seed: u64,
    pub sampling: Sampling,
}

impl EnsembleSpec {
    pub fn new(n_samples: usize, seed: u64, sampling: Sampling) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::Config("ensemble needs at least one sample".into()));
        }
        Ok(EnsembleSpec { n_samples, seed, sampling })
    }
}

pub enum SampleSource<'a, T> {
    Wave(&'a WaveFunction1D<T>),
    Interval(T, T),
}

/// Draw starting points deterministically from `seed`.
pub fn sample_initial<T: Real>(source: SampleSource<'_, T>, spec: &EnsembleSpec) -> Result<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match (source, spec.sampling) {
        (SampleSource::Interval(a, b), _) => {
            if !(b > a) {
                return Err(Error::Config(format!("empty sampling interval [{a}, {b}]")));
            }
            Ok((0..spec.n_samples).map(|_| a + (b - a) * T::lit(rng.gen::<f64>())).collect())
        }
        (SampleSource::Wave(psi), Sampling::Density) => {
            let cdf = GridCdf::new(&psi.density());
            let grid = psi.grid();
            Ok((0..spec.n_samples)
                .map(|_| grid.x_min() + grid.dx() * T::lit(cdf.invert(rng.gen::<f64>())))
                .collect())
        }
        (SampleSource::Wave(psi), Sampling::UniformInSupport) => {
            // support: where the density exceeds 1e-8 of its peak
            let rho = psi.density();
            let peak = rho.iter().fold(T::zero(), |m, &r| m.max(r));
            let inside: Vec<usize> = (0..rho.len()).filter(|&i| rho[i] > peak * T::lit(1e-8)).collect();
            let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) else {
                return Err(Error::Domain("wave has no support".into()));
            };
            let g = psi.grid();
            Ok((0..spec.n_samples)
                .map(|_| g.x(lo) + (g.x(hi) - g.x(lo)) * T::lit(rng.gen::<f64>()))
                .collect())
        }
    }
}

/// Cumulative distribution of grid weights, linear between grid points.
struct GridCdf {
    cum: Vec<f64>,
}

impl GridCdf {
    fn new<T: Real>(rho: &[T]) -> Self {
        // mass of the cell [i, i+1] by the trapezoid rule, periodic closure
        let n = rho.len();
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            acc += 0.5 * (rho[i].to_f64() + rho[(i + 1) % n].to_f64());
            cum.push(acc);
        }
        cum.iter_mut().for_each(|c| *c /= acc);
        GridCdf { cum }
    }

    /// Fractional grid index at which the CDF reaches `u`.
    fn invert(&self, u: f64) -> f64 {
        let i = self.cum.partition_point(|&c| c <= u).clamp(1, self.cum.len() - 1) - 1;
        let (a, b) = (self.cum[i], self.cum[i + 1]);
        let s = if b > a { (u - a) / (b - a) } else { 0.5 };
        i as f64 + s
    }
}

/// Draw (x, q) from |Psi|^2: a cell by its weight, then uniformly inside it.
pub fn sample_density_2d<T: Real>(psi: &WaveFunction2D<T>, n: usize, seed: u64) -> Vec<[T; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = psi.density();
    let mut cum = Vec::with_capacity(rho.len());
    let mut acc = 0.0;
    for r in &rho {
        acc += r.to_f64();
        cum.push(acc);
    }
    let nq = psi.nq();
    let (gx, gq) = (psi.grid_x(), psi.grid_q());
    (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let k = cum.partition_point(|&c| c <= u).min(rho.len() - 1);
            let jx = T::lit(rng.gen::<f64>() - 0.5);
            let jq = T::lit(rng.gen::<f64>() - 0.5);
            [gx.x(k / nq) + jx * gx.dx(), gq.x(k % nq) + jq * gq.dx()]
        })
        .collect()
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{build_packet, Grid1D, PacketSpec};
    use statrs::function::erf::erf;

    #[test]
    fn rectangular_wave_samples_are_uniform() {
        let g = Grid1D::new(-4.0, 4.0, 1024).unwrap();
        let psi = build_packet(&g, &PacketSpec::rectangular(0.5, 2.0, 0.0)).unwrap().normalized().unwrap();
        let spec = EnsembleSpec::new(100_000, 7, Sampling::UniformInSupport).unwrap();
        let xs = sample_initial(SampleSource::Wave(&psi), &spec).unwrap();
        // support of the smoothed box reaches half a smoothing length past each edge
        let s = 4.0 * g.dx();
        let (a, b) = (-0.5 - s / 2.0, 1.5 + s / 2.0);
        let d = ks_statistic(&xs, |x| ((x - a) / (b - a)).clamp(0.0, 1.0));
        assert!(d < 0.01, "KS {d}");
        let spec = EnsembleSpec::new(100_000, 7, Sampling::UniformInSupport).unwrap();
        let ys = sample_initial(SampleSource::Interval(-0.5, 1.5), &spec).unwrap();
        let d = ks_statistic(&ys, |x| ((x + 0.5) / 2.0).clamp(0.0, 1.0));
        assert!(d < 0.01, "KS {d}");
    }

    #[test]
    fn gaussian_samples_follow_the_density() {
        let g = Grid1D::new(-10.0, 10.0, 512).unwrap();
        let psi = build_packet(&g, &PacketSpec::gaussian(1.3, 1.0, 0.0)).unwrap().normalized().unwrap();
        let n = 100_000;
        let spec = EnsembleSpec::new(n, 11, Sampling::Density).unwrap();
        let xs = sample_initial(SampleSource::Wave(&psi), &spec).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = 1.0 / 2f64.sqrt();
        assert!((mean - 1.3).abs() < 3.0 * sd / (n as f64).sqrt());
        // density is normal with standard deviation 1/sqrt2
        let d = ks_statistic(&xs, |x| 0.5 * (1.0 + erf((x - 1.3) / (sd * 2f64.sqrt()))));
        assert!(d < 0.01, "KS {d}");
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let g = Grid1D::new(-10.0, 10.0, 128).unwrap();
        let psi = build_packet(&g, &PacketSpec::gaussian(0.0, 1.0, 0.0)).unwrap().normalized().unwrap();
        let spec = EnsembleSpec::new(1000, 3, Sampling::Density).unwrap();
        let a = sample_initial(SampleSource::Wave(&psi), &spec).unwrap();
        let b = sample_initial(SampleSource::Wave(&psi), &spec).unwrap();
        assert_eq!(a, b);
        let c = sample_initial(SampleSource::Wave(&psi), &EnsembleSpec { seed: 4, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(EnsembleSpec::new(0, 1, Sampling::Density).is_err());
    }
}
