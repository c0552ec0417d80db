use num_complex::Complex;

use crate::propagate::{CouplingKind, CouplingSpec, Hamiltonian2DConfig};
use crate::qfield::{AxisOps, Grid1D, SpinorWaveFunction1D, WaveFunction1D, WaveFunction2D};
use crate::scalar::{Real, SpectralReal};

/// Densities below this fraction of the peak count as nodes.
pub const RHO_FLOOR: f64 = 1e-12;

/// A guidance field frozen at one instant.
pub trait VelocityField<T: Real, const D: usize>: Sync {
    /// Velocity at `p`, or `None` where the density is below the floor.
    fn velocity(&self, p: [T; D]) -> Option<[T; D]>;

    /// Velocity contributions known exactly in time (not interpolated
    /// between snapshots), such as a position-shift coupling.
    fn drift(&self, _t: T, _p: [T; D]) -> [T; D] {
        [T::zero(); D]
    }
}

/// Cubic Lagrange weights for nodes -1, 0, 1, 2 at fractional offset `s`.
fn cubic_weights<T: Real>(s: T) -> [T; 4] {
    let one = T::one();
    let two = T::two();
    let six = T::lit(6.0);
    [
        -s * (s - one) * (s - two) / six,
        (s + one) * (s - one) * (s - two) / two,
        -(s + one) * s * (s - two) / two,
        (s + one) * s * (s - one) / six,
    ]
}

/// Stencil indices (periodic wrap) and weights around coordinate `x`.
fn stencil<T: Real>(grid: &Grid1D<T>, x: T) -> ([usize; 4], [T; 4]) {
    let n = grid.len() as i64;
    let u = (x - grid.x_min()) / grid.dx();
    let i = u.to_f64().floor() as i64;
    let s = u - T::from_int(i);
    let idx = [-1i64, 0, 1, 2].map(|o| (i + o).rem_euclid(n) as usize);
    (idx, cubic_weights(s))
}

fn interp<T: Real>(vals: &[Complex<T>], idx: &[usize; 4], w: &[T; 4]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (i, &wi) in idx.iter().zip(w) {
        acc = acc + vals[*i] * wi;
    }
    acc
}

fn peak<T: Real>(rho: impl Iterator<Item = T>) -> T {
    rho.fold(T::zero(), |m, r| m.max(r))
}

/// A line of amplitudes with its derivative.
type Line<T> = (Vec<Complex<T>>, Vec<Complex<T>>);

/// Velocity `Im(psi* dpsi) / |psi|^2` of a scalar or spinor wave in 1D.
#[derive(Clone, Debug)]
pub struct Field1D<T = f64> {
    grid: Grid1D<T>,
    comps: Vec<Line<T>>,
    floor: T,
}

/// Resample `lines` onto a grid `refine` times finer (periodic axes only)
/// and return each line with its spectral derivative.
fn refined_lines<T: SpectralReal>(
    ops: &AxisOps<T>,
    lines: &[&[Complex<T>]],
    refine: usize,
) -> (Grid1D<T>, Vec<Line<T>>) {
    let grid = *ops.grid();
    if refine <= 1 || !ops.is_periodic() {
        return (grid, lines.iter().map(|l| (l.to_vec(), ops.derivative(l))).collect());
    }
    let fine = Grid1D::new(grid.x_min(), grid.x_max(), grid.len() * refine).expect("refined grid is valid");
    let fine_ops = AxisOps::periodic(fine);
    let comps = lines
        .iter()
        .map(|l| {
            let f = ops.refine(l, refine);
            let d = fine_ops.derivative(&f);
            (f, d)
        })
        .collect();
    (fine, comps)
}

impl<T: SpectralReal> Field1D<T> {
    /// Field of a scalar wave. With `refine > 1` the wave is first resampled
    /// spectrally onto a finer grid, which keeps the cubic interpolation
    /// accurate for fast phase oscillations.
    pub fn new(psi: &WaveFunction1D<T>, ops: &AxisOps<T>, refine: usize) -> Self {
        let floor = peak(psi.density().into_iter()) * T::lit(RHO_FLOOR);
        let (grid, comps) = refined_lines(ops, &[psi.amplitudes()], refine);
        Field1D { grid, comps, floor }
    }

    pub fn spinor(psi: &SpinorWaveFunction1D<T>, ops: &AxisOps<T>, refine: usize) -> Self {
        let floor = peak(psi.density().into_iter()) * T::lit(RHO_FLOOR);
        let (grid, comps) = refined_lines(ops, &[psi.up(), psi.down()], refine);
        Field1D { grid, comps, floor }
    }

    /// Velocities on the grid points (zero below the floor).
    pub fn on_grid(&self) -> Vec<T> {
        (0..self.grid.len())
            .map(|i| {
                let (mut rho, mut j) = (T::zero(), T::zero());
                for (a, d) in &self.comps {
                    rho += a[i].norm_sqr();
                    j += (a[i].conj() * d[i]).im;
                }
                if rho > self.floor {
                    j / rho
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    pub fn density_at(&self, x: T) -> T {
        let (idx, w) = stencil(&self.grid, x);
        self.comps.iter().fold(T::zero(), |acc, (a, _)| acc + interp(a, &idx, &w).norm_sqr())
    }
}

impl<T: SpectralReal> VelocityField<T, 1> for Field1D<T> {
    fn velocity(&self, p: [T; 1]) -> Option<[T; 1]> {
        let (idx, w) = stencil(&self.grid, p[0]);
        let (mut rho, mut j) = (T::zero(), T::zero());
        for (a, d) in &self.comps {
            let psi = interp(a, &idx, &w);
            let dpsi = interp(d, &idx, &w);
            rho += psi.norm_sqr();
            j += (psi.conj() * dpsi).im;
        }
        (rho > self.floor).then(|| [j / rho])
    }
}

/// Guidance field on the (x, q) plane. The q velocity carries the pointer
/// kinetic current divided by the pointer mass and, for a position-shift
/// coupling, the term `g(t) Pi_V(x)` from `g P Pi_V`.
#[derive(Clone, Debug)]
pub struct Field2D<T = f64> {
    grid_x: Grid1D<T>,
    grid_q: Grid1D<T>,
    psi: Vec<Complex<T>>,
    dx: Vec<Complex<T>>,
    dq: Vec<Complex<T>>,
    inv_mass_q: T,
    shift: Option<CouplingSpec<T>>,
    floor: T,
}

impl<T: SpectralReal> Field2D<T> {
    /// Field of `psi` under `cfg`; `refine` resamples the x axis as in
    /// [`Field1D::new`].
    pub fn new(
        psi: &WaveFunction2D<T>,
        ops_x: &AxisOps<T>,
        ops_q: &AxisOps<T>,
        cfg: &Hamiltonian2DConfig<T>,
        refine: usize,
    ) -> Self {
        let nx = psi.grid_x().len();
        let nq = psi.nq();
        let src = psi.amplitudes();
        let zero = Complex::new(T::zero(), T::zero());
        // resample and differentiate along x column by column
        let mut col = vec![zero; nx];
        let mut grid_x = *psi.grid_x();
        let mut amp = Vec::new();
        let mut dx = Vec::new();
        for iq in 0..nq {
            for ix in 0..nx {
                col[ix] = src[ix * nq + iq];
            }
            let (g, mut lines) = refined_lines(ops_x, &[&col], refine);
            let (f, d) = lines.pop().unwrap();
            if iq == 0 {
                grid_x = g;
                amp = vec![zero; g.len() * nq];
                dx = vec![zero; g.len() * nq];
            }
            for (ix, (a, b)) in f.into_iter().zip(d).enumerate() {
                amp[ix * nq + iq] = a;
                dx[ix * nq + iq] = b;
            }
        }
        let mut dq = Vec::with_capacity(amp.len());
        for row in amp.chunks(nq) {
            dq.extend(ops_q.derivative(row));
        }
        let floor = peak(src.iter().map(|z| z.norm_sqr())) * T::lit(RHO_FLOOR);
        Field2D {
            grid_x,
            grid_q: *psi.grid_q(),
            psi: amp,
            dx,
            dq,
            inv_mass_q: if cfg.kinetic_q { T::one() / cfg.pointer_mass } else { T::zero() },
            shift: cfg.coupling.filter(|c| c.kind == CouplingKind::PositionShift),
            floor,
        }
    }
}

fn indicator<T: Real>(x: T, (a, b): (T, T)) -> T {
    if x > a && x < b {
        T::one()
    } else if x == a || x == b {
        T::half()
    } else {
        T::zero()
    }
}

impl<T: SpectralReal> VelocityField<T, 2> for Field2D<T> {
    fn velocity(&self, p: [T; 2]) -> Option<[T; 2]> {
        let (ix, wx) = stencil(&self.grid_x, p[0]);
        let (iq, wq) = stencil(&self.grid_q, p[1]);
        let nq = self.grid_q.len();
        let zero = Complex::new(T::zero(), T::zero());
        let (mut psi, mut dx, mut dq) = (zero, zero, zero);
        for (a, &wa) in ix.iter().zip(&wx) {
            for (b, &wb) in iq.iter().zip(&wq) {
                let k = a * nq + b;
                let w = wa * wb;
                psi = psi + self.psi[k] * w;
                dx = dx + self.dx[k] * w;
                dq = dq + self.dq[k] * w;
            }
        }
        let rho = psi.norm_sqr();
        if !(rho > self.floor) {
            return None;
        }
        let c = psi.conj();
        Some([(c * dx).im / rho, (c * dq).im * self.inv_mass_q / rho])
    }

    fn drift(&self, t: T, p: [T; 2]) -> [T; 2] {
        match &self.shift {
            Some(c) => [T::zero(), c.rate(t) * indicator(p[0], c.region)],
            None => [T::zero(); 2],
        }
    }
}
