//! Exact kinematics of two counter-propagating rectangular packets, with
//! and without a pointer coupled in the left half.
//!
//! A particle covered by one packet moves with it; covered by both it rests.
//! The pointer branches of the two packets are uniform over `[0, W]`
//! (undisturbed) and `[fW, W + fW]` (shifted by the region V), and the
//! particle can only rest in the overlap if its pointer coordinate lies in
//! both supports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::Trajectory;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn of<T: Real>(x: T) -> Side {
        if x < T::zero() {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measurement<T = f64> {
    None,
    /// Orthogonal pointer branches; same as `Weak { f: 1 }`.
    Robust,
    /// Pointer shifted by `f W` in the branch that crossed V.
    Weak { f: T },
    /// Momentum kick: pointer branches coincide in position during transit.
    Delayed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealizedScenario<T = f64> {
    /// Packet length L.
    pub width: T,
    pub speed: T,
    /// Initial centers are -d and +d.
    pub d: T,
    /// Pointer wave length W.
    pub pointer_width: T,
    pub measurement: Measurement<T>,
    /// Which packets carry amplitude (left, right).
    pub present: (bool, bool),
}

impl<T: Real> IdealizedScenario<T> {
    pub fn new(width: T, speed: T, d: T, pointer_width: T, measurement: Measurement<T>) -> Result<Self> {
        let s = IdealizedScenario { width, speed, d, pointer_width, measurement, present: (true, true) };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > T::zero() && self.speed > T::zero() && self.pointer_width > T::zero()) {
            return Err(Error::Config("L, v and W must be positive".into()));
        }
        if !(self.d > self.width) {
            return Err(Error::Config(format!("packets must start disjoint: need d > L, got d={}, L={}", self.d, self.width)));
        }
        if let Measurement::Weak { f } = self.measurement {
            if !(f >= T::zero() && f <= T::one()) {
                return Err(Error::Config(format!("shift fraction must lie in [0, 1], got {f}")));
            }
        }
        if !self.present.0 && !self.present.1 {
            return Err(Error::Config("at least one packet must be present".into()));
        }
        Ok(())
    }

    /// Shift fraction of the measurement (robust counts as 1, delayed as 0
    /// since the position supports coincide).
    pub fn shift_fraction(&self) -> T {
        match self.measurement {
            Measurement::None | Measurement::Delayed => T::zero(),
            Measurement::Robust => T::one(),
            Measurement::Weak { f } => f,
        }
    }

    fn half(&self) -> T {
        self.width / T::two()
    }

    /// Support `[lo, hi]` of the packet starting on `side` at time `t`.
    pub fn packet_support(&self, side: Side, t: T) -> (T, T) {
        let h = self.half();
        let vt = self.speed * t;
        match side {
            Side::Left => (-self.d - h + vt, -self.d + h + vt),
            Side::Right => (self.d - h - vt, self.d + h - vt),
        }
    }

    /// First time the packets touch.
    pub fn overlap_onset(&self) -> T {
        (self.d - self.half()) / self.speed
    }

    /// Time after which the packets are disjoint again.
    pub fn overlap_end(&self) -> T {
        (self.d + self.half()) / self.speed
    }
}

/// Piecewise-linear path given by its corners; moves with `final_velocity`
/// after the last one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePath<T = f64> {
    pub corners: Vec<(T, T)>,
    pub final_velocity: T,
}

impl<T: Real> PiecewisePath<T> {
    pub fn at(&self, t: T) -> T {
        let k = self.corners.iter().rposition(|&(tc, _)| tc <= t).unwrap_or(0);
        let (t0, x0) = self.corners[k];
        let v = match self.corners.get(k + 1) {
            Some(&(t1, x1)) => (x1 - x0) / (t1 - t0),
            None => self.final_velocity,
        };
        x0 + v * (t - t0)
    }

    /// Times at which the velocity changes.
    pub fn events(&self) -> Vec<T> {
        self.corners[1..].iter().map(|c| c.0).collect()
    }

    pub fn sample(&self, times: &[T]) -> Trajectory<T> {
        let mut tr = Trajectory::new(1);
        for &t in times {
            tr.push(t, &[self.at(t)]);
        }
        tr
    }

    pub fn turned(&self) -> bool {
        let v0 = match self.corners.get(1) {
            Some(&(t1, x1)) => (x1 - self.corners[0].1) / (t1 - self.corners[0].0),
            None => self.final_velocity,
        };
        v0 * self.final_velocity < T::zero()
    }
}

/// Exact path of the particle starting at `x0` at t = 0 (no measurement).
pub fn crossing_trajectory<T: Real>(s: &IdealizedScenario<T>, x0: T) -> Result<PiecewisePath<T>> {
    s.validate()?;
    let h = s.half();
    let in_right = s.present.1 && (x0 - s.d).fabs() <= h;
    let in_left = s.present.0 && (x0 + s.d).fabs() <= h;
    if !in_right && !in_left {
        return Err(Error::Domain(format!("start {x0} lies outside both packets")));
    }
    let both = s.present.0 && s.present.1;
    if !both {
        let v = if in_left { s.speed } else { -s.speed };
        return Ok(PiecewisePath { corners: vec![(T::zero(), x0)], final_velocity: v });
    }
    // solve the right-start case and mirror the left one
    let (y0, sign) = if in_right { (x0, T::one()) } else { (-x0, -T::one()) };
    let v = s.speed;
    let t1 = (y0 + s.d - h) / (T::two() * v);
    let y1 = y0 - v * t1;
    let t2 = (s.d + h - y1) / v;
    Ok(PiecewisePath {
        corners: vec![(T::zero(), sign * y0), (t1, sign * y1), (t2, sign * y1)],
        final_velocity: sign * v,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointerMotion {
    None,
    /// Moves while the particle branch crosses V.
    Immediate,
    /// Moves only once the particle packets have overlapped.
    AfterOverlap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord<T = f64> {
    pub started_side: Side,
    pub q0: T,
    pub turned: bool,
    pub final_side: Side,
    pub q_final: T,
    pub pointer_motion: PointerMotion,
}

/// Fate of a configuration point that starts on `side0` with pointer
/// coordinate `q0`. For a left start `q0` is given in the shifted branch,
/// `[fW, W + fW]`.
pub fn measured_outcome<T: Real>(s: &IdealizedScenario<T>, side0: Side, q0: T) -> Result<OutcomeRecord<T>> {
    s.validate()?;
    let w = s.pointer_width;
    let delta = s.shift_fraction() * w;
    let (lo, hi) = match side0 {
        Side::Right => (T::zero(), w),
        Side::Left => (delta, w + delta),
    };
    if !(q0 >= lo && q0 <= hi) {
        return Err(Error::Domain(format!("q0 = {q0} outside the branch support [{lo}, {hi}]")));
    }
    // boundary points belong to the overlap of the supports
    let turned = match s.measurement {
        Measurement::None | Measurement::Delayed => true,
        Measurement::Robust | Measurement::Weak { .. } => q0 >= delta && q0 <= w,
    };
    let final_side = if turned { side0 } else { side0.opposite() };
    let pointer_motion = match (s.measurement, side0) {
        (Measurement::None, _) => PointerMotion::None,
        (Measurement::Delayed, Side::Right) => PointerMotion::AfterOverlap,
        (Measurement::Delayed, Side::Left) => PointerMotion::Immediate,
        (_, Side::Left) if delta > T::zero() => PointerMotion::Immediate,
        _ => PointerMotion::None,
    };
    Ok(OutcomeRecord { started_side: side0, q0, turned, final_side, q_final: q0, pointer_motion })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StatsMode {
    Exact,
    MonteCarlo { n: usize, seed: u64 },
}

/// Post-selection statistics of the uniform ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub f: f64,
    /// Ensemble size before post-selection (0 in exact mode).
    pub n: usize,
    pub select: Side,
    pub fraction_started_right: f64,
    /// Probability mass (exact) or counts (Monte Carlo) of the
    /// post-selected final pointer positions over `hist_range`.
    pub pointer_hist: Vec<f64>,
    pub hist_range: (f64, f64),
    /// Smallest and largest post-selected final pointer position.
    pub pointer_support: (f64, f64),
    pub selected_started_right: f64,
    pub selected_started_left: f64,
    pub exact_flag: bool,
    pub seed: Option<u64>,
}

pub const HIST_BINS: usize = 22;

/// Fraction of post-selected members that started on the right, and the
/// final pointer distribution of the post-selected set.
pub fn postselection_stats<T: Real>(s: &IdealizedScenario<T>, select: Side, mode: StatsMode) -> Result<EnsembleStats> {
    s.validate()?;
    let f = match s.measurement {
        Measurement::Weak { f } => f.to_f64(),
        _ => return Err(Error::Config("post-selection statistics need a weak measurement".into())),
    };
    if f <= 0.0 || f >= 1.0 {
        return Err(Error::Config(format!(
            "f = {f} is degenerate: every member turns (f = 0) or none does (f = 1)"
        )));
    }
    let w = s.pointer_width.to_f64();
    let range = (0.0, w * (1.0 + f));
    let bin = |q: f64| (((q - range.0) / (range.1 - range.0) * HIST_BINS as f64) as usize).min(HIST_BINS - 1);
    match mode {
        StatsMode::Exact => {
            // each side has probability 1/2, pointer uniform on its branch
            let (right, left, support) = match select {
                Side::Right => ((1.0 - f) / 2.0, f / 2.0, (f * w, w * (1.0 + f))),
                Side::Left => (f / 2.0, (1.0 - f) / 2.0, (0.0, w)),
            };
            let total = right + left;
            let mut hist = vec![0.0; HIST_BINS];
            let width = (range.1 - range.0) / HIST_BINS as f64;
            for (k, h) in hist.iter_mut().enumerate() {
                let (a, b) = (range.0 + k as f64 * width, range.0 + (k + 1) as f64 * width);
                let overlap = (b.min(support.1) - a.max(support.0)).max(0.0);
                *h = overlap / (support.1 - support.0);
            }
            Ok(EnsembleStats {
                f,
                n: 0,
                select,
                fraction_started_right: right / total,
                pointer_hist: hist,
                hist_range: range,
                pointer_support: support,
                selected_started_right: right,
                selected_started_left: left,
                exact_flag: true,
                seed: None,
            })
        }
        StatsMode::MonteCarlo { n, seed } => {
            if n == 0 {
                return Err(Error::Config("Monte Carlo mode needs n >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let delta = f * w;
            let (mut right, mut left) = (0usize, 0usize);
            let mut hist = vec![0.0; HIST_BINS];
            let mut support = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..n {
                let side = if rng.gen::<bool>() { Side::Right } else { Side::Left };
                let u: f64 = rng.gen();
                let q0 = match side {
                    Side::Right => u * w,
                    Side::Left => delta + u * w,
                };
                let out = measured_outcome(s, side, T::lit(q0))?;
                if out.final_side != select {
                    continue;
                }
                match side {
                    Side::Right => right += 1,
                    Side::Left => left += 1,
                }
                let q = out.q_final.to_f64();
                hist[bin(q)] += 1.0;
                support = (support.0.min(q), support.1.max(q));
            }
            let total = (right + left).max(1) as f64;
            Ok(EnsembleStats {
                f,
                n,
                select,
                fraction_started_right: right as f64 / total,
                pointer_hist: hist,
                hist_range: range,
                pointer_support: support,
                selected_started_right: right as f64 / n as f64,
                selected_started_left: left as f64 / n as f64,
                exact_flag: false,
                seed: Some(seed),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1() -> IdealizedScenario<f64> {
        IdealizedScenario::new(1.0, 1.0, 3.0, 1.0, Measurement::None).unwrap()
    }

    // brute-force oracle: RK4 on the piecewise velocity field itself
    fn brute_force(s: &IdealizedScenario<f64>, x0: f64, t_end: f64) -> f64 {
        let vel = |t: f64, x: f64| {
            let (a, b) = s.packet_support(Side::Left, t);
            let (c, d) = s.packet_support(Side::Right, t);
            let l = s.present.0 && x >= a && x <= b;
            let r = s.present.1 && x >= c && x <= d;
            match (l, r) {
                (true, false) => s.speed,
                (false, true) => -s.speed,
                _ => 0.0,
            }
        };
        let n = 400_000;
        let h = t_end / n as f64;
        let mut x = x0;
        for i in 0..n {
            let t = i as f64 * h;
            let k1 = vel(t, x);
            let k2 = vel(t + h / 2.0, x + h / 2.0 * k1);
            let k3 = vel(t + h / 2.0, x + h / 2.0 * k2);
            let k4 = vel(t + h, x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x
    }

    #[test]
    fn right_center_start_stops_then_follows_the_left_packet() {
        let s = fig1();
        let p = crossing_trajectory(&s, 3.0).unwrap();
        // stops when the left leading edge (-2.5 + t) meets 3 - t
        assert_eq!(p.corners[1], (2.75, 0.25));
        // resumes when the right trailing edge (3.5 - t) passes 0.25
        assert_eq!(p.corners[2], (3.25, 0.25));
        assert_eq!(p.final_velocity, 1.0);
        assert!(p.turned());
        assert!((p.at(10.0) - 7.0).abs() < 1e-12);
        assert!((brute_force(&s, 3.0, 10.0) - p.at(10.0)).abs() < 1e-4);
    }

    #[test]
    fn single_packet_moves_uniformly() {
        let s = IdealizedScenario { present: (false, true), ..fig1() };
        let p = crossing_trajectory(&s, 3.2).unwrap();
        assert!(!p.turned());
        assert!((p.at(4.0) - (3.2 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn start_outside_packets_is_rejected() {
        assert!(matches!(crossing_trajectory(&fig1(), 0.0), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn path_matches_brute_force(x0 in 2.5f64..3.5, left in any::<bool>()) {
            let s = fig1();
            let x0 = if left { -x0 } else { x0 };
            let p = crossing_trajectory(&s, x0).unwrap();
            prop_assert!((brute_force(&s, x0, 8.0) - p.at(8.0)).abs() < 1e-4);
            prop_assert_eq!(Side::of(p.at(8.0)), Side::of(x0));
        }

        #[test]
        fn mirror_starts_give_mirror_paths(x0 in 2.5f64..3.5, t in 0.0f64..10.0) {
            let s = fig1();
            let a = crossing_trajectory(&s, x0).unwrap();
            let b = crossing_trajectory(&s, -x0).unwrap();
            prop_assert!((a.at(t) + b.at(t)).abs() < 1e-12);
        }

        #[test]
        fn paths_never_cross(a in 2.5f64..3.5, b in 2.5f64..3.5, t in 0.0f64..10.0) {
            let s = fig1();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let pl = crossing_trajectory(&s, lo).unwrap();
            let ph = crossing_trajectory(&s, hi).unwrap();
            prop_assert!(pl.at(t) <= ph.at(t));
        }
    }

    fn weak(f: f64) -> IdealizedScenario<f64> {
        IdealizedScenario::new(1.0, 1.0, 3.0, 1.0, Measurement::Weak { f }).unwrap()
    }

    #[test]
    fn measured_outcomes_follow_the_branch_supports() {
        let s = weak(0.1);
        let a = measured_outcome(&s, Side::Right, 0.5).unwrap();
        assert!(a.turned && a.final_side == Side::Right && a.q_final == 0.5);
        assert_eq!(a.pointer_motion, PointerMotion::None);
        let b = measured_outcome(&s, Side::Left, 1.05).unwrap();
        assert!(!b.turned && b.final_side == Side::Right);
        assert!(b.q_final >= 0.1 && b.q_final <= 1.1);
        let c = measured_outcome(&s, Side::Right, 0.05).unwrap();
        assert!(!c.turned && c.final_side == Side::Left);

        let robust = IdealizedScenario { measurement: Measurement::Robust, ..s };
        let r = measured_outcome(&robust, Side::Right, 0.4).unwrap();
        assert!(!r.turned && r.final_side == Side::Left && r.q_final == 0.4);

        let delayed = IdealizedScenario { measurement: Measurement::Delayed, ..s };
        let d = measured_outcome(&delayed, Side::Right, 0.4).unwrap();
        assert!(d.turned && d.final_side == Side::Right);
        assert_eq!(d.pointer_motion, PointerMotion::AfterOverlap);

        assert!(measured_outcome(&s, Side::Left, 0.05).is_err());
    }

    #[test]
    fn exact_statistics() {
        let st = postselection_stats(&weak(0.1), Side::Right, StatsMode::Exact).unwrap();
        assert!((st.fraction_started_right - 0.9).abs() < 1e-15);
        assert_eq!(st.pointer_support, (0.1, 1.1));
        assert!((st.pointer_hist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // nothing below 0.1 W: the first two of 22 bins over [0, 1.1] hold
        // [0, 0.1]
        assert_eq!(st.pointer_hist[0] + st.pointer_hist[1], 0.0);
        let near_robust = postselection_stats(&weak(0.999_999), Side::Right, StatsMode::Exact).unwrap();
        assert!(near_robust.fraction_started_right < 1e-5);
        assert!(postselection_stats(&weak(1.0), Side::Right, StatsMode::Exact).is_err());
        let robust = IdealizedScenario { measurement: Measurement::Robust, ..weak(0.1) };
        assert!(measured_outcome(&robust, Side::Right, 0.3).unwrap().final_side == Side::Left);
    }

    #[test]
    fn cases_are_conserved() {
        for f in [0.1, 0.25, 0.5, 0.8] {
            let r = postselection_stats(&weak(f), Side::Right, StatsMode::Exact).unwrap();
            let l = postselection_stats(&weak(f), Side::Left, StatsMode::Exact).unwrap();
            let total = r.selected_started_right + r.selected_started_left + l.selected_started_right + l.selected_started_left;
            assert!((total - 1.0).abs() < 1e-15);
            assert!((r.selected_started_right + l.selected_started_right - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn monte_carlo_converges_at_the_binomial_rate() {
        let f = 0.25;
        for n in [1_000, 10_000, 100_000] {
            let st = postselection_stats(&weak(f), Side::Right, StatsMode::MonteCarlo { n, seed: 42 }).unwrap();
            let selected = (st.selected_started_right + st.selected_started_left) * n as f64;
            let sigma = (f * (1.0 - f) / selected).sqrt();
            assert!((st.fraction_started_right - 0.75).abs() < 4.0 * sigma, "n={n}: {}", st.fraction_started_right);
            if n == 100_000 {
                assert!((st.fraction_started_right - 0.75).abs() < 0.005);
            }
            assert!(st.pointer_support.0 >= 0.25 && st.pointer_support.1 <= 1.25);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let m = StatsMode::MonteCarlo { n: 5000, seed: 9 };
        assert_eq!(
            postselection_stats(&weak(0.1), Side::Right, m).unwrap(),
            postselection_stats(&weak(0.1), Side::Right, m).unwrap()
        );
    }

    #[test]
    fn post_selected_pointer_is_the_shifted_uniform() {
        let st = postselection_stats(&weak(0.1), Side::Right, StatsMode::MonteCarlo { n: 200_000, seed: 1 }).unwrap();
        let total: f64 = st.pointer_hist.iter().sum();
        // bins of width 0.05 over [0, 1.1]; uniform on [0.1, 1.1] gives 1/20 each
        for (k, h) in st.pointer_hist.iter().enumerate() {
            let p = h / total;
            if k < 2 {
                assert_eq!(p, 0.0);
            } else {
                assert!((p - 0.05).abs() < 0.004, "bin {k}: {p}");
            }
        }
    }
}
