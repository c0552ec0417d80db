use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::fig::{coupled_run, pointer_delta, NORM_DRIFT_LIMIT, ONSET_FRACTION};
use super::report::{classify, Check, RunRecord, ScenarioReport};
use super::setup::{CrossingSetup, PointerSetup, PointerShape};
use crate::error::{Error, Result};
use crate::guidance::sample_density_2d;
use crate::idealized::{measured_outcome, postselection_stats, IdealizedScenario, Measurement, Side, StatsMode, HIST_BINS};
use crate::propagate::{step_plan, CouplingKind, CouplingSpec, Evolver1D, GProfile};
use crate::qfield::{WaveFunction1D, WaveFunction2D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Config {
    /// Shift of the left branch as a fraction of the pointer width.
    pub f: f64,
    /// Ensemble size.
    pub n: usize,
    pub seed: u64,
    pub crossing: CrossingSetup,
    pub pointer_width: f64,
    pub smoothing: f64,
    pub nq: usize,
    /// Pointer grid margin beyond the reachable support.
    pub q_pad: f64,
    pub region: (f64, f64),
    pub pulse: (f64, f64),
    /// Distance from a branch edge inside which runs are not compared with
    /// the idealized model.
    pub edge_margin: f64,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Fig3Config {
            f: 0.1,
            n: 2000,
            seed: 7,
            crossing: CrossingSetup::default(),
            pointer_width: 4.0,
            smoothing: 0.2,
            nq: 256,
            q_pad: 1.5,
            region: (-38.0, -1.5),
            pulse: (0.05, 0.3),
            edge_margin: 0.2,
        }
    }
}

impl Fig3Config {
    pub fn pointer(&self) -> PointerSetup {
        let w = self.pointer_width;
        PointerSetup {
            q_min: -self.q_pad,
            q_max: w * (1.0 + self.f) + self.q_pad,
            nq: self.nq,
            shape: PointerShape::Rectangular { width: w, smoothing: self.smoothing },
            mass: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0 && self.f < 1.0) {
            return Err(Error::Config(format!("shift fraction must lie in (0, 1), got {}", self.f)));
        }
        if self.n == 0 {
            return Err(Error::Config("ensemble needs at least one member".into()));
        }
        if !(self.edge_margin >= 0.0) {
            return Err(Error::Config("edge margin must be non-negative".into()));
        }
        self.crossing.validate()
    }
}

/// Binomial standard error of a fraction `p` over `n` draws.
fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

pub fn run_fig3_ensemble(cfg: &Fig3Config) -> Result<ScenarioReport> {
    cfg.validate()?;
    let w = cfg.pointer_width;
    let shift = cfg.f * w;
    let pointer = cfg.pointer();
    let coupling = CouplingSpec::new(
        CouplingKind::PositionShift,
        cfg.region,
        GProfile::square(cfg.pulse.0, cfg.pulse.1)?,
        shift,
    );
    let psi = WaveFunction2D::product(&cfg.crossing.initial()?, &pointer.initial()?);
    let starts = sample_density_2d(&psi, cfg.n, cfg.seed);
    let (run, start_vecs) = coupled_run(&cfg.crossing, &pointer, coupling, &starts, false)?;
    let threshold = ONSET_FRACTION * pointer.spread();
    let (runs, kept) = classify(&start_vecs, run.paths, threshold);

    let ideal = IdealizedScenario::new(2.0, cfg.crossing.speed, 3.0, w, Measurement::Weak { f: cfg.f })?;
    let edges = [0.0, shift, w, w + shift];
    let (mut compared, mut agreed) = (0usize, 0usize);
    for r in runs.iter().filter(|r| r.halted.is_none()) {
        let q = match r.started_side {
            Side::Right => r.start[1],
            Side::Left => r.start[1] + shift,
        };
        if edges.iter().any(|e| (q - e).abs() < cfg.edge_margin) {
            continue;
        }
        let Ok(expect) = measured_outcome(&ideal, r.started_side, q) else { continue };
        compared += 1;
        if r.turned == Some(expect.turned) && r.final_side == Some(expect.final_side) {
            agreed += 1;
        }
    }
    let agreement = agreed as f64 / compared.max(1) as f64;

    let selected: Vec<&RunRecord> = runs.iter().filter(|r| r.final_side == Some(Side::Right)).collect();
    let from_right = selected.iter().filter(|r| r.started_side == Side::Right).count();
    let fraction = from_right as f64 / selected.len().max(1) as f64;
    let sigma = binomial_sigma(1.0 - cfg.f, selected.len());
    let q_final: Vec<f64> = selected
        .iter()
        .map(|r| r.start[1] + r.pointer_final_shift.unwrap_or(0.0))
        .collect();
    let below = q_final.iter().filter(|&&q| q < shift - cfg.smoothing).count();
    let exact = postselection_stats(&ideal, Side::Right, StatsMode::Exact)?;
    let (lo, hi) = exact.hist_range;
    let mut hist = vec![0usize; HIST_BINS];
    for &q in &q_final {
        let k = ((q - lo) / (hi - lo) * HIST_BINS as f64).floor();
        if k >= 0.0 && (k as usize) < HIST_BINS {
            hist[k as usize] += 1;
        }
    }
    let halted = runs.iter().filter(|r| r.halted.is_some()).count();
    let n_selected = selected.len();
    let checks = vec![
        Check::below("norm_drift", run.norm_drift, NORM_DRIFT_LIMIT),
        Check::below("postselected_fraction_deviation", (fraction - (1.0 - cfg.f)).abs(), 3.0 * sigma),
        Check::flag("no_postselected_pointer_below_shift", below == 0),
        Check::above("idealized_agreement", agreement, 0.99 - 1e-12),
    ];
    Ok(ScenarioReport {
        name: "fig3_ensemble".into(),
        config: serde_json::to_value(cfg)?,
        overlap_onset: cfg.crossing.overlap_onset()?,
        onset_threshold: threshold,
        norm_drift: run.norm_drift,
        runs,
        stats: json!({
            "f": cfg.f,
            "n": cfg.n,
            "seed": cfg.seed,
            "halted": halted,
            "postselected": n_selected,
            "fraction_started_right": fraction,
            "expected_fraction": exact.fraction_started_right,
            "binomial_sigma": sigma,
            "pointer_hist": hist,
            "hist_range": [lo, hi],
            "expected_pointer_hist": exact.pointer_hist,
            "postselected_below_shift": below,
            "compared": compared,
            "agreement": agreement,
        }),
        checks,
        paths: kept,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Config {
    pub crossing: CrossingSetup,
    pub pointer: PointerSetup,
    pub region: (f64, f64),
    pub pulse: (f64, f64),
    /// Pointer momentum imparted to a branch inside the region.
    pub kick: f64,
    pub starts: Vec<[f64; 2]>,
    /// Largest L1 change of the pointer density allowed before the packets
    /// overlap.
    pub transit_limit: f64,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Fig4Config {
            crossing: CrossingSetup {
                x_min: -64.0,
                x_max: 64.0,
                nx: 2048,
                center: 24.0,
                width: 4.0,
                t_end: 3.0,
                ..CrossingSetup::default()
            },
            pointer: PointerSetup {
                q_min: -6.0,
                q_max: 6.0,
                nq: 64,
                shape: PointerShape::Gaussian { delta: 1.0 },
                mass: Some(50.0),
            },
            region: (-62.0, -1.5),
            pulse: (0.30, 0.36),
            kick: 1.5,
            starts: vec![[24.0, 0.0], [-24.0, 0.0]],
            transit_limit: 0.01,
        }
    }
}

fn l1(a: &[f64], b: &[f64], dq: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dq
}

impl Fig4Config {
    /// Predicted L1 change of the pointer density at the overlap onset:
    /// the left branch (weight from the packet weights) carries a pointer
    /// kicked at the start of the pulse.
    pub fn transit_change(&self, onset: f64) -> Result<f64> {
        let grid = self.pointer.grid()?;
        let phi = self.pointer.initial()?;
        let mass = self.pointer.mass.unwrap_or(f64::INFINITY);
        let evolve = |p: &WaveFunction1D, t: f64| -> Result<WaveFunction1D> {
            if !mass.is_finite() || t <= 0.0 {
                return Ok(p.clone());
            }
            // a free pointer of mass M over t matches unit mass over t / M
            let tau = t / mass;
            let (steps, dt) = step_plan(tau, tau / 64.0)?;
            let mut ev = Evolver1D::new(p.clone(), None, 0.0, dt)?;
            for _ in 0..steps {
                ev.step()?;
            }
            Ok(ev.into_state())
        };
        let t0 = self.pulse.0.min(onset);
        let base = evolve(&phi, onset)?;
        let before = evolve(&phi, t0)?;
        let kicked = WaveFunction1D::new(
            grid,
            before
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(i, z)| z * Complex::from_polar(1.0, -self.kick * grid.x(i)))
                .collect(),
        )?;
        let kicked = evolve(&kicked, onset - t0)?;
        let (wl, wr) = (self.crossing.left_weight.powi(2), self.crossing.right_weight.powi(2));
        let mixed: Vec<f64> = base
            .density()
            .iter()
            .zip(kicked.density())
            .map(|(b, k)| (wr * b + wl * k) / (wl + wr))
            .collect();
        Ok(l1(&mixed, &phi.density(), grid.dx()))
    }
}

pub fn run_fig4_delayed(cfg: &Fig4Config) -> Result<ScenarioReport> {
    let delta = pointer_delta(&cfg.pointer)?;
    cfg.crossing.validate()?;
    let onset = cfg.crossing.overlap_onset()?;
    let predicted = match onset {
        Some(t) if cfg.kick != 0.0 => cfg.transit_change(t)?,
        _ => 0.0,
    };
    if predicted >= cfg.transit_limit {
        return Err(Error::Config(format!(
            "kick {} changes the pointer density by {predicted:.4} before the packets overlap (limit {})",
            cfg.kick, cfg.transit_limit
        )));
    }
    let coupling = CouplingSpec::new(
        CouplingKind::MomentumKick,
        cfg.region,
        GProfile::square(cfg.pulse.0, cfg.pulse.1)?,
        cfg.kick,
    );
    let (run, starts) = coupled_run(&cfg.crossing, &cfg.pointer, coupling, &cfg.starts, true)?;
    let sigma_q = cfg.pointer.spread();
    let threshold = ONSET_FRACTION * sigma_q;
    let dq = cfg.pointer.grid()?.dx();
    let marginal0 = &run.snapshots[0].1;
    let measured = onset
        .and_then(|t| run.snapshots.iter().find(|(s, _)| *s >= t - 1e-12))
        .map_or(0.0, |(_, m)| l1(m, marginal0, dq));
    let (runs, kept) = classify(&starts, run.paths, threshold);

    let right: Vec<&RunRecord> = runs.iter().filter(|r| r.started_side == Side::Right).collect();
    let never_in_v = right.iter().all(|r| r.x_min.is_some_and(|x| x > cfg.region.1));
    let turned_right = right.iter().all(|r| r.turned == Some(true) && r.final_side == Some(Side::Right));
    let still_before = right.iter().all(|r| match (r.pointer_onset, onset) {
        (Some(t), Some(o)) => t >= o,
        (None, _) => true,
        (Some(_), None) => false,
    });
    let later = right.iter().map(|r| r.pointer_max_shift.unwrap_or(0.0)).fold(f64::INFINITY, f64::min);
    let mut checks = vec![
        Check::below("norm_drift", run.norm_drift, NORM_DRIFT_LIMIT),
        Check::below("transit_pointer_density_change", measured, cfg.transit_limit),
        Check::flag("start_right_never_enters_region", never_in_v),
        Check::flag("start_right_turned_final_right", turned_right),
        Check::flag("start_right_pointer_still_before_overlap", still_before),
    ];
    if cfg.kick != 0.0 {
        checks.push(Check::above("start_right_pointer_moves_later", later, 0.05 * sigma_q));
    }
    let left: Vec<_> = runs
        .iter()
        .filter(|r| r.started_side == Side::Left)
        .map(|r| json!({ "turned": r.turned, "final_side": r.final_side, "pointer_max_shift": r.pointer_max_shift }))
        .collect();
    Ok(ScenarioReport {
        name: "fig4_delayed".into(),
        config: serde_json::to_value(cfg)?,
        overlap_onset: onset,
        onset_threshold: threshold,
        norm_drift: run.norm_drift,
        runs,
        stats: json!({
            "pointer_delta": delta,
            "sigma_q": sigma_q,
            "predicted_transit_change": predicted,
            "measured_transit_change": measured,
            "start_right_min_pointer_max_shift": later,
            "start_left": left,
        }),
        checks,
        paths: kept,
    })
}
