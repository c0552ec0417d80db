use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{classify, Check, RunRecord, ScenarioReport};
use super::setup::{run_2d, CrossingSetup, PointerSetup, PointerShape};
use crate::error::{Error, Result};
use crate::guidance::{integrate_ensemble, ks_statistic, ordering_preserved, sample_initial, EnsembleSpec, Integration, SampleSource, Sampling};
use crate::idealized::{crossing_trajectory, IdealizedScenario, Measurement, Side};
use crate::propagate::{evolve_1d_series, CouplingKind, CouplingSpec, GProfile};
use crate::qfield::{WaveFunction1D, WaveFunction2D};

pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Fraction of the pointer spread that counts as pointer motion.
pub const ONSET_FRACTION: f64 = 0.01;

/// CDF of `|psi|^2`, trapezoidal between grid points.
pub fn density_cdf(psi: &WaveFunction1D) -> impl Fn(f64) -> f64 {
    let rho = psi.density();
    let g = *psi.grid();
    let mut cum = vec![0.0];
    for w in rho.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + 0.5 * (w[0] + w[1]));
    }
    let total = *cum.last().unwrap();
    move |x: f64| {
        let s = (x - g.x_min()) / g.dx();
        if s <= 0.0 {
            return 0.0;
        }
        let i = s.floor() as usize;
        if i + 1 >= cum.len() {
            return 1.0;
        }
        let u = s - i as f64;
        // exact integral of the linear interpolant over the partial cell
        let part = rho[i] * u + 0.5 * (rho[i + 1] - rho[i]) * u * u;
        (cum[i] + part) / total
    }
}

fn idealized_for(c: &CrossingSetup, measurement: Measurement) -> Result<IdealizedScenario> {
    // only the topology is compared, so any disjoint geometry will do
    let mut s = IdealizedScenario::new(2.0, c.speed, 3.0, 1.0, measurement)?;
    s.present = (c.left_weight > 0.0, c.right_weight > 0.0);
    Ok(s)
}

fn side_of(x: f64) -> Side {
    Side::of(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub crossing: CrossingSetup,
    pub starts: Vec<f64>,
    /// Extra paths sampled from the initial density for the equivariance
    /// and ordering checks (not stored).
    pub ensemble: usize,
    /// Snapshot stride for the ensemble series. Coarse snapshots blur the
    /// near-node velocity spikes at the crossing and let paths merge.
    pub ensemble_stride: usize,
    pub seed: u64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Fig1Config { crossing: CrossingSetup::default(), starts: vec![19.2, -19.2], ensemble: 0, ensemble_stride: 2, seed: 1 }
    }
}

pub fn run_fig1(cfg: &Fig1Config) -> Result<ScenarioReport> {
    let c = &cfg.crossing;
    c.validate()?;
    let psi = c.initial()?;
    let series = evolve_1d_series(&psi, None, 0.0, c.t_end, c.time_step()?, c.stride)?;
    let norm0 = psi.norm_sqr();
    let drift = series.fields.iter().map(|f| (f.norm_sqr() / norm0 - 1.0).abs()).fold(0.0, f64::max);
    let opts = Integration::default();
    let paths = integrate_ensemble(&series, &cfg.starts, opts)?;
    let starts: Vec<Vec<f64>> = cfg.starts.iter().map(|&x| vec![x]).collect();
    let (runs, kept) = classify(&starts, paths, 0.0);

    let ideal = idealized_for(c, Measurement::None)?;
    let mut agree = true;
    for r in &runs {
        let xi = r.start[0].signum() * ideal.d;
        let expect = crossing_trajectory(&ideal, xi)?;
        let final_side = side_of(expect.at(ideal.overlap_end() * 2.0));
        agree &= r.turned == Some(expect.turned()) && r.final_side == Some(final_side);
    }
    let mut checks = vec![
        Check::below("norm_drift", drift, NORM_DRIFT_LIMIT),
        Check::flag("matches_idealized_topology", agree),
    ];
    let mut stats = json!({});
    if cfg.ensemble > 0 {
        let spec = EnsembleSpec::new(cfg.ensemble, cfg.seed, Sampling::Density)?;
        let xs = sample_initial(SampleSource::Wave(&psi), &spec)?;
        if cfg.ensemble_stride == 0 {
            return Err(Error::Config("ensemble stride must be positive".into()));
        }
        let dense = evolve_1d_series(&psi, None, 0.0, c.t_end, c.time_step()?, cfg.ensemble_stride)?;
        let ens = integrate_ensemble(&dense, &xs, opts)?;
        let halted = ens.iter().filter(|p| p.is_err()).count();
        let ens: Vec<_> = ens.into_iter().filter_map(|p| p.ok()).collect();
        let finals: Vec<f64> = ens.iter().map(|p| p.last()[0]).collect();
        let ks = ks_statistic(&finals, density_cdf(dense.last().unwrap()));
        let ordered = ordering_preserved(&ens);
        checks.push(Check::below("equivariance_ks", ks, 0.02));
        checks.push(Check::flag("non_crossing", ordered));
        stats = json!({ "ensemble": cfg.ensemble, "halted": halted, "ks": ks, "ordering_preserved": ordered });
    }
    Ok(ScenarioReport {
        name: "fig1".into(),
        config: serde_json::to_value(cfg)?,
        overlap_onset: c.overlap_onset()?,
        onset_threshold: 0.0,
        norm_drift: drift,
        runs,
        stats,
        checks,
        paths: kept,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub crossing: CrossingSetup,
    pub pointer: PointerSetup,
    pub region: (f64, f64),
    pub pulse: (f64, f64),
    /// Total pointer shift delivered to a branch inside the region.
    pub strength: f64,
    pub starts: Vec<[f64; 2]>,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Fig2Config {
            crossing: CrossingSetup::default(),
            pointer: PointerSetup::default(),
            region: (-38.0, -1.5),
            pulse: (0.05, 0.3),
            strength: 10.0,
            starts: vec![[19.2, 0.0], [-19.2, 0.0]],
        }
    }
}

pub(super) fn pointer_delta(p: &PointerSetup) -> Result<f64> {
    match p.shape {
        PointerShape::Gaussian { delta } => Ok(delta),
        PointerShape::Rectangular { .. } => Err(Error::Config("this scenario needs a Gaussian pointer".into())),
    }
}

/// Shared 2D run: product state, one coupling, tracked starts.
pub(super) fn coupled_run(
    c: &CrossingSetup,
    pointer: &PointerSetup,
    coupling: CouplingSpec,
    starts: &[[f64; 2]],
    keep_marginals: bool,
) -> Result<(super::setup::Run2D, Vec<Vec<f64>>)> {
    c.validate()?;
    let psi = WaveFunction2D::product(&c.initial()?, &pointer.initial()?);
    let cfg = pointer.hamiltonian().with_coupling(coupling);
    let dt = c.time_step()?.min(pointer.time_step()?);
    let opts = Integration { refine: 2, ..Integration::default() };
    let run = run_2d(psi, cfg, c.t_end, dt, c.stride, starts, opts, keep_marginals)?;
    Ok((run, starts.iter().map(|s| s.to_vec()).collect()))
}

pub fn run_fig2(cfg: &Fig2Config) -> Result<ScenarioReport> {
    let delta = pointer_delta(&cfg.pointer)?;
    if cfg.strength != 0.0 && cfg.strength < 10.0 * delta {
        return Err(Error::Config(format!(
            "shift {} is below ten pointer widths ({})",
            cfg.strength,
            10.0 * delta
        )));
    }
    let coupling = CouplingSpec::new(
        CouplingKind::PositionShift,
        cfg.region,
        GProfile::square(cfg.pulse.0, cfg.pulse.1)?,
        cfg.strength,
    );
    let (run, starts) = coupled_run(&cfg.crossing, &cfg.pointer, coupling, &cfg.starts, false)?;
    let threshold = ONSET_FRACTION * cfg.pointer.spread();
    let (runs, kept) = classify(&starts, run.paths, threshold);

    let right: Vec<&RunRecord> = runs.iter().filter(|r| r.started_side == Side::Right).collect();
    let left: Vec<&RunRecord> = runs.iter().filter(|r| r.started_side == Side::Left).collect();
    let still = right.iter().map(|r| r.pointer_max_shift.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let shift_err = left
        .iter()
        .map(|r| (r.pointer_final_shift.unwrap_or(f64::INFINITY) - cfg.strength).abs())
        .fold(0.0, f64::max);
    let mut checks = vec![
        Check::below("norm_drift", run.norm_drift, NORM_DRIFT_LIMIT),
        Check::flag("start_right_not_turned", right.iter().all(|r| r.turned == Some(false))),
        Check::below("start_right_pointer_still", still, 0.05 * delta),
    ];
    if cfg.strength > 0.0 {
        checks.push(Check::below("start_left_pointer_shift_error", shift_err, 0.1 * cfg.strength));
    }
    Ok(ScenarioReport {
        name: "fig2".into(),
        config: serde_json::to_value(cfg)?,
        overlap_onset: cfg.crossing.overlap_onset()?,
        onset_threshold: threshold,
        norm_drift: run.norm_drift,
        runs,
        stats: json!({ "start_right_max_pointer_shift": still, "start_left_shift_error": shift_err }),
        checks,
        paths: kept,
    })
}
