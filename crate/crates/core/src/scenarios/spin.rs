use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::fig::NORM_DRIFT_LIMIT;
use super::report::{classify, Check, ScenarioReport};
use crate::error::{Error, Result};
use crate::guidance::{integrate_spinor_ensemble, sample_initial, EnsembleSpec, Integration, SampleSource, Sampling, Trajectory};
use crate::propagate::{evolve_spinor_series, kinetic_dt, GProfile, SpinKick};
use crate::qfield::{build_packet, Grid1D, PacketSpec, SpinorWaveFunction1D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SternGerlachConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub width: f64,
    /// Momentum given to the upper spin component; its sign is the sign of
    /// the field gradient.
    pub kick: f64,
    pub pulse: (f64, f64),
    pub t_end: f64,
    pub dt: Option<f64>,
    pub stride: usize,
    pub n: usize,
    pub seed: u64,
    /// Starts closer to the median than this many density spreads carry no
    /// outcome claim.
    pub node_margin: f64,
    /// Extra starts in units of the density spread.
    pub starts_in_spreads: Vec<f64>,
}

impl Default for SternGerlachConfig {
    fn default() -> Self {
        SternGerlachConfig {
            x_min: -48.0,
            x_max: 48.0,
            nx: 1024,
            width: 1.0,
            kick: 5.0,
            pulse: (0.0, 0.1),
            t_end: 3.0,
            dt: None,
            stride: 10,
            n: 100,
            seed: 11,
            node_margin: 0.02,
            starts_in_spreads: vec![0.5, -0.5],
        }
    }
}

impl SternGerlachConfig {
    /// Standard deviation of the initial density.
    pub fn spread(&self) -> f64 {
        self.width / 2f64.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.t_end > 0.0 && self.kick != 0.0 && self.kick.is_finite()) {
            return Err(Error::Config("need positive width and duration and a non-zero kick".into()));
        }
        if self.n == 0 || self.stride == 0 {
            return Err(Error::Config("n and stride must be positive".into()));
        }
        if !(self.node_margin >= 0.0) {
            return Err(Error::Config("node margin must be non-negative".into()));
        }
        Ok(())
    }

    fn initial(&self) -> Result<SpinorWaveFunction1D> {
        let grid = Grid1D::new(self.x_min, self.x_max, self.nx)?;
        let spatial = build_packet(&grid, &PacketSpec::gaussian(0.0, self.width, 0.0))?.normalized()?;
        let c = Complex::new(0.5f64.sqrt(), 0.0);
        Ok(SpinorWaveFunction1D::product(&spatial, c, c))
    }
}

/// Spin label read off the final position for a given gradient sign.
fn label(x_final: f64, kick: f64) -> &'static str {
    if (x_final > 0.0) == (kick > 0.0) {
        "up"
    } else {
        "down"
    }
}

fn trace(cfg: &SternGerlachConfig, kick: f64, starts: &[f64]) -> Result<(Vec<Result<Trajectory>>, f64)> {
    let psi = cfg.initial()?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => {
            let grid = *psi.grid();
            let probe = build_packet(&grid, &PacketSpec::gaussian(0.0, cfg.width, kick.abs()))?;
            kinetic_dt(&probe, 1.0, 0.5)
        }
    };
    let kick = SpinKick { profile: GProfile::square(cfg.pulse.0, cfg.pulse.1)?, strength: kick };
    let series = evolve_spinor_series(&psi, kick, 0.0, cfg.t_end, dt, cfg.stride)?;
    let n0 = psi.norm_sqr();
    let drift = series.fields.iter().map(|f| (f.norm_sqr() / n0 - 1.0).abs()).fold(0.0, f64::max);
    Ok((integrate_spinor_ensemble(&series, starts, Integration::default())?, drift))
}

pub fn run_stern_gerlach(cfg: &SternGerlachConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let sigma = cfg.spread();
    let psi = cfg.initial()?;
    let spatial = crate::qfield::WaveFunction1D::new(*psi.grid(), psi.up().iter().map(|z| z * 2f64.sqrt()).collect())?;
    // draw until n starts lie outside the node band
    let spec = EnsembleSpec::new(cfg.n * 4, cfg.seed, Sampling::Density)?;
    let mut starts: Vec<f64> = sample_initial(SampleSource::Wave(&spatial), &spec)?
        .into_iter()
        .filter(|x| x.abs() >= cfg.node_margin * sigma)
        .take(cfg.n)
        .collect();
    if starts.len() < cfg.n {
        return Err(Error::Config("node margin excludes too many samples".into()));
    }
    starts.extend(cfg.starts_in_spreads.iter().map(|s| s * sigma));

    let (paths, drift) = trace(cfg, cfg.kick, &starts)?;
    let (reversed, drift_rev) = trace(cfg, -cfg.kick, &starts)?;
    let same = paths.iter().zip(&reversed).all(|(a, b)| match (a, b) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    });
    let start_vecs: Vec<Vec<f64>> = starts.iter().map(|&x| vec![x]).collect();
    let (runs, kept) = classify(&start_vecs, paths, 0.0);

    // median of the symmetric initial density is 0
    let mut agree = 0usize;
    let mut flipped = 0usize;
    let mut outcomes = Vec::with_capacity(runs.len());
    for (r, rev) in runs.iter().zip(&reversed) {
        let (Some(k), Ok(rev)) = (r.path, rev) else {
            outcomes.push(json!(null));
            continue;
        };
        let x_final = kept[k].last()[0];
        let here = label(x_final, cfg.kick);
        let there = label(rev.last()[0], -cfg.kick);
        let expect = if r.start[0] > 0.0 { "up" } else { "down" };
        agree += (here == expect) as usize;
        flipped += (here != there) as usize;
        outcomes.push(json!({ "x0": r.start[0], "label": here, "reversed_label": there }));
    }
    let total = runs.len();
    let drift = drift.max(drift_rev);
    let checks = vec![
        Check::below("norm_drift", drift, NORM_DRIFT_LIMIT),
        Check::flag("outcome_matches_start_half", agree == total),
        Check::flag("reversal_keeps_paths", same),
        Check::flag("reversal_flips_labels", flipped == total),
    ];
    Ok(ScenarioReport {
        name: "stern_gerlach".into(),
        config: serde_json::to_value(cfg)?,
        overlap_onset: None,
        onset_threshold: 0.0,
        norm_drift: drift,
        runs,
        stats: json!({ "sampled": cfg.n, "agreement": agree as f64 / total as f64, "outcomes": outcomes }),
        checks,
        paths: kept,
    })
}
