//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_SHORTFALLS` are printed as FAIL and do not fail
//! the target; any other failure does, and so does a listed criterion that
//! starts passing (the list must then be updated).

use std::process::ExitCode;
use std::time::Instant;

use pilotwave::f256;
use pilotwave::guidance::ordering_preserved;
use pilotwave::idealized::{postselection_stats, IdealizedScenario, Measurement, Side, StatsMode};
use pilotwave::propagate::evolve_1d;
use pilotwave::qfield::{build_packet, Grid1D, PacketSpec, Potential, WaveFunction1D};
use pilotwave::scenarios::{
    run_fig1, run_fig2, run_fig3_ensemble, run_fig4_delayed, run_protective, run_stern_gerlach, Fig1Config, Fig2Config,
    Fig3Config, Fig4Config, ProtectiveScenarioConfig, ScenarioReport, SternGerlachConfig,
};
use pilotwave::tsvf::{
    limit_deviation, prepost_position_states, tilted_pair, weak_value, HermitianOperator, PointerModel,
};
use pilotwave::Real;

/// Reconstruction L1 for the box ground state is 1/M to leading order, so
/// M = 32 gives about 3.1% against a 2% target.
const KNOWN_SHORTFALLS: &[usize] = &[5];

struct Outcome {
    lines: Vec<(bool, String)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { lines: Vec::new() }
    }

    fn item(&mut self, ok: bool, text: String) {
        self.lines.push((ok, text));
    }

    fn passed(&self) -> bool {
        self.lines.iter().all(|(ok, _)| *ok)
    }
}

fn report_items(out: &mut Outcome, r: &ScenarioReport, names: &[&str]) {
    for name in names {
        match r.check(name) {
            Some(c) => out.item(c.passed, format!("{}.{} = {:.6e} (bound {:.3e})", r.name, c.name, c.value, c.bound)),
            None => out.item(false, format!("{}.{name} missing", r.name)),
        }
    }
}

fn criterion_1(fig3: &ScenarioReport) -> Outcome {
    let mut out = Outcome::new();
    let s = IdealizedScenario::new(2.0, 1.0, 3.0, 1.0, Measurement::Weak { f: 0.1 }).unwrap();
    let exact = postselection_stats(&s, Side::Right, StatsMode::Exact).unwrap().fraction_started_right;
    out.item((exact - 0.9).abs() < 1e-15, format!("exact fraction {exact:.15}"));
    let mc = postselection_stats(&s, Side::Right, StatsMode::MonteCarlo { n: 100_000, seed: 2024 })
        .unwrap()
        .fraction_started_right;
    out.item((mc - 0.9).abs() < 0.005, format!("Monte Carlo fraction {mc:.5} (n = 1e5)"));
    let n = fig3.stats["n"].as_u64().unwrap_or(0);
    let frac = fig3.stats["fraction_started_right"].as_f64().unwrap_or(f64::NAN);
    out.item(n >= 2000 && (frac - 0.9).abs() < 0.02, format!("2D ensemble fraction {frac:.4} (n = {n})"));
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let (tsv, half) = tilted_pair::<f64>(1, std::f64::consts::FRAC_PI_4).unwrap();
    let a = HermitianOperator::combine(2.0, &half, 0.0, &half);
    let w = weak_value(&tsv, &a).unwrap().value;
    let err = (w.re - 2f64.sqrt()).abs().max(w.im.abs());
    out.item(err < 1e-12, format!("sigma_xi weak value {} (error {err:.1e})", w.re));

    for deg in [0.0, 60.0, 75.0] {
        let theta = f256::from(f64::to_radians(deg));
        let (tsv, a) = tilted_pair::<f256>(40, theta).unwrap();
        let w = weak_value(&tsv, &a).unwrap().value;
        let want = 20.0 / f64::to_radians(deg).cos();
        let err = (w.re.to_f64() - want).abs().max(w.im.to_f64().abs());
        out.item(err < 1e-9, format!("spin N=20, {deg} deg: {:.12} vs {want:.12}", w.re.to_f64()));
    }

    let n = 40;
    let half_width = 1.0 + 3.5 / n as f64;
    let grid = Grid1D::new(f256::from(-half_width), f256::from(half_width), 1024).unwrap();
    let theta = 80f64.to_radians();
    let p = prepost_position_states(n, f256::from(theta), f256::from(0.4 / n as f64), grid).unwrap();
    let xw = weak_value(&p.tsv, &p.position_operator()).unwrap().value.re.to_f64();
    let want = 1.0 / theta.cos();
    out.item((xw - want).abs() < 1e-6 && xw.abs() > 1.0, format!("position case N=40, 80 deg: x_w {xw:.9} vs {want:.9}"));
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let (tsv, half) = tilted_pair::<f64>(1, std::f64::consts::FRAC_PI_4).unwrap();
    let a = HermitianOperator::combine(2.0, &half, 0.0, &half);
    let aw = weak_value(&tsv, &a).unwrap().value.re;
    let deltas = [5.0, 10.0, 20.0];
    let devs: Vec<f64> = deltas
        .iter()
        .map(|&d| limit_deviation(&tsv, &a, &PointerModel::fit_operator(d, &a, aw).unwrap()).unwrap())
        .collect();
    out.item(devs[1] < devs[0] && devs[2] < devs[1], format!("deviations {:.4e} {:.4e} {:.4e}", devs[0], devs[1], devs[2]));
    // an inverse-square law quarters the deviation per doubling; allow a factor 2
    for k in 0..2 {
        let ratio = devs[k] / devs[k + 1];
        let order = ratio.log2();
        out.item((2.0..=8.0).contains(&ratio), format!("ratio {ratio:.3}, empirical order {order:.3}"));
    }
    out
}

fn criterion_4(fig1: &ScenarioReport, fig2: &ScenarioReport, fig4: &ScenarioReport) -> Outcome {
    let mut out = Outcome::new();
    let right = fig1.runs.iter().find(|r| r.started_side == Side::Right).unwrap();
    out.item(
        right.turned == Some(true) && right.final_side == Some(Side::Right),
        format!("fig1 start right: turned {:?}, final {:?}", right.turned, right.final_side),
    );
    report_items(&mut out, fig2, &["start_right_not_turned", "start_right_pointer_still", "start_left_pointer_shift_error"]);
    report_items(
        &mut out,
        fig4,
        &["start_right_never_enters_region", "start_right_turned_final_right", "start_right_pointer_still_before_overlap"],
    );
    out
}

fn criterion_5(protective: &ScenarioReport) -> Outcome {
    let mut out = Outcome::new();
    report_items(
        &mut out,
        protective,
        &[
            "region_0_relative_error",
            "region_0_error_decreases",
            "region_1_relative_error",
            "region_1_error_decreases",
            "reconstruction_l1_m32",
            "eigenstate_max_speed",
        ],
    );
    out
}

fn strang_ratio() -> f64 {
    let g = Grid1D::new(-16.0, 16.0, 256).unwrap();
    let pot = Potential::Field(g.points().iter().map(|&x: &f64| 0.5 * x * x + 0.025 * x.powi(4)).collect());
    let psi = build_packet(&g, &PacketSpec::gaussian(1.0, 0.9, 0.3)).unwrap().normalized().unwrap();
    let run = |dt: f64| evolve_1d(&psi, Some(&pot), 1.0, dt).unwrap();
    let dist = |a: &WaveFunction1D, b: &WaveFunction1D| {
        let s: f64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum();
        (s * g.dx()).sqrt()
    };
    let h = 0.02;
    let reference = run(h / 4.0);
    dist(&run(h), &reference) / dist(&run(h / 2.0), &reference)
}

fn criterion_6(reports: &[&ScenarioReport], fig1: &ScenarioReport, fig3: &ScenarioReport, sg: &ScenarioReport) -> Outcome {
    let mut out = Outcome::new();
    for r in reports {
        report_items(&mut out, r, &["norm_drift"]);
    }
    report_items(&mut out, fig1, &["equivariance_ks", "non_crossing"]);
    let sg_ordered = ordering_preserved(&sg.paths);
    out.item(sg_ordered, format!("stern_gerlach paths keep their order: {sg_ordered}"));
    report_items(&mut out, fig3, &["idealized_agreement"]);
    // second order: e(h)/e(h/2) against an h/4 reference is 5
    let ratio = strang_ratio();
    out.item((ratio - 5.0).abs() < 0.5, format!("Strang error ratio {ratio:.4} (second order gives 5)"));
    out
}

fn criterion_7(sg: &ScenarioReport) -> Outcome {
    let mut out = Outcome::new();
    report_items(&mut out, sg, &["outcome_matches_start_half", "reversal_keeps_paths", "reversal_flips_labels"]);
    let sampled = sg.stats["sampled"].as_u64().unwrap_or(0);
    out.item(sampled >= 100, format!("sampled starts {sampled}"));
    out
}

fn timed<R>(label: &str, f: impl FnOnce() -> R) -> R {
    let t = Instant::now();
    let r = f();
    println!("  [{label}: {:.1} s]", t.elapsed().as_secs_f64());
    r
}

fn main() -> ExitCode {
    println!("acceptance");
    let fig1 = timed("fig1 with 10k ensemble", || run_fig1(&Fig1Config { ensemble: 10_000, ..Fig1Config::default() }).unwrap());
    let fig2 = timed("fig2", || run_fig2(&Fig2Config::default()).unwrap());
    let fig3 = timed("fig3 ensemble", || run_fig3_ensemble(&Fig3Config { f: 0.1, n: 2000, ..Fig3Config::default() }).unwrap());
    let fig4 = timed("fig4", || run_fig4_delayed(&Fig4Config::default()).unwrap());
    let sg = timed("stern-gerlach", || run_stern_gerlach(&SternGerlachConfig::default()).unwrap());
    let protective = timed("protective", || run_protective(&ProtectiveScenarioConfig::default()).unwrap());

    let outcomes = [
        criterion_1(&fig3),
        criterion_2(),
        criterion_3(),
        criterion_4(&fig1, &fig2, &fig4),
        criterion_5(&protective),
        criterion_6(&[&fig1, &fig2, &fig3, &fig4, &sg, &protective], &fig1, &fig3, &sg),
        criterion_7(&sg),
    ];

    let mut unexpected = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        let n = i + 1;
        let known = KNOWN_SHORTFALLS.contains(&n);
        let tag = if o.passed() { "PASS" } else if known { "FAIL (known shortfall)" } else { "FAIL" };
        println!("criterion {n}: {tag}");
        for (ok, text) in &o.lines {
            println!("    {} {text}", if *ok { "ok  " } else { "FAIL" });
        }
        if o.passed() == known {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
