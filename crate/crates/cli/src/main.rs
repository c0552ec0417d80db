//! `pilotwave` command line: scenario runs, weak values, protective
//! reconstructions and pointer-model comparisons.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical guard, 4 I/O. Failures
//! print a JSON record on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use pilotwave::idealized::Side;
use pilotwave::protective::reconstruct_density;
use pilotwave::qfield::{EigenPotential, EnergyEigenstate};
use pilotwave::scenarios::{ScenarioConfig, ScenarioReport};
use pilotwave::tsvf::{
    limit_deviation, operator_from_json, pointer_final_state, state_from_json, tilted_pair, weak_limit_gaussian,
    weak_value, HermitianOperator, PointerModel, TwoStateVector,
};
use pilotwave::{f256, Error, Real, Result};

#[derive(Parser)]
#[command(name = "pilotwave", version, about = "Bohmian trajectories, pointer models and weak values")]
struct Cli {
    /// Worker threads for ensemble integration (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario from a JSON config.
    Run {
        config: PathBuf,
        /// Override a config value: `--set crossing.nx=2048`.
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        /// Output root; the run goes to `<out>/<name>-<hash>`.
        #[arg(long, env = "PILOTWAVE_OUT", default_value = "runs")]
        out: PathBuf,
    },
    /// Weak value of an operator between pre- and post-selected states.
    Weak {
        /// Pre-selected state: JSON `[re, im, ...]` or `@file`.
        #[arg(long, requires_all = ["post", "operator"], conflicts_with = "spin")]
        pre: Option<String>,
        #[arg(long)]
        post: Option<String>,
        /// Hermitian matrix as an array of `[re, im, ...]` rows, or `@file`.
        #[arg(long)]
        operator: Option<String>,
        /// Spin-j tilted coherent states (evaluated in 256-bit precision).
        #[arg(long, requires = "theta")]
        spin: Option<usize>,
        /// Tilt of the pre- and post-selected directions in degrees.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Reconstruct an eigenstate density from projection averages.
    Protective {
        #[arg(long, value_enum, default_value_t = Well::Box)]
        potential: Well,
        /// Box length or oscillator frequency.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Quantum number (from 1 for the box, from 0 for the oscillator).
        #[arg(long, default_value_t = 1)]
        level: u32,
        #[arg(long, default_value_t = 32)]
        bins: usize,
        #[arg(long, env = "PILOTWAVE_OUT", default_value = "runs")]
        out: PathBuf,
    },
    /// Exact pointer state against its Gaussian weak limit for sigma_xi
    /// between up-x and up-y.
    TsvfPointer {
        #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 10.0, 20.0])]
        deltas: Vec<f64>,
        /// Also write the pointer states as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a run directory and aggregate its records.
    Stats { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Well {
    Box,
    Harmonic,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        4
    } else if e.is_numerical() {
        3
    } else {
        2
    }
}

fn kind(e: &Error) -> &'static str {
    match exit_code(e) {
        4 => "io",
        3 => "numerical",
        _ => "validation",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "error": "validation", "message": e.to_string(), "exit_code": 2 }));
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.cmd) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json output"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", json!({ "error": kind(&e), "message": e.to_string(), "exit_code": code }));
            ExitCode::from(code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<Value> {
    match cmd {
        Cmd::Run { config, set, out } => cmd_run(&config, &set, &out),
        Cmd::Weak { pre, post, operator, spin, theta } => cmd_weak(pre, post, operator, spin, theta),
        Cmd::Protective { potential, scale, level, bins, out } => cmd_protective(potential, scale, level, bins, &out),
        Cmd::TsvfPointer { deltas, out } => cmd_tsvf_pointer(&deltas, out.as_deref()),
        Cmd::Stats { dir } => cmd_stats(&dir),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct InventoryEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    scenario: String,
    config_file: &'static str,
    config_sha256: String,
    seed: Option<u64>,
    started: String,
    finished: String,
    checks_passed: bool,
    inventory: Vec<InventoryEntry>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn cmd_run(config: &Path, set: &[String], out: &Path) -> Result<Value> {
    let started = now();
    let text = fs::read_to_string(config)?;
    let cfg = ScenarioConfig::from_json(&text, set)?;
    let resolved = serde_json::to_string_pretty(&cfg)?;
    let hash = sha256_hex(resolved.as_bytes());
    let dir = out.join(format!("{}-{}", cfg.name(), &hash[..12]));
    let report = cfg.run()?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), &resolved)?;
    let mut files = vec!["config.json".to_string()];
    files.extend(report.write_dir(&dir)?);
    let inventory = files
        .iter()
        .map(|f| {
            let bytes = fs::read(dir.join(f))?;
            Ok(InventoryEntry { path: f.clone(), bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        tool: "pilotwave",
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.name().into(),
        config_file: "config.json",
        config_sha256: hash,
        seed: cfg.seed(),
        started,
        finished: now(),
        checks_passed: report.passed(),
        inventory,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(json!({
        "scenario": cfg.name(),
        "dir": dir.display().to_string(),
        "passed": report.passed(),
        "checks": report.checks,
        "stats": report.stats,
    }))
}

/// Inline JSON, or the contents of a file when prefixed with `@`.
fn json_arg(arg: &str) -> Result<Value> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    Ok(serde_json::from_str(&text)?)
}

fn cmd_weak(
    pre: Option<String>,
    post: Option<String>,
    operator: Option<String>,
    spin: Option<usize>,
    theta: Option<f64>,
) -> Result<Value> {
    if let (Some(j), Some(deg)) = (spin, theta) {
        let theta = f256::pi() * f256::lit(deg) / f256::lit(180.0);
        let (tsv, a) = tilted_pair::<f256>(2 * j, theta)?;
        let w = weak_value(&tsv, &a)?;
        let mut v = w.to_json();
        v["precision"] = json!("f256");
        return Ok(v);
    }
    let (Some(pre), Some(post), Some(op)) = (pre, post, operator) else {
        return Err(Error::Config("give --pre, --post and --operator, or --spin with --theta".into()));
    };
    let tsv = TwoStateVector::<f64>::new(state_from_json(&json_arg(&pre)?)?, state_from_json(&json_arg(&post)?)?)?;
    let a: HermitianOperator<f64> = operator_from_json(&json_arg(&op)?)?;
    Ok(weak_value(&tsv, &a)?.to_json())
}

fn cmd_protective(well: Well, scale: f64, level: u32, bins: usize, out: &Path) -> Result<Value> {
    let state = match well {
        Well::Box => EnergyEigenstate::in_box(scale, level)?,
        Well::Harmonic => EnergyEigenstate::harmonic(scale, level)?,
    };
    let report = reconstruct_density(&state, bins)?;
    let tag = match state.potential {
        EigenPotential::Box { .. } => "box",
        EigenPotential::Harmonic { .. } => "harmonic",
    };
    let dir = out.join(format!("protective-{tag}-n{level}-m{bins}"));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("reconstruction.json"), serde_json::to_string_pretty(&report)?)?;
    let mut csv = String::from("lo,hi,average,density,exact_density_at_center\n");
    for (k, (e, d)) in report.edges.windows(2).zip(report.histogram_density()).enumerate() {
        let mid = 0.5 * (e[0] + e[1]);
        let exact = state.value(mid).powi(2);
        csv.push_str(&format!("{:?},{:?},{:?},{d:?},{exact:?}\n", e[0], e[1], report.averages[k]));
    }
    fs::write(dir.join("histogram.csv"), csv)?;
    Ok(json!({ "dir": dir.display().to_string(), "bins": bins, "l1_error": report.l1_error, "averages": report.averages }))
}

fn cmd_tsvf_pointer(deltas: &[f64], out: Option<&Path>) -> Result<Value> {
    if deltas.is_empty() {
        return Err(Error::Config("need at least one pointer spread".into()));
    }
    // spin-1/2 component at pi/4 is sigma_xi / 2
    let (tsv, half) = tilted_pair::<f64>(1, std::f64::consts::FRAC_PI_4)?;
    let a = HermitianOperator::combine(2.0, &half, 0.0, &half);
    let w = weak_value(&tsv, &a)?;
    let mut rows = Vec::new();
    for &d in deltas {
        let pm = PointerModel::fit_operator(d, &a, w.value.re)?;
        let dev = limit_deviation(&tsv, &a, &pm)?;
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            let exact = pointer_final_state(&tsv, &a, &pm)?.normalized;
            let limit = weak_limit_gaussian(w.value.re, &pm)?;
            let mut csv = String::from("q,exact_re,exact_im,limit\n");
            for (i, q) in pm.grid.points().into_iter().enumerate() {
                let z = exact.amplitudes()[i];
                csv.push_str(&format!("{q:?},{:?},{:?},{:?}\n", z.re, z.im, limit.amplitudes()[i].re));
            }
            fs::write(dir.join(format!("pointer_delta_{d}.csv")), csv)?;
        }
        rows.push((d, dev));
    }
    let orders: Vec<f64> = rows
        .windows(2)
        .map(|p| (p[0].1 / p[1].1).ln() / (p[1].0 / p[0].0).ln())
        .collect();
    let monotone = rows.windows(2).all(|p| p[1].1 < p[0].1);
    Ok(json!({
        "weak_value": w.to_json(),
        "deviations": rows.iter().map(|(d, e)| json!({ "delta": d, "deviation": e })).collect::<Vec<_>>(),
        "empirical_orders": orders,
        "monotone": monotone,
    }))
}

fn cmd_stats(dir: &Path) -> Result<Value> {
    let report = ScenarioReport::read_dir(dir)?;
    let mut hash_ok = None;
    let manifest = dir.join("manifest.json");
    if manifest.exists() {
        let m: Value = serde_json::from_slice(&fs::read(&manifest)?)?;
        let stored = m["config_sha256"].as_str().unwrap_or_default().to_string();
        let actual = sha256_hex(&fs::read(dir.join("config.json"))?);
        if stored != actual {
            return Err(Error::Parse("config.json does not match the manifest hash".into()));
        }
        hash_ok = Some(true);
    }
    let live: Vec<_> = report.runs.iter().filter(|r| r.halted.is_none()).collect();
    let count = |f: &dyn Fn(&&pilotwave::scenarios::RunRecord) -> bool| live.iter().filter(|r| f(r)).count();
    let selected = count(&|r| r.final_side == Some(Side::Right));
    let selected_from_right = count(&|r| r.final_side == Some(Side::Right) && r.started_side == Side::Right);
    Ok(json!({
        "scenario": report.name,
        "verified": true,
        "config_hash_matches": hash_ok,
        "runs": report.runs.len(),
        "halted": report.runs.len() - live.len(),
        "turned": count(&|r| r.turned == Some(true)),
        "started_right": count(&|r| r.started_side == Side::Right),
        "final_right": selected,
        "fraction_started_right_given_final_right":
            if selected > 0 { json!(selected_from_right as f64 / selected as f64) } else { Value::Null },
        "checks_passed": report.passed(),
    }))
}
