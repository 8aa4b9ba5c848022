use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tvc_core::config::{GainsSpec, RunConfig};
use tvc_core::control::tuning::ErrorTrace;
use tvc_core::control::ControlError;
use tvc_core::dynamics::{
    parse_eng, simulate, tune_plant, ControlGains, ReferencePlant, SimMode, SimRun, TorquePulse,
};
use tvc_core::telemetry::{
    compute_metrics, FlightLog, MetricsWindow, SettingsSidecar, Summary, HEADER, SIDECAR_SUFFIX,
};

pub const SEED_ENV: &str = "TVC_SITL_SEED";
const LOG_NAME: &str = "flight.csv";
const SUMMARY_NAME: &str = "summary.json";
const TUNED_NAME: &str = "tuned.toml";

/// Standard stand disturbance: 0.055 N·m about pitch, 1 s after ignition, for 0.1 s.
pub const STANDARD_PULSE: TorquePulse = TorquePulse {
    t_s: 1.0,
    duration_s: 0.1,
    torque_nm: 0.055,
};

#[derive(Debug, Parser)]
#[command(name = "tvc-sitl", version, about = "TVC rocket software-in-the-loop simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a flight and write flight.csv, flight.settings.json and summary.json.
    Sim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed and the TVC_SITL_SEED variable.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the one-third-thrust stand test with a torque pulse.
    Groundtest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Torque pulse as "Nm@t,dur", t in seconds after ignition.
        #[arg(long)]
        pulse: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Find the ultimate cycle on the stand and write Ziegler-Nichols gains to tuned.toml.
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, hide = true)]
        stub_plant: Option<StubPlant>,
    },
    /// Print metrics for a log and optionally emit plot data.
    Analyze {
        #[arg(long)]
        log: PathBuf,
        /// Disturbance time on the log clock; defaults to the sidecar value.
        #[arg(long)]
        disturbance: Option<f64>,
        /// Print the log column names.
        #[arg(long)]
        columns: bool,
        /// Write t, pitch, yaw, tilt, gimbal pitch, gimbal yaw to this file.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
        #[arg(long, value_enum)]
        window: Option<Window>,
    },
    /// Validate a RASP .eng file and print its summary.
    Motor {
        #[arg(long)]
        eng: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StubPlant {
    FirstOrder,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Window {
    Powered,
    Thrust,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sim { config, out, seed } => cmd_run(&config, &out, seed, SimMode::Flight, None),
        Command::Groundtest {
            config,
            out,
            pulse,
            seed,
        } => {
            let pulse = pulse.map(|p| parse_pulse(&p)).transpose()?;
            cmd_run(&config, &out, seed, SimMode::GroundTest, Some(pulse))
        }
        Command::Tune {
            config,
            out,
            stub_plant,
        } => cmd_tune(&config, &out, stub_plant),
        Command::Analyze {
            log,
            disturbance,
            columns,
            gnuplot,
            window,
        } => cmd_analyze(&log, disturbance, columns, gnuplot.as_deref(), window),
        Command::Motor { eng } => cmd_motor(&eng),
    }
}

/// Parses `"Nm@t,dur"`, e.g. `0.05@1.0,0.1`.
pub fn parse_pulse(text: &str) -> Result<TorquePulse> {
    let bad = || anyhow!("pulse must look like \"Nm@t,dur\", got {text:?}");
    let (torque, rest) = text.split_once('@').ok_or_else(bad)?;
    let (t, dur) = rest.split_once(',').ok_or_else(bad)?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let pulse = TorquePulse {
        t_s: num(t)?,
        duration_s: num(dur)?,
        torque_nm: num(torque)?,
    };
    if !(pulse.t_s >= 0.0) || !(pulse.duration_s >= 0.0) || !pulse.torque_nm.is_finite() {
        return Err(bad());
    }
    Ok(pulse)
}

fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

/// Writes every file into a scratch directory inside `out`, then moves them into place.
fn write_outputs(out: &Path, files: &[(&str, String)]) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let scratch = tempfile::Builder::new()
        .prefix(".tvc-sitl-")
        .tempdir_in(out)
        .with_context(|| format!("creating scratch directory in {}", out.display()))?;
    for (name, body) in files {
        let path = scratch.path().join(name);
        let mut f = fs::File::create(&path).with_context(|| format!("writing {name}"))?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    for (name, _) in files {
        fs::rename(scratch.path().join(name), out.join(name))
            .with_context(|| format!("moving {name} into {}", out.display()))?;
    }
    Ok(())
}

fn sidecar_name() -> String {
    format!("{}{}", LOG_NAME.trim_end_matches(".csv"), SIDECAR_SUFFIX)
}

fn cmd_run(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    mode: SimMode,
    pulse: Option<Option<TorquePulse>>,
) -> Result<ExitCode> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(seed) = resolve_seed(seed)? {
        cfg.disturbances.seed = seed;
    }
    cfg.sim.mode = mode;
    if let Some(pulse) = pulse {
        cfg.disturbances.torque_pulse = pulse
            .or(cfg.disturbances.torque_pulse)
            .or(Some(STANDARD_PULSE));
    }
    let prepared = cfg.prepare()?;
    if let Some(t) = &prepared.tune {
        println!(
            "tuned: ku = {} tu_s = {} kp = {} ki = {} kd = {}",
            t.cycle.ku, t.cycle.tu_s, t.gains.kp, t.gains.ki, t.gains.kd
        );
    }
    let run = simulate(&prepared.sim)?;
    let metrics = run
        .metrics
        .as_ref()
        .ok_or_else(|| anyhow!("no records in the metrics window (final phase {})", run.final_phase))?;
    let summary = Summary::new(metrics, run.final_phase);
    let sidecar = SettingsSidecar::new(&prepared.resolved, &run);
    write_outputs(
        out,
        &[
            (LOG_NAME, run.log.to_csv()),
            (&sidecar_name(), serde_json::to_string_pretty(&sidecar)? + "\n"),
            (SUMMARY_NAME, serde_json::to_string_pretty(&summary)? + "\n"),
        ],
    )?;
    print_run(&run, &summary);
    Ok(if run.aborted() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn print_run(run: &SimRun, summary: &Summary) {
    println!("records: {}", run.log.len());
    println!("final_phase: {}", summary.final_phase);
    println!("max_deviation_deg: {}", summary.max_deviation_deg);
    println!("max_deviation_t_s: {}", summary.max_deviation_t_s);
    match summary.response_time_s {
        Some(r) => println!("response_time_s: {r}"),
        None => println!("response_time_s: none"),
    }
}

/// P-only loop around a first-order lag; it cannot oscillate.
fn first_order_stub(kp: f64) -> Result<ErrorTrace, ControlError> {
    let (dt, tau) = (0.01, 0.2);
    let mut x = 1.0f64;
    let errors = (0..600)
        .map(|_| {
            let e = -x;
            x += dt * (-x / tau + kp * e) / (1.0 + dt * kp);
            e
        })
        .collect();
    Ok(ErrorTrace {
        dt_s: dt,
        errors,
        diverged: false,
    })
}

fn cmd_tune(config: &Path, out: &Path, stub: Option<StubPlant>) -> Result<ExitCode> {
    let cfg = RunConfig::load(config)?;
    let sim = cfg.sim_config()?;
    let settings = cfg.control.tune_settings();
    let result = match stub {
        Some(StubPlant::FirstOrder) => tune_plant(&first_order_stub, &settings),
        None => tune_plant(&ReferencePlant::from_config(&sim), &settings),
    };
    let result = match result {
        Ok(r) => r,
        Err(e @ ControlError::NoSustainedOscillation { .. }) => {
            bail!("{e} (raise control.kp_max)")
        }
        Err(e) => return Err(e.into()),
    };
    let mut tuned = cfg.clone();
    tuned.control.gains = GainsSpec::Explicit(ControlGains::both(result.gains));
    if let Ok(abs) = fs::canonicalize(&tuned.motor.path) {
        tuned.motor.path = abs;
    }
    write_outputs(out, &[(TUNED_NAME, tuned.to_toml_string()?)])?;
    println!("ku: {}", result.cycle.ku);
    println!("tu_s: {}", result.cycle.tu_s);
    println!(
        "gains: kp = {} ki = {} kd = {}",
        result.gains.kp, result.gains.ki, result.gains.kd
    );
    println!("evaluations: {}", result.cycle.evaluations);
    Ok(ExitCode::SUCCESS)
}

fn sidecar_path(log: &Path) -> PathBuf {
    let stem = log
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    log.with_file_name(format!("{stem}{SIDECAR_SUFFIX}"))
}

fn cmd_analyze(
    log_path: &Path,
    disturbance: Option<f64>,
    columns: bool,
    gnuplot: Option<&Path>,
    window: Option<Window>,
) -> Result<ExitCode> {
    let text = fs::read_to_string(log_path)
        .with_context(|| format!("reading {}", log_path.display()))?;
    let log = FlightLog::parse_csv(&text).with_context(|| format!("{}", log_path.display()))?;
    let sidecar: Option<SettingsSidecar> = match fs::read_to_string(sidecar_path(log_path)) {
        Ok(s) => Some(serde_json::from_str(&s).context("parsing settings sidecar")?),
        Err(_) => None,
    };
    if columns {
        for name in HEADER {
            println!("{name}");
        }
    }
    let window = match window {
        Some(Window::Powered) => MetricsWindow::PoweredAscent,
        Some(Window::Thrust) => MetricsWindow::Thrust,
        None => sidecar.as_ref().map_or(MetricsWindow::PoweredAscent, |s| s.window),
    };
    let disturbance = disturbance.or(sidecar.as_ref().and_then(|s| s.disturbance_t_s));
    let metrics = compute_metrics(&log, window, disturbance)?;
    let final_phase = log
        .records
        .last()
        .map(|r| r.phase)
        .ok_or_else(|| anyhow!("log has no records"))?;
    let summary = Summary::new(&metrics, final_phase);
    println!("records: {}", log.len());
    println!("final_phase: {}", summary.final_phase);
    println!("max_deviation_deg: {}", summary.max_deviation_deg);
    println!("max_deviation_t_s: {}", summary.max_deviation_t_s);
    match summary.response_time_s {
        Some(r) => println!("response_time_s: {r}"),
        None => println!("response_time_s: none"),
    }
    for (phase, t) in &summary.phase_times_s {
        println!("phase {phase}: {t}");
    }
    if let Some(path) = gnuplot {
        let mut body = String::new();
        for r in &log.records {
            body.push_str(&format!(
                "{:.9} {:.9} {:.9} {:.9} {:.9} {:.9}\n",
                r.t_s,
                r.euler.pitch_deg,
                r.euler.yaw_deg,
                r.tilt_deg,
                r.gimbal_pitch_deg,
                r.gimbal_yaw_deg
            ));
        }
        fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_motor(eng: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(eng).with_context(|| format!("reading {}", eng.display()))?;
    let m = parse_eng(&text).with_context(|| format!("{}", eng.display()))?;
    let c = &m.curve;
    println!("designation: {}", m.designation);
    println!("manufacturer: {}", m.manufacturer);
    println!("burn_time_s: {}", c.burn_time_s());
    println!("peak_thrust_n: {}", c.peak_thrust_n());
    println!("total_impulse_ns: {}", c.total_impulse());
    println!("average_thrust_n: {}", c.average_thrust_n());
    Ok(ExitCode::SUCCESS)
}
