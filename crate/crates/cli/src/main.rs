// Negated comparisons treat NaN as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use blf_arm::dynamics::{inertia_bounds, INERTIA_GRID_POINTS};
use blf_arm::lyapunov::{self, AnalysisBounds, RunMetrics, DEFAULT_ENVELOPE};
use blf_arm::properties::{self, SuiteOptions};
use blf_arm::sweep::{self, SweepParam};
use blf_arm::{trace_csv, Error, Scenario, Simulator, Trace, TwoLinkArm};

const EXIT_CONFIG: u8 = 2;
const EXIT_BREACH: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(name = "blf-arm", version, about = "Constrained adaptive tracking for a two-link arm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the trace CSV and metrics report.
    Simulate {
        config: PathBuf,
        /// Overrides `output.trace_path`.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Overrides `output.metrics_path`.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Settling band in degrees.
        #[arg(long, default_value_t = 0.1)]
        band_deg: f64,
    },
    /// Evaluate the gain inequalities for a scenario.
    Certify {
        config: PathBuf,
        #[arg(long)]
        m1: Option<f64>,
        #[arg(long)]
        m2: Option<f64>,
        #[arg(long)]
        zeta1: Option<f64>,
        #[arg(long)]
        zeta2: Option<f64>,
        #[arg(long)]
        kn: Option<f64>,
        /// Fraction of the constraint radius used to bound the barrier gain.
        #[arg(long, default_value_t = DEFAULT_ENVELOPE)]
        rho: f64,
        /// Also write the report as key=value lines.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a trace for Lyapunov increases and constraint violations.
    Verify { trace: PathBuf, config: PathBuf },
    /// Run one simulation per value of a single parameter.
    Sweep {
        config: PathBuf,
        /// One of k<i>, K<i>, dt, e0 (degrees).
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, default_value = "")]
        values: String,
        /// Settling band in degrees.
        #[arg(long, default_value_t = 0.1)]
        band_deg: f64,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the model and controller property suite.
    Properties {
        /// Scenario supplying parameters and gains; the reference scenario otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 1000)]
        energy_draws: usize,
        #[arg(long, default_value_t = SuiteOptions::default().seed)]
        seed: u64,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ConstraintBreach { .. } => EXIT_BREACH,
            Error::NonFinite { .. } | Error::SingularMass { .. } => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            trace,
            metrics,
            band_deg,
        } => simulate(&config, trace, metrics, band_deg),
        Command::Certify {
            config,
            m1,
            m2,
            zeta1,
            zeta2,
            kn,
            rho,
            report,
        } => certify(&config, m1, m2, zeta1, zeta2, kn, rho, report.as_deref()),
        Command::Verify { trace, config } => verify(&trace, &config),
        Command::Sweep {
            config,
            param,
            values,
            band_deg,
            out,
        } => run_sweep(&config, &param, &values, band_deg, out.as_deref()),
        Command::Properties {
            config,
            draws,
            energy_draws,
            seed,
        } => run_properties(config.as_deref(), draws, energy_draws, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn metrics_report(m: &RunMetrics, trace: &Trace, horizon: f64) -> String {
    let mut out = String::new();
    let mut kv = |k: String, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    kv("samples".into(), trace.len().to_string());
    kv("horizon_s".into(), horizon.to_string());
    kv("band_deg".into(), m.band.to_degrees().to_string());
    for (i, e) in m.max_abs_error.iter().enumerate() {
        kv(format!("max_abs_error_deg.{}", i + 1), e.to_degrees().to_string());
    }
    kv(
        "settling_time_s".into(),
        m.settling_time.map_or_else(|| "never".into(), |t| t.to_string()),
    );
    kv(
        "steady_state_max_error_deg".into(),
        m.steady_state_max_error.to_degrees().to_string(),
    );
    for (i, t) in m.max_abs_tau.iter().enumerate() {
        kv(format!("max_abs_tau.{}", i + 1), t.to_string());
    }
    kv("saturated".into(), trace.saturated().to_string());
    for (j, th) in m.theta_hat_final.iter().enumerate() {
        kv(format!("theta_hat_final.{}", j + 1), th.to_string());
    }
    for (j, r) in m.theta_hat_drift_rate.iter().enumerate() {
        kv(format!("theta_hat_drift_rate.{}", j + 1), r.to_string());
    }
    if let (Some(first), Some(last)) = (trace.records.first(), trace.last()) {
        kv("v_initial".into(), first.v.to_string());
        kv("v_final".into(), last.v.to_string());
    }
    out
}

fn simulate(
    config: &Path,
    trace_path: Option<PathBuf>,
    metrics_path: Option<PathBuf>,
    band_deg: f64,
) -> Result<(), Failure> {
    let scenario = Scenario::load(config)?;
    let trace_path = trace_path
        .or(scenario.output.trace_path.clone())
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    let metrics_path = metrics_path
        .or(scenario.output.metrics_path.clone())
        .unwrap_or_else(|| PathBuf::from("metrics.txt"));

    let sim = Simulator::new(TwoLinkArm, scenario.sim.clone())?;
    let trace = sim.run()?;

    let file = File::create(&trace_path).map_err(|e| io_failure(&trace_path, e))?;
    let mut w = BufWriter::new(file);
    trace_csv::write_trace(&trace, &mut w)
        .and_then(|()| w.flush())
        .map_err(|e| io_failure(&trace_path, e))?;

    let metrics = lyapunov::run_metrics(&trace, band_deg.to_radians());
    let report = metrics_report(&metrics, &trace, scenario.sim.horizon);
    write_file(&metrics_path, &report)?;

    print!("{report}");
    println!("trace written to {}", trace_path.display());
    println!("metrics written to {}", metrics_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn certify(
    config: &Path,
    m1: Option<f64>,
    m2: Option<f64>,
    zeta1: Option<f64>,
    zeta2: Option<f64>,
    kn: Option<f64>,
    rho: f64,
    report_path: Option<&Path>,
) -> Result<(), Failure> {
    let scenario = Scenario::load(config)?;
    let cfg = &scenario.sim;
    let (grid_m1, grid_m2) = inertia_bounds(&TwoLinkArm, &cfg.theta_true, INERTIA_GRID_POINTS);
    let bounds = AnalysisBounds {
        m1: m1.unwrap_or(grid_m1),
        m2: m2.unwrap_or(grid_m2),
        zeta1,
        zeta2,
        k_n: kn,
        z0_norm: lyapunov::initial_z_norm(cfg),
        rho,
    };
    bounds.validate()?;
    let report = lyapunov::certify_gains(&cfg.gains, &bounds);
    println!("{report}");
    if let Some(path) = report_path {
        write_file(path, &report.to_key_values())?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, "gain certification failed"))
    }
}

fn verify(trace_path: &Path, config: &Path) -> Result<(), Failure> {
    let scenario = Scenario::load(config)?;
    let file = File::open(trace_path).map_err(|e| io_failure(trace_path, e))?;
    let trace = trace_csv::read_trace(BufReader::new(file))
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", trace_path.display())))?;
    let gains = &scenario.sim.gains;
    let delta = gains.delta();
    if let Some(r) = trace.records.first() {
        if r.e.len() != delta.len() {
            return Err(Failure::new(
                EXIT_CONFIG,
                format!(
                    "trace has {} joints but the scenario has {}",
                    r.e.len(),
                    delta.len()
                ),
            ));
        }
    }

    if gains.tau_max().is_some() || trace.saturated() {
        eprintln!(
            "warning: torque saturation is enabled; the decrease check is only meaningful for unsaturated runs"
        );
    }

    // Header is line 1 and the writer emits no blank lines.
    let mut violations = Vec::new();
    for (idx, r) in trace.records.iter().enumerate() {
        for (i, (e, d)) in r.e.iter().zip(delta.iter()).enumerate() {
            if !(e.abs() < *d) {
                violations.push((idx + 2, r.t, i + 1, *e));
            }
        }
    }

    let rep = lyapunov::verify_decrease(&trace, gains);
    println!("records                 {}", trace.len());
    println!("V initial / final       {:.9} / {:.9}", rep.v_initial, rep.v_final);
    println!("increase tolerance      {:.3e}", rep.tolerance);
    println!("above-tolerance steps   {} of {}", rep.increases, rep.steps);
    println!("largest step increase   {:.3e}", rep.max_increase);
    if let Some(t) = rep.first_increase_time {
        println!("first increase at       t = {t} s");
    }
    println!("corr(dV/dt, -|x|^2)     {:.4}", rep.correlation);
    println!("beta estimate           {:.6}", rep.beta_hat);
    println!("gain condition met      {}", rep.conditions_met);
    println!("saturation active       {}", rep.saturated);
    println!("constraint violations   {}", violations.len());
    for (line, t, joint, e) in violations.iter().take(10) {
        println!(
            "  line {line}: t = {t} s, joint {joint}, |e| = {:.6} deg >= {:.6} deg",
            e.abs().to_degrees(),
            delta[joint - 1].to_degrees()
        );
    }
    if violations.len() > 10 {
        println!("  ... {} more", violations.len() - 10);
    }

    let ok = rep.passed() && violations.is_empty();
    println!("overall                 {}", if ok { "PASS" } else { "FAIL" });
    if ok {
        Ok(())
    } else {
        let mut msg = String::from("verification failed");
        if let Some((line, ..)) = violations.first() {
            let _ = write!(msg, ": constraint violated at line {line}");
        } else if let Some(t) = rep.first_increase_time {
            let _ = write!(msg, ": V increased at t = {t} s");
        }
        Err(Failure::new(EXIT_VERIFY, msg))
    }
}

fn parse_values(values: &str) -> Result<Vec<f64>, Failure> {
    values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("--values: `{s}`: {e}")))
        })
        .collect()
}

fn run_sweep(
    config: &Path,
    param: &str,
    values: &str,
    band_deg: f64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let param: SweepParam = param.parse()?;
    let values = parse_values(values)?;
    let scenario = Scenario::load(config)?;
    let n = scenario.sim.q0.len();
    let rows = sweep::sweep(&scenario.sim, param, &values, band_deg.to_radians());
    let csv = sweep::summary_csv(&rows, n);
    match out {
        Some(path) => write_file(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run_properties(
    config: Option<&Path>,
    draws: usize,
    energy_draws: usize,
    seed: u64,
) -> Result<(), Failure> {
    let scenario = match config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::reference(),
    };
    let opts = SuiteOptions {
        draws,
        energy_draws,
        seed,
        ..SuiteOptions::default()
    };
    let report = properties::run_suite(&TwoLinkArm, &scenario.sim, &opts);
    println!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_VERIFY,
            format!("{} of {} properties failed", report.failed(), report.results.len()),
        ))
    }
}
