//! One-parameter sweeps over a base scenario.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::controller::GainConfig;
use crate::dynamics::TwoLinkArm;
use crate::error::{Error, Result};
use crate::lyapunov::{self, RunMetrics};
use crate::simulator::{SimConfig, Simulator};

/// Parameters that may be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Diagonal entry of `k` (0-based joint).
    FilterGain(usize),
    /// Barrier numerator `K_i` (0-based joint).
    BarrierGain(usize),
    Dt,
    /// Initial error in degrees, applied to every joint.
    InitialError,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let joint = |rest: &str| rest.parse::<usize>().ok().filter(|i| *i >= 1).map(|i| i - 1);
        match s {
            "dt" => Ok(SweepParam::Dt),
            "e0" => Ok(SweepParam::InitialError),
            _ => {
                if let Some(i) = s.strip_prefix('k').and_then(joint) {
                    Ok(SweepParam::FilterGain(i))
                } else if let Some(i) = s.strip_prefix('K').and_then(joint) {
                    Ok(SweepParam::BarrierGain(i))
                } else {
                    Err(Error::UnknownParameter(s.to_string()))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Completed {
        metrics: RunMetrics,
        final_q: Vec<f64>,
    },
    Breach {
        time: f64,
        joint: usize,
    },
    NonFinite {
        time: f64,
    },
    /// The swept value made the scenario invalid.
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: SweepOutcome,
}

fn rebuild_gains(g: &GainConfig, k: Vec<f64>, barrier: Vec<f64>) -> Result<GainConfig> {
    GainConfig::new(
        &k,
        &barrier,
        g.delta().as_slice(),
        g.gamma().as_slice(),
        g.variant(),
        g.tau_max(),
    )
}

/// Applies one swept value to a copy of `base`.
pub fn apply(base: &SimConfig, param: SweepParam, value: f64) -> Result<SimConfig> {
    let mut cfg = base.clone();
    let n = cfg.q0.len();
    match param {
        SweepParam::FilterGain(i) | SweepParam::BarrierGain(i) if i >= n => {
            return Err(Error::UnknownParameter(format!("joint {} does not exist", i + 1)));
        }
        SweepParam::FilterGain(i) => {
            let mut k: Vec<f64> = cfg.gains.k().iter().copied().collect();
            k[i] = value;
            cfg.gains = rebuild_gains(&cfg.gains, k, cfg.gains.barrier().iter().copied().collect())?;
        }
        SweepParam::BarrierGain(i) => {
            let mut b: Vec<f64> = cfg.gains.barrier().iter().copied().collect();
            b[i] = value;
            cfg.gains = rebuild_gains(&cfg.gains, cfg.gains.k().iter().copied().collect(), b)?;
        }
        SweepParam::Dt => cfg.dt = value,
        SweepParam::InitialError => {
            let q_d0 = cfg.trajectory.sample(0.0).q;
            cfg.q0 = q_d0.add_scalar(-value.to_radians());
        }
    }
    cfg.validate(&TwoLinkArm)?;
    Ok(cfg)
}

fn run_one(base: &SimConfig, param: SweepParam, value: f64, band: f64) -> SweepRow {
    let outcome = match apply(base, param, value) {
        Err(e) => SweepOutcome::Rejected(e.to_string()),
        Ok(cfg) => match Simulator::new(TwoLinkArm, cfg).and_then(|s| s.run()) {
            Ok(trace) => SweepOutcome::Completed {
                metrics: lyapunov::run_metrics(&trace, band),
                final_q: trace.last().map(|r| r.q.iter().copied().collect()).unwrap_or_default(),
            },
            Err(Error::ConstraintBreach { time, joint, .. }) => SweepOutcome::Breach { time, joint },
            Err(Error::NonFinite { time }) => SweepOutcome::NonFinite { time },
            Err(e) => SweepOutcome::Rejected(e.to_string()),
        },
    };
    SweepRow { value, outcome }
}

/// Runs one simulation per value (concurrently); rows come back in input
/// order. `band` is the settling band in radians.
pub fn sweep(base: &SimConfig, param: SweepParam, values: &[f64], band: f64) -> Vec<SweepRow> {
    values
        .par_iter()
        .map(|&v| run_one(base, param, v, band))
        .collect()
}

/// Summary CSV: value, status, per-joint max error (deg), settling time (s),
/// steady-state max error (deg), max |τ|, per-joint final position (rad).
pub fn summary_csv(rows: &[SweepRow], n: usize) -> String {
    let mut out = String::from("value,status");
    for i in 1..=n {
        let _ = write!(out, ",max_e{i}_deg");
    }
    out.push_str(",settle_s,steady_max_deg,max_tau");
    for i in 1..=n {
        let _ = write!(out, ",final_q{i}");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}", row.value);
        match &row.outcome {
            SweepOutcome::Completed { metrics, final_q } => {
                out.push_str(",ok");
                for e in &metrics.max_abs_error {
                    let _ = write!(out, ",{}", e.to_degrees());
                }
                match metrics.settling_time {
                    Some(t) => {
                        let _ = write!(out, ",{t}");
                    }
                    None => out.push_str(",never"),
                }
                let max_tau = metrics.max_abs_tau.iter().copied().fold(0.0, f64::max);
                let _ = write!(out, ",{},{}", metrics.steady_state_max_error.to_degrees(), max_tau);
                for q in final_q {
                    let _ = write!(out, ",{q}");
                }
            }
            other => {
                let status = match other {
                    SweepOutcome::Breach { time, joint } => format!("breach(joint {} at {time} s)", joint + 1),
                    SweepOutcome::NonFinite { time } => format!("nonfinite(at {time} s)"),
                    SweepOutcome::Rejected(m) => format!("rejected({})", m.replace(',', ";")),
                    SweepOutcome::Completed { .. } => unreachable!(),
                };
                let _ = write!(out, ",{status}");
                out.push_str(&",".repeat(2 * n + 3));
            }
        }
        out.push('\n');
    }
    out
}
