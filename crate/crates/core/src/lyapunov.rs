//! Barrier Lyapunov function, gain certification and run metrics.
//!
//! Everything here needs the true parameters (through `θ̃ = θ − θ̂`) and is
//! an analysis-time tool only.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::controller::{BarrierVariant, GainConfig, BARRIER_GUARD};
use crate::dynamics::JointVector;
use crate::error::{Error, Result};
use crate::simulator::{SimConfig, Trace};

/// Default error envelope `‖e‖∞ <= ρΔ` at which `max K_e` is evaluated.
pub const DEFAULT_ENVELOPE: f64 = 0.99;

/// Barrier part of `V`: `Σ K_i/2 ln(Δ_i²/(Δ_i² − e_i²))` or
/// `Σ Δ_i²/π tan(π/2 e_i²/Δ_i²)`.
pub fn barrier_potential(e: &JointVector, gains: &GainConfig) -> Result<f64> {
    let mut sum = 0.0;
    for i in 0..e.len() {
        let d = gains.delta()[i];
        let ei = e[i];
        if !(ei.abs() < d * (1.0 - BARRIER_GUARD)) {
            return Err(Error::ConstraintBreach {
                time: f64::NAN,
                joint: i,
                error: ei.abs(),
                limit: d,
            });
        }
        let d2 = d * d;
        sum += match gains.variant() {
            // ln(Δ²/(Δ² − e²)) = −ln(1 − e²/Δ²)
            BarrierVariant::Logarithmic => -0.5 * gains.barrier()[i] * (-(ei * ei) / d2).ln_1p(),
            BarrierVariant::Tangent => d2 / PI * (FRAC_PI_2 * ei * ei / d2).tan(),
        };
    }
    Ok(sum)
}

/// `V = ½ηᵀMη + ½e_fᵀe_f + barrier(e) + ½θ̃ᵀΓ⁻¹θ̃`.
pub fn blf_value(
    e: &JointVector,
    e_f: &JointVector,
    eta: &JointVector,
    theta_tilde: &DVector<f64>,
    mass: &DMatrix<f64>,
    gains: &GainConfig,
) -> Result<f64> {
    let kinetic = 0.5 * eta.dot(&(mass * eta));
    let filter = 0.5 * e_f.norm_squared();
    let adapt = 0.5
        * theta_tilde
            .iter()
            .zip(gains.gamma().iter())
            .map(|(t, g)| t * t / g)
            .sum::<f64>();
    Ok(kinetic + filter + barrier_potential(e, gains)? + adapt)
}

/// `K_e` entries with every joint error at `ρΔ_i`.
pub fn barrier_gain_at_envelope(gains: &GainConfig, rho: f64) -> DVector<f64> {
    match gains.variant() {
        BarrierVariant::Logarithmic => DVector::from_iterator(
            gains.dof(),
            gains
                .barrier()
                .iter()
                .zip(gains.delta().iter())
                .map(|(k, d)| k / (d * d * (1.0 - rho * rho))),
        ),
        BarrierVariant::Tangent => {
            let t = (FRAC_PI_2 * rho * rho).tan();
            DVector::from_element(gains.dof(), 1.0 + t * t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaBounds {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Envelope factor used for `max K_e`.
    pub rho: f64,
    pub k_e_max: f64,
}

/// `λ1 = ½ min{m1, 1, min K_i / max Δ_i², λ_min(Γ⁻¹)}` and
/// `λ2 = ½ max{m2, 1, max K_e, λ_max(Γ⁻¹)}` with `max K_e` taken at the
/// envelope `|e_i| = ρΔ_i`.
pub fn lambda_bounds(gains: &GainConfig, m1: f64, m2: f64, rho: f64) -> LambdaBounds {
    let (k_min, d2_max) = gains.gain_condition();
    let inv_gamma_min = 1.0 / gains.gamma().max();
    let inv_gamma_max = 1.0 / gains.gamma().min();
    let k_e_max = barrier_gain_at_envelope(gains, rho).max();
    LambdaBounds {
        lambda1: 0.5 * [m1, 1.0, k_min / d2_max, inv_gamma_min].into_iter().fold(f64::INFINITY, f64::min),
        lambda2: 0.5 * [m2, 1.0, k_e_max, inv_gamma_max].into_iter().fold(f64::NEG_INFINITY, f64::max),
        rho,
        k_e_max,
    }
}

/// Constants the certifier needs beyond the gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisBounds {
    pub m1: f64,
    pub m2: f64,
    pub zeta1: Option<f64>,
    pub zeta2: Option<f64>,
    pub k_n: Option<f64>,
    /// `‖z(0)‖` with `z = [ηᵀ e_fᵀ eᵀ θ̃ᵀ]ᵀ`.
    pub z0_norm: f64,
    pub rho: f64,
}

impl AnalysisBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.m1 > 0.0 && self.m2 >= self.m1) {
            return Err(Error::ConfigParse(format!(
                "inertia bounds need 0 < m1 <= m2 (got m1 = {}, m2 = {})",
                self.m1, self.m2
            )));
        }
        for (name, v) in [("zeta1", self.zeta1), ("zeta2", self.zeta2)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::ConfigParse(format!("{name} = {v} must be nonnegative")));
                }
            }
        }
        if let Some(k) = self.k_n {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::ConfigParse(format!("kn = {k} must be positive")));
            }
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::ConfigParse(format!("rho = {} must lie in (0, 1)", self.rho)));
        }
        Ok(())
    }
}

/// `‖z(0)‖` for a scenario: `η(0) = q̇_d(0) − q̇(0) + e(0)`, `e_f(0) = 0`.
pub fn initial_z_norm(cfg: &SimConfig) -> f64 {
    let desired = cfg.trajectory.sample(0.0);
    let e0 = &desired.q - &cfg.q0;
    let eta0 = &desired.qd - &cfg.qdot0 + &e0;
    let theta_tilde = cfg.theta_true.as_vector() - &cfg.theta_hat0;
    (eta0.norm_squared() + e0.norm_squared() + theta_tilde.norm_squared()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotChecked,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::NotChecked => "NOT-CHECKED",
        })
    }
}

/// One inequality `lhs <relation> rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub key: &'static str,
    pub description: &'static str,
    pub lhs: Option<f64>,
    pub relation: &'static str,
    pub rhs: Option<f64>,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub checks: Vec<Check>,
    pub lambda: LambdaBounds,
    pub m1: f64,
    pub m2: f64,
    pub z0_norm: f64,
    /// Required `k` from the design rule, when `ζ1`, `ζ2`, `k_n` are known.
    pub k_required: Option<f64>,
    /// Smallest diagonal entry of `k`, compared against the scalar rule.
    pub k_min: f64,
}

impl CertificationReport {
    /// True when every checked inequality passes; unchecked ones are ignored.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, key: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.key == key)
    }

    /// `key=value` lines for machine consumption.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("m1", self.m1.to_string());
        kv("m2", self.m2.to_string());
        kv("lambda1", self.lambda.lambda1.to_string());
        kv("lambda2", self.lambda.lambda2.to_string());
        kv("envelope_rho", self.lambda.rho.to_string());
        kv("k_e_max", self.lambda.k_e_max.to_string());
        kv("z0_norm", self.z0_norm.to_string());
        kv("k_min", self.k_min.to_string());
        if let Some(k) = self.k_required {
            kv("k_required", k.to_string());
        }
        for c in &self.checks {
            kv(&format!("{}.status", c.key), c.status.to_string());
            if let Some(l) = c.lhs {
                kv(&format!("{}.lhs", c.key), l.to_string());
            }
            if let Some(r) = c.rhs {
                kv(&format!("{}.rhs", c.key), r.to_string());
            }
        }
        kv("passed", self.passed().to_string());
        out
    }
}

impl fmt::Display for CertificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inertia bounds      m1 = {:.6}  m2 = {:.6}", self.m1, self.m2)?;
        writeln!(
            f,
            "lambda bounds       lambda1 = {:.6}  lambda2 = {:.6}  (max K_e = {:.6} at |e_i| <= {} * delta_i)",
            self.lambda.lambda1, self.lambda.lambda2, self.lambda.k_e_max, self.lambda.rho
        )?;
        writeln!(f, "initial |z(0)|      {:.6}", self.z0_norm)?;
        for c in &self.checks {
            let side = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.7}"));
            writeln!(
                f,
                "{:<12} {:<11} {} {} {}   ({})",
                c.key,
                c.status.to_string(),
                side(c.lhs),
                c.relation,
                side(c.rhs),
                c.description
            )?;
        }
        if let Some(k) = self.k_required {
            writeln!(f, "required k = 1/m1 (1 + zeta1^2 kn + zeta2^2 kn) = {k:.7}; min_i k_i = {:.7}", self.k_min)?;
        }
        write!(f, "overall             {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Evaluates every gain inequality the stability result relies on.
///
/// Conditions whose constants are absent are reported as not checked.
pub fn certify_gains(gains: &GainConfig, bounds: &AnalysisBounds) -> CertificationReport {
    let lambda = lambda_bounds(gains, bounds.m1, bounds.m2, bounds.rho);
    let (k_min_barrier, d2_max) = gains.gain_condition();
    let k_min = gains.k().min();
    let status = |ok: bool| if ok { CheckStatus::Pass } else { CheckStatus::Fail };

    let mut checks = vec![Check {
        key: "K-condition",
        description: "min K_i >= max delta_i^2",
        lhs: Some(k_min_barrier),
        relation: ">=",
        rhs: Some(d2_max),
        status: status(k_min_barrier >= d2_max),
    }];

    let k_required = match (bounds.zeta1, bounds.zeta2, bounds.k_n) {
        (Some(z1), Some(z2), Some(kn)) => {
            Some((1.0 + z1 * z1 * kn + z2 * z2 * kn) / bounds.m1)
        }
        _ => None,
    };
    checks.push(Check {
        key: "k-design",
        description: "min_i k_i >= (1 + zeta1^2 kn + zeta2^2 kn) / m1",
        lhs: Some(k_min),
        relation: ">=",
        rhs: k_required,
        status: k_required.map_or(CheckStatus::NotChecked, |k| status(k_min >= k)),
    });

    let kn_bound = 1.0 + lambda.lambda2 / lambda.lambda1 * bounds.z0_norm * bounds.z0_norm;
    checks.push(Check {
        key: "kn-bound",
        description: "kn > 1 + (lambda2/lambda1) |z(0)|^2",
        lhs: bounds.k_n,
        relation: ">",
        rhs: Some(kn_bound),
        status: bounds.k_n.map_or(CheckStatus::NotChecked, |kn| status(kn > kn_bound)),
    });

    CertificationReport {
        checks,
        lambda,
        m1: bounds.m1,
        m2: bounds.m2,
        z0_norm: bounds.z0_norm,
        k_required,
        k_min,
    }
}

/// `‖x‖² = ‖η‖² + ‖e_f‖² + ‖e‖²`.
fn x_norm_sq(r: &crate::simulator::TraceRecord) -> f64 {
    r.eta.norm_squared() + r.e_f.norm_squared() + r.e.norm_squared()
}

/// Outcome of the numerical non-increase check on `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecreaseReport {
    pub steps: usize,
    /// Per-step tolerance `1e−6 (1 + V(0))`.
    pub tolerance: f64,
    pub increases: usize,
    pub max_increase: f64,
    pub first_increase_time: Option<f64>,
    /// Pearson correlation between `ΔV/Δt` and `−‖x‖²`.
    pub correlation: f64,
    /// Least-squares fit of `ΔV/Δt ≈ −β ‖x‖²`.
    pub beta_hat: f64,
    pub v_initial: f64,
    pub v_final: f64,
    /// Saturation was active, so the analysis makes no claim.
    pub saturated: bool,
    /// `min K_i >= max Δ_i²` held for the run.
    pub conditions_met: bool,
}

impl DecreaseReport {
    pub fn passed(&self) -> bool {
        self.increases == 0
    }
}

pub const DECREASE_RELATIVE_TOL: f64 = 1e-6;

/// Counts per-step increases of `V` above `1e−6 (1 + V(0))`.
pub fn verify_decrease(trace: &Trace, gains: &GainConfig) -> DecreaseReport {
    let recs = &trace.records;
    let v0 = recs.first().map_or(0.0, |r| r.v);
    let tolerance = DECREASE_RELATIVE_TOL * (1.0 + v0);
    let (lhs, rhs) = gains.gain_condition();

    let mut increases = 0;
    let mut max_increase = f64::NEG_INFINITY;
    let mut first_increase_time = None;
    let mut rates = Vec::with_capacity(recs.len());
    let mut xs = Vec::with_capacity(recs.len());
    for w in recs.windows(2) {
        let dv = w[1].v - w[0].v;
        max_increase = max_increase.max(dv);
        if dv > tolerance {
            increases += 1;
            first_increase_time.get_or_insert(w[1].t);
        }
        let dt = w[1].t - w[0].t;
        if dt > 0.0 {
            rates.push(dv / dt);
            xs.push(0.5 * (x_norm_sq(&w[0]) + x_norm_sq(&w[1])));
        }
    }

    let num: f64 = rates.iter().zip(&xs).map(|(d, x)| d * x).sum();
    let den: f64 = xs.iter().map(|x| x * x).sum();
    let beta_hat = if den > 0.0 { -num / den } else { 0.0 };
    let neg_x: Vec<f64> = xs.iter().map(|x| -x).collect();

    DecreaseReport {
        steps: recs.len().saturating_sub(1),
        tolerance,
        increases,
        max_increase: if recs.len() > 1 { max_increase } else { 0.0 },
        first_increase_time,
        correlation: pearson(&rates, &neg_x),
        beta_hat,
        v_initial: v0,
        v_final: recs.last().map_or(0.0, |r| r.v),
        saturated: trace.saturated(),
        conditions_met: lhs >= rhs,
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (da, db) = (a[i] - ma, b[i] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Scalar performance figures of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub band: f64,
    pub max_abs_error: Vec<f64>,
    /// First instant after which every `|e_i|` stays inside the band; `None`
    /// when the band is never reached for good.
    pub settling_time: Option<f64>,
    /// `max |e_i|` over the final quarter of the horizon.
    pub steady_state_max_error: f64,
    pub max_abs_tau: Vec<f64>,
    pub theta_hat_final: Vec<f64>,
    /// `|slope|` of a least-squares line through each `θ̂_j` over the final
    /// quarter of the horizon.
    pub theta_hat_drift_rate: Vec<f64>,
}

/// Largest `|e_i|` over records with `t > after`.
pub fn max_abs_error_after(trace: &Trace, after: f64) -> f64 {
    trace
        .records
        .iter()
        .filter(|r| r.t > after)
        .map(|r| r.e.amax())
        .fold(0.0, f64::max)
}

pub fn run_metrics(trace: &Trace, band: f64) -> RunMetrics {
    let recs = &trace.records;
    let Some(last) = recs.last() else {
        return RunMetrics {
            band,
            max_abs_error: vec![],
            settling_time: None,
            steady_state_max_error: 0.0,
            max_abs_tau: vec![],
            theta_hat_final: vec![],
            theta_hat_drift_rate: vec![],
        };
    };
    let n = last.e.len();
    let p = last.theta_hat.len();

    let mut max_abs_error = vec![0.0f64; n];
    let mut max_abs_tau = vec![0.0f64; n];
    for r in recs {
        for i in 0..n {
            max_abs_error[i] = max_abs_error[i].max(r.e[i].abs());
            max_abs_tau[i] = max_abs_tau[i].max(r.tau[i].abs());
        }
    }

    let settling_time = match recs.iter().rposition(|r| r.e.amax() > band) {
        None => Some(recs[0].t),
        Some(k) if k + 1 < recs.len() => Some(recs[k + 1].t),
        Some(_) => None,
    };

    let t0 = recs[0].t;
    let window_start = last.t - 0.25 * (last.t - t0);
    let tail: Vec<_> = recs.iter().filter(|r| r.t >= window_start).collect();
    let steady_state_max_error = tail.iter().map(|r| r.e.amax()).fold(0.0, f64::max);

    let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let theta_hat_drift_rate = (0..p)
        .map(|j| {
            let ys: Vec<f64> = tail.iter().map(|r| r.theta_hat[j]).collect();
            slope(&ts, &ys).abs()
        })
        .collect();

    RunMetrics {
        band,
        max_abs_error,
        settling_time,
        steady_state_max_error,
        max_abs_tau,
        theta_hat_final: last.theta_hat.iter().copied().collect(),
        theta_hat_drift_rate,
    }
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::TraceRecord;
    use nalgebra::dvector;

    fn gains(k: f64, d: f64, variant: BarrierVariant) -> GainConfig {
        GainConfig::without_gain_condition(&[1.0, 1.0], &[k, k], &[d, d], &[1.0; 5], variant, None)
            .unwrap()
    }

    #[test]
    fn blf_zero_and_single_term() {
        let g = gains(2.0, 0.12, BarrierVariant::Logarithmic);
        let z2 = dvector![0.0, 0.0];
        let z5 = DVector::zeros(5);
        let m = DMatrix::identity(2, 2);
        assert_eq!(blf_value(&z2, &z2, &z2, &z5, &m, &g).unwrap(), 0.0);
        assert_eq!(blf_value(&z2, &dvector![1.0, 0.0], &z2, &z5, &m, &g).unwrap(), 0.5);
    }

    #[test]
    fn blf_breach() {
        let g = gains(2.0, 0.12, BarrierVariant::Tangent);
        let z2 = dvector![0.0, 0.0];
        let m = DMatrix::identity(2, 2);
        assert!(matches!(
            blf_value(&dvector![0.0, 0.12], &z2, &z2, &DVector::zeros(5), &m, &g),
            Err(Error::ConstraintBreach { joint: 1, .. })
        ));
    }

    #[test]
    fn barrier_terms_agree_to_second_order() {
        // Log term ≈ K e²/(2Δ²), tan term ≈ e²/2; equal when K = Δ².
        let d = 0.2;
        let e = 1e-4;
        let log = barrier_potential(&dvector![e, 0.0], &gains(d * d, d, BarrierVariant::Logarithmic)).unwrap();
        let tan = barrier_potential(&dvector![e, 0.0], &gains(d * d, d, BarrierVariant::Tangent)).unwrap();
        assert!((log - 0.5 * e * e).abs() < 1e-14);
        assert!((tan - 0.5 * e * e).abs() < 1e-14);
    }

    #[test]
    fn lambda_unit_case() {
        let g = GainConfig::new(&[1.0], &[1.0], &[1.0], &[1.0], BarrierVariant::Logarithmic, None).unwrap();
        let lb = lambda_bounds(&g, 1.0, 1.0, 0.9);
        assert_eq!(lb.lambda1, 0.5);
        let ke = 1.0 / (1.0 - 0.81);
        assert!((lb.lambda2 - 0.5 * ke).abs() < 1e-12);
    }

    #[test]
    fn lambda_large_gamma() {
        let g = GainConfig::new(&[1.0], &[1.0], &[1.0], &[1e3, 5e3], BarrierVariant::Logarithmic, None).unwrap();
        let lb = lambda_bounds(&g, 1.0, 1.0, 0.5);
        assert_eq!(lb.lambda1, 0.5 / 5e3);
    }

    #[test]
    fn certify_degenerate_zeta() {
        let g = GainConfig::new(&[1.0, 2.0], &[2.0, 2.0], &[0.12, 0.12], &[1.0; 5], BarrierVariant::Logarithmic, None)
            .unwrap();
        let b = AnalysisBounds {
            m1: 1.0,
            m2: 2.0,
            zeta1: Some(0.0),
            zeta2: Some(0.0),
            k_n: Some(1.0),
            z0_norm: 0.0,
            rho: 0.99,
        };
        let rep = certify_gains(&g, &b);
        assert_eq!(rep.k_required, Some(1.0));
        assert_eq!(rep.check("k-design").unwrap().status, CheckStatus::Pass);
        // kn = 1 is not strictly above 1 + 0.
        assert_eq!(rep.check("kn-bound").unwrap().status, CheckStatus::Fail);

        let rep = certify_gains(&g, &AnalysisBounds { zeta1: None, zeta2: None, k_n: None, ..b });
        assert_eq!(rep.check("k-design").unwrap().status, CheckStatus::NotChecked);
        assert_eq!(rep.check("kn-bound").unwrap().status, CheckStatus::NotChecked);
        assert!(rep.passed());
        assert_eq!(rep, certify_gains(&g, &AnalysisBounds { zeta1: None, zeta2: None, k_n: None, ..b }));
    }

    fn record(t: f64, e: f64, v: f64) -> TraceRecord {
        let z = dvector![0.0, 0.0];
        TraceRecord {
            t,
            q: z.clone(),
            q_d: z.clone(),
            e: dvector![e, 0.0],
            e_f: z.clone(),
            eta: z.clone(),
            tau: z.clone(),
            tau_raw: z.clone(),
            theta_hat: DVector::zeros(5),
            v,
            k_e: DVector::zeros(0),
        }
    }

    #[test]
    fn settling_time_definition() {
        let recs = vec![
            record(0.0, 0.5, 1.0),
            record(1.0, 0.05, 0.9),
            record(2.0, 0.2, 0.95),
            record(3.0, 0.05, 0.5),
            record(4.0, 0.01, 0.4),
        ];
        let trace = Trace { records: recs };
        let m = run_metrics(&trace, 0.1);
        assert_eq!(m.settling_time, Some(3.0));
        assert_eq!(m.max_abs_error, vec![0.5, 0.0]);
        assert_eq!(run_metrics(&trace, 0.001).settling_time, None);

        let rep = verify_decrease(&trace, &gains(2.0, 1.0, BarrierVariant::Logarithmic));
        assert_eq!(rep.increases, 1);
        assert_eq!(rep.first_increase_time, Some(2.0));
        assert!(rep.conditions_met);
    }

    #[test]
    fn violated_gain_condition_is_flagged() {
        let trace = Trace { records: vec![record(0.0, 0.0, 1.0), record(1.0, 0.0, 1.0)] };
        let rep = verify_decrease(&trace, &gains(0.01, 0.12, BarrierVariant::Logarithmic));
        assert!(!rep.conditions_met);
        assert!(rep.passed());
    }
}
